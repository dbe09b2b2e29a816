"""Exact-formula solver for the random two-point boundary problem

    -(a(x/eps) u')' = f on (0,1),  u(0) = 0, u(1) = b,

its homogenized limit with the harmonic-mean coefficient a* = 1/E[1/a(0)],
and the decomposition of the rescaled corrector into its limit part and
remainder terms.

In one dimension the solution is explicit:

    u_eps(x) = c_eps int_0^x a(y/eps)^-1 dy - int_0^x F(y) a(y/eps)^-1 dy,
    c_eps = (b + int_0^1 F/a) / (int_0^1 1/a),  F(x) = int_0^x f.

All dy-integrals share one midpoint rule on a grid aligned with the sampled
path of the driving Gaussian process (the coefficient oscillates at scale
eps, so alignment avoids aliasing and makes the corrector decomposition an
exact algebraic identity of the discrete quantities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParameterError, ResolutionError
from .hermite_core import CoefficientSampler
from .lrd_gauss import GaussianPath, KernelSpec, corrector_scale, simulate_path

__all__ = [
    "ProblemSpec",
    "SolutionPair",
    "CorrectorDecomposition",
    "antiderivative_F",
    "sample_fast_path",
    "solve_random",
    "solve_homogenized",
    "effective_coefficient",
    "limit_kernel",
    "decompose",
    "residual_check",
]


def _cumulative_simpson(f: Callable, edges: np.ndarray) -> np.ndarray:
    """Cumulative integral of f at the given edges, one Simpson panel per cell."""
    mids = 0.5 * (edges[:-1] + edges[1:])
    fe = np.asarray(f(edges), dtype=float)
    fm = np.asarray(f(mids), dtype=float)
    steps = np.diff(edges)
    panels = steps / 6.0 * (fe[:-1] + 4.0 * fm + fe[1:])
    return np.concatenate([[0.0], np.cumsum(panels)])


def antiderivative_F(f: Callable, x: float, cells: int = 1000) -> float:
    """F(x) = int_0^x f(y) dy by composite Simpson; F(0) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"x={x} must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    edges = np.linspace(0.0, x, cells + 1)
    return float(_cumulative_simpson(f, edges)[-1])


@dataclass
class ProblemSpec:
    """Source f, boundary value b, scale eps, coefficient sampler, y-cell count."""

    f: Callable[[np.ndarray], np.ndarray]
    b: float
    epsilon: float
    coeff: CoefficientSampler
    quad_grid: int = 1000
    _f_spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.quad_grid < 8:
            raise ParameterError("quad_grid must be at least 8")
        probe = np.linspace(0.0, 1.0, 257)
        vals = np.asarray(self.f(probe), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ParameterError("f must be finite on [0, 1]")
        # dense antiderivative table; F itself is smooth even when f is rough
        edges = np.linspace(0.0, 1.0, 4097)
        table = _cumulative_simpson(self.f, edges)
        object.__setattr__(self, "_f_spline", CubicSpline(edges, table))

    def F(self, y):
        """Antiderivative of the source, interpolated from a dense Simpson table."""
        return self._f_spline(np.asarray(y, dtype=float))

    def F_mean(self) -> float:
        """int_0^1 F(z) dz, via the midpoint rule shared by all dy-integrals."""
        mids = (np.arange(self.quad_grid) + 0.5) / self.quad_grid
        return float(np.mean(self.F(mids)))


@dataclass
class SolutionPair:
    """Random solution, homogenized solution, and their defining constants."""

    grid: np.ndarray
    u_eps: np.ndarray
    u_bar: np.ndarray
    c_eps: float
    c_star: float
    a_star: float
    a_cells: np.ndarray
    f_mids: np.ndarray


@dataclass
class CorrectorDecomposition:
    """Terms of the rescaled-corrector identity

    (u_eps - u_bar)/X = U_eps + (r_eps + rho_eps x / a*)/X,  X = eps d(1/eps).
    """

    grid: np.ndarray
    u_limit_term: np.ndarray
    r_eps: np.ndarray
    rho_eps: float
    x_eps: float


def sample_fast_path(
    kernel: KernelSpec,
    epsilon: float,
    cells: int,
    seed: int,
    window: float | None = None,
    truncation_tol: float = 0.2,
) -> GaussianPath:
    """A path of g resolving the fast variable y/eps over y in [0, 1].

    The grid step is 1/(eps * cells) in the fast variable, so sample j is the
    value used on the j-th y-cell of width 1/cells.  The default window is
    compensated truncation; see simulate_path.
    """
    delta = 1.0 / (epsilon * cells)
    span = 1.0 / epsilon
    if window is None:
        window = 16.0 * max(span, 64.0)
    window = math.ceil(window / delta) * delta
    return simulate_path(
        kernel,
        n=cells - 1,
        delta=delta,
        window=window,
        seed=seed,
        truncation_tol=truncation_tol,
        compensate=True,
    )


def _aligned_cells(spec: ProblemSpec, path: GaussianPath, resolution: float = 0.05):
    """Coefficient samples on the y-cell midgrid, checked against the path grid."""
    m_cells = spec.quad_grid
    implied = 1.0 / (spec.epsilon * path.delta)
    if abs(implied - m_cells) > 1e-6 * m_cells:
        raise ResolutionError(
            f"path grid step delta={path.delta} implies {implied:.1f} y-cells "
            f"but spec.quad_grid={m_cells}; regenerate the path with "
            "sample_fast_path(kernel, epsilon, quad_grid, seed)"
        )
    if path.delta > resolution * (1.0 + 1e-9):
        raise ResolutionError(
            f"fast grid step {path.delta} is coarser than the resolution "
            f"target {resolution}; the coefficient oscillation is unresolved"
        )
    if len(path.values) < m_cells:
        raise ResolutionError(
            f"path has {len(path.values)} samples, needs {m_cells}"
        )
    return spec.coeff.a_of(path.values[:m_cells])


def solve_random(spec: ProblemSpec, path: GaussianPath) -> SolutionPair:
    """Solve the random problem along one coefficient path (and its limit).

    Boundary values hold exactly: u_eps(0) = 0 by construction and
    u_eps(1) = b because c_eps is defined from the same discrete integrals.
    """
    m_cells = spec.quad_grid
    h = 1.0 / m_cells
    a_cells = _aligned_cells(spec, path)
    grid = np.linspace(0.0, 1.0, m_cells + 1)
    mids = (np.arange(m_cells) + 0.5) * h
    f_mids = np.asarray(spec.F(mids), dtype=float)

    inv_a = 1.0 / a_cells
    int_inv = h * np.sum(inv_a)
    int_f_inv = h * np.sum(f_mids * inv_a)
    c_eps = (spec.b + int_f_inv) / int_inv

    u_eps = np.concatenate([[0.0], np.cumsum(h * (c_eps - f_mids) * inv_a)])

    hom = solve_homogenized(spec)
    return SolutionPair(
        grid=grid,
        u_eps=u_eps,
        u_bar=hom.u_bar,
        c_eps=float(c_eps),
        c_star=hom.c_star,
        a_star=hom.a_star,
        a_cells=a_cells,
        f_mids=f_mids,
    )


def solve_homogenized(spec: ProblemSpec) -> SolutionPair:
    """Closed-form homogenized solution u_bar = c* x/a* - int_0^x F/a*."""
    a_star = effective_coefficient(spec.coeff)
    m_cells = spec.quad_grid
    h = 1.0 / m_cells
    grid = np.linspace(0.0, 1.0, m_cells + 1)
    mids = (np.arange(m_cells) + 0.5) * h
    f_mids = np.asarray(spec.F(mids), dtype=float)
    int_f = h * np.sum(f_mids)
    c_star = a_star * spec.b + int_f
    cum_f = np.concatenate([[0.0], np.cumsum(h * f_mids)])
    u_bar = (c_star * grid - cum_f) / a_star
    return SolutionPair(
        grid=grid,
        u_eps=u_bar.copy(),
        u_bar=u_bar,
        c_eps=float(c_star),
        c_star=float(c_star),
        a_star=float(a_star),
        a_cells=np.full(m_cells, a_star),
        f_mids=f_mids,
    )


def effective_coefficient(coeff: CoefficientSampler) -> float:
    """a* = 1/E[1/a(0)].  E[1/a] = V_0(Phi) + 1/a*, so rank >= 1 transforms
    reproduce the configured a* exactly; rank-0 transforms shift it by V_0."""
    if coeff.phi.declared_rank >= 1:
        return coeff.a_star
    v0 = coeff.phi.expansion[0]
    return 1.0 / (v0 + 1.0 / coeff.a_star)


def limit_kernel(x: float, y, spec: ProblemSpec) -> np.ndarray | float:
    """The corrector-limit integrand

    F(x, y) = [c* - F(y)] 1_[0,x](y) + x (F(y) - int_0^1 F - a* b) 1_[0,1](y).
    """
    if not 0.0 <= x <= 1.0:
        raise ParameterError(f"x={x} must lie in [0, 1]")
    scalar = np.isscalar(y)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    a_star = effective_coefficient(spec.coeff)
    c_star = a_star * spec.b + spec.F_mean()
    f_vals = np.asarray(spec.F(np.clip(y, 0.0, 1.0)), dtype=float)
    in_unit = (y >= 0.0) & (y <= 1.0)
    in_x = (y > 0.0) & (y <= x)  # half-open, so the x = 0 kernel vanishes
    out = np.where(in_x, c_star - f_vals, 0.0)
    out = out + np.where(in_unit, x * (f_vals - spec.F_mean() - a_star * spec.b), 0.0)
    return float(out[0]) if scalar else out


def decompose(
    spec: ProblemSpec, path: GaussianPath, pair: SolutionPair
) -> CorrectorDecomposition:
    """Split the rescaled corrector into the oscillatory-integral term and
    the remainders r_eps and rho_eps; the reconstruction identity is exact
    for the shared midpoint quadrature."""
    m_cells = spec.quad_grid
    h = 1.0 / m_cells
    q_cells = 1.0 / pair.a_cells - 1.0 / pair.a_star
    f_mids = pair.f_mids
    int_f = h * np.sum(f_mids)
    x_eps = corrector_scale(path.kernel, spec.epsilon)

    cum_q = np.concatenate([[0.0], np.cumsum(h * q_cells)])
    term_local = np.concatenate(
        [[0.0], np.cumsum(h * (pair.c_star - f_mids) * q_cells)]
    )
    weight = h * np.sum((f_mids - int_f - pair.a_star * spec.b) * q_cells)
    u_limit_term = (term_local + pair.grid * weight) / x_eps

    r_eps = (pair.c_eps - pair.c_star) * cum_q

    int_inv = h * np.sum(1.0 / pair.a_cells)
    int_q = cum_q[-1]
    int_fq = h * np.sum(f_mids * q_cells)
    rho_eps = (pair.a_star / int_inv) * (
        (pair.a_star * spec.b + int_f) * int_q**2 - int_fq * int_q
    )
    return CorrectorDecomposition(
        grid=pair.grid,
        u_limit_term=u_limit_term,
        r_eps=r_eps,
        rho_eps=float(rho_eps),
        x_eps=float(x_eps),
    )


def residual_check(pair: SolutionPair, spec: ProblemSpec, path: GaussianPath) -> float:
    """Max interior residual of the flux-form finite difference
    -(a u')' - f, using the conservative flux a(x/eps) u' per cell."""
    h = 1.0 / spec.quad_grid
    flux = pair.a_cells * np.diff(pair.u_eps) / h
    interior = pair.grid[1:-1]
    f_vals = np.asarray(spec.f(interior), dtype=float)
    residual = -(np.diff(flux) / h) - f_vals
    return float(np.max(np.abs(residual)))


def flux_defect(pair: SolutionPair) -> float:
    """Max deviation of a(x/eps) u' + F(x) from the constant c_eps."""
    h = 1.0 / (len(pair.grid) - 1)
    flux = pair.a_cells * np.diff(pair.u_eps) / h
    return float(np.max(np.abs(flux + pair.f_mids - pair.c_eps)))
