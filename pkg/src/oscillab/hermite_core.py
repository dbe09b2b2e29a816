"""Hermite polynomials, chaos expansions, and bounded rank-m transform builders.

Everything here is relative to the standard Gaussian measure nu.  A transform
Phi in L^2(nu) expands as Phi = sum_q (V_q / q!) H_q with
V_q = int Phi H_q dnu, and its Hermite rank is the smallest q with V_q != 0.
Two constructions of bounded rank-m transforms are provided: a centred
two-function combination for rank 2, and an Ornstein-Uhlenbeck filtered
construction that reaches any rank m with an explicit sup-norm budget.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    ConditioningError,
    ConstructionError,
    InputDomainError,
    ParameterError,
)

__all__ = [
    "HermiteExpansion",
    "RankedFunction",
    "CoefficientSampler",
    "hermite_eval",
    "gauss_hermite_nodes",
    "expand",
    "ou_semigroup",
    "vandermonde_weights",
    "construct_rank_m",
    "construct_rank_2_bounded",
    "pure_hermite",
    "zero_transform",
    "shifted_logistic",
    "coefficient_sampler",
    "logistic",
]

DEFAULT_QUADRATURE_ORDER = 200
DEFAULT_TRUNCATION = 30
RANK_THRESHOLD = 1e-8


@functools.lru_cache(maxsize=16)
def gauss_hermite_nodes(order: int):
    """Gauss-Hermite nodes and weights for the probabilists' weight exp(-x^2/2),
    with the weights normalized to sum to one (an expectation under nu)."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / math.sqrt(2.0 * math.pi)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def hermite_eval(q: int, x):
    """Probabilists' Hermite polynomial H_q(x) by the three-term recurrence
    H_{q+1} = x H_q - q H_{q-1}."""
    if q < 0:
        raise ParameterError(f"Hermite order must be >= 0, got {q}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if q == 0:
        return prev
    cur = x.copy()
    for k in range(1, q):
        prev, cur = cur, x * cur - k * prev
    return cur


def _orthonormal_hermite_table(q_max: int, x: np.ndarray) -> np.ndarray:
    """Rows h_q(x) = H_q(x)/sqrt(q!), stable for moderately large q."""
    table = np.empty((q_max + 1, len(x)))
    table[0] = 1.0
    if q_max >= 1:
        table[1] = x
    for q in range(1, q_max):
        table[q + 1] = (x * table[q] - math.sqrt(q) * table[q - 1]) / math.sqrt(q + 1)
    return table


@dataclass
class HermiteExpansion:
    """Coefficients V_0..V_Q of a transform in the Hermite basis."""

    coeffs: np.ndarray
    quadrature_order: int

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    @property
    def normalized(self) -> np.ndarray:
        """Coefficients against the orthonormal basis, V_q / sqrt(q!).

        These carry absolute quadrature error ~1e-15; the raw V_q at large q
        inherit that error scaled by sqrt(q!), so zero tests belong here.
        """
        return self.coeffs / _sqrt_factorials(len(self.coeffs))

    def series_norm_sq(self) -> float:
        """Parseval sum sum_q V_q^2 / q! (converges to the L2(nu) norm)."""
        return float(np.sum(self.normalized**2))

    def rank(self, threshold: float = RANK_THRESHOLD) -> int:
        """Smallest q with |V_q| above threshold * max(1, ||Phi||_L2)."""
        scale = max(1.0, math.sqrt(self.series_norm_sq()))
        idx = np.nonzero(np.abs(self.normalized) > threshold * scale)[0]
        if len(idx) == 0:
            raise ConstructionError("expansion has no coefficient above threshold")
        return int(idx[0])

    def __getitem__(self, q: int) -> float:
        return float(self.coeffs[q])


def _sqrt_factorials(count: int) -> np.ndarray:
    out = np.ones(count)
    for q in range(1, count):
        out[q] = out[q - 1] * math.sqrt(q)
    return out


def expand(
    phi: Callable[[np.ndarray], np.ndarray],
    truncation: int = DEFAULT_TRUNCATION,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
) -> HermiteExpansion:
    """Hermite coefficients V_q = int phi H_q dnu by Gauss-Hermite quadrature."""
    if quadrature_order < 2 * truncation:
        raise ParameterError(
            f"quadrature_order={quadrature_order} must be >= 2*truncation={2 * truncation}"
        )
    nodes, weights = gauss_hermite_nodes(quadrature_order)
    vals = np.asarray(phi(nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InputDomainError("phi returned a non-finite value at a quadrature node")
    table = _orthonormal_hermite_table(truncation, nodes)
    normalized = table @ (weights * vals)
    factors = _sqrt_factorials(truncation + 1)
    return HermiteExpansion(coeffs=normalized * factors, quadrature_order=quadrature_order)


def ou_semigroup(
    phi: Callable[[np.ndarray], np.ndarray],
    t: float,
    x,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
):
    """Ornstein-Uhlenbeck semigroup P_t phi(x) = E[phi(e^-t x + sqrt(1-e^-2t) Y)].

    P_0 is the identity, each H_q is an eigenfunction with eigenvalue e^{-qt},
    and the operator is a sup-norm contraction.
    """
    if t < 0.0:
        raise ParameterError(f"t must be >= 0, got {t}")
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0.0:
        out = np.asarray(phi(x), dtype=float)
        return float(out[0]) if scalar else out
    nodes, weights = gauss_hermite_nodes(quadrature_order)
    decay = math.exp(-t)
    spread = math.sqrt(1.0 - decay * decay)
    args = decay * x[:, None] + spread * nodes[None, :]
    vals = np.asarray(phi(args.ravel()), dtype=float).reshape(args.shape)
    if not np.all(np.isfinite(vals)):
        raise InputDomainError("phi returned a non-finite value at a quadrature node")
    out = vals @ weights
    return float(out[0]) if scalar else out


def vandermonde_weights(nodes, cond_threshold: float = 1e12) -> np.ndarray:
    """Solve for (b_0..b_m): sum_l b_l e^{-k t_l} = 0 for k < m, = 1 for k = m.

    The nodes are m+1 distinct nonnegative time points (the first is 0 by
    default in the constructions below).  Solvability is a Vandermonde
    determinant in the variables e^{-t_l}.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 2:
        raise ParameterError("need at least two nodes (m >= 1)")
    if np.any(nodes < 0.0):
        raise ParameterError("nodes must be nonnegative")
    if np.any(np.diff(nodes) <= 0.0):
        raise ParameterError("nodes must be strictly increasing")
    m = len(nodes) - 1
    k = np.arange(m + 1)
    matrix = np.exp(-np.outer(k, nodes))
    cond = np.linalg.cond(matrix)
    if cond > cond_threshold:
        raise ConditioningError(
            f"Vandermonde system condition number {cond:.3e} exceeds "
            f"{cond_threshold:.1e}; use fewer or better-spread nodes",
            condition_number=cond,
        )
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    b = np.linalg.solve(matrix, rhs)
    residual = np.max(np.abs(matrix @ b - rhs))
    if residual > 1e-10:
        raise ConditioningError(
            f"Vandermonde solve residual {residual:.3e} exceeds 1e-10",
            condition_number=cond,
        )
    return b


@dataclass
class RankedFunction:
    """A transform with verified Hermite rank and optional sup-norm budget."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    expansion: HermiteExpansion
    declared_rank: int
    sup_norm_bound: float | None = None

    def __call__(self, x):
        return self.evaluator(np.asarray(x, dtype=float))

    @property
    def leading_coefficient(self) -> float:
        """V_m at the declared rank m."""
        return self.expansion[self.declared_rank]


def pure_hermite(m: int) -> RankedFunction:
    """Phi = H_m itself: rank m, V_m = m!, unbounded for m >= 1."""
    expansion = expand(lambda x: hermite_eval(m, x))
    return RankedFunction(
        evaluator=lambda x: hermite_eval(m, x),
        expansion=expansion,
        declared_rank=m,
        sup_norm_bound=None,
    )


def zero_transform(rank: int = 1) -> RankedFunction:
    """Phi identically zero: the coefficient sampler it induces is the
    deterministic constant a*; the declared rank only labels the pipeline."""
    expansion = expand(lambda x: np.zeros_like(x))
    return RankedFunction(
        evaluator=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        expansion=expansion,
        declared_rank=rank,
        sup_norm_bound=0.0,
    )


def logistic(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def shifted_logistic(x):
    """Default psi for the OU construction.

    The unshifted logistic has sigma(x) - 1/2 odd, so every even Hermite
    coefficient vanishes exactly; the shift keeps all orders populated.
    """
    return logistic(np.asarray(x, dtype=float) - 0.5)


def _verify_rank(expansion: HermiteExpansion, m: int, context: str) -> None:
    scale = max(1.0, math.sqrt(expansion.series_norm_sq()))
    low = np.abs(expansion.normalized[:m])
    if len(low) and np.max(low) > RANK_THRESHOLD * scale:
        raise ConstructionError(
            f"{context}: coefficient below the target rank is non-zero "
            f"(max |V_k|/sqrt(k!) = {np.max(low):.2e} for k < {m})"
        )
    if abs(expansion.normalized[m]) <= 1e-6 * scale:
        raise ConstructionError(
            f"{context}: leading coefficient V_{m} = {expansion.coeffs[m]:.2e} "
            "is numerically zero; choose a different input function"
        )


def construct_rank_m(
    m: int,
    a_star: float,
    psi: Callable[[np.ndarray], np.ndarray] | None = None,
    nodes=None,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
    truncation: int = DEFAULT_TRUNCATION,
) -> RankedFunction:
    """Build Phi = sum_l b_l P_{t_l} psi with Hermite rank m and
    ||Phi||_inf <= 1/(2 a*).

    psi is rescaled into [0, 1/(2 a* sum|b_l|)]; the weights b solve the
    exponential moment system, which zeroes every Hermite coefficient below
    order m and normalizes the one at order m, so V_k(Phi) =
    (sum_l b_l e^{-k t_l}) V_k(psi) for all k.
    """
    if m < 1:
        raise ParameterError(f"rank m must be >= 1, got {m}")
    if a_star <= 0.0:
        raise ParameterError(f"a_star must be positive, got {a_star}")
    if nodes is None:
        nodes = np.arange(m + 1, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) != m + 1:
        raise ParameterError(f"need m+1 = {m + 1} nodes, got {len(nodes)}")
    b = vandermonde_weights(nodes)
    cap = 1.0 / (2.0 * a_star * np.sum(np.abs(b)))

    if psi is None:
        psi = shifted_logistic
    probe = np.linspace(-20.0, 20.0, 4001)
    pv = np.asarray(psi(probe), dtype=float)
    if not np.all(np.isfinite(pv)):
        raise InputDomainError("psi returned a non-finite value")
    lo, hi = float(np.min(pv)), float(np.max(pv))
    if hi - lo < 1e-12:
        raise ConstructionError("psi is numerically constant; it has no rank-m part")

    def psi_scaled(x):
        vals = (np.asarray(psi(x), dtype=float) - lo) / (hi - lo)
        return cap * np.clip(vals, 0.0, 1.0)

    psi_exp = expand(psi_scaled, truncation, quadrature_order)
    scale = max(1.0, math.sqrt(psi_exp.series_norm_sq()))
    if abs(psi_exp[m]) <= 1e-10 * scale:
        raise ConstructionError(
            f"the order-{m} Hermite coefficient of psi vanishes; "
            "choose a psi with a non-zero rank-m component"
        )

    nodes_tuple = tuple(float(t) for t in nodes)
    b_tuple = tuple(float(x) for x in b)

    def phi_exact(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for weight, t in zip(b_tuple, nodes_tuple):
            if t == 0.0:
                out = out + weight * psi_scaled(x)
            else:
                out = out + weight * ou_semigroup(psi_scaled, t, x, quadrature_order)
        return out

    expansion = expand(phi_exact, truncation, quadrature_order)
    _verify_rank(expansion, m, "construct_rank_m")
    return RankedFunction(
        evaluator=phi_exact,
        expansion=expansion,
        declared_rank=m,
        sup_norm_bound=1.0 / (2.0 * a_star),
    )


def construct_rank_2_bounded(
    a_star: float,
    h1: Callable[[np.ndarray], np.ndarray] = np.sin,
    h2: Callable[[np.ndarray], np.ndarray] = np.cos,
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER,
    truncation: int = DEFAULT_TRUNCATION,
) -> RankedFunction:
    """Rank-2 bounded transform from two bounded functions.

    With first-order coefficients a_1, b_1 of h1, h2, the combination
    Psi = b_1 (h1 - E h1) - a_1 (h2 - E h2) is centred with a vanishing
    first coefficient, hence rank >= 2; Phi = Psi / (2 a* ||Psi||_inf).
    """
    if a_star <= 0.0:
        raise ParameterError(f"a_star must be positive, got {a_star}")
    exp1 = expand(h1, truncation, quadrature_order)
    exp2 = expand(h2, truncation, quadrature_order)
    mu1, a1 = exp1[0], exp1[1]
    mu2, b1 = exp2[0], exp2[1]

    def psi(x):
        x = np.asarray(x, dtype=float)
        return b1 * (np.asarray(h1(x), dtype=float) - mu1) - a1 * (
            np.asarray(h2(x), dtype=float) - mu2
        )

    grid = np.linspace(-40.0, 40.0, 400001)
    sup = float(np.max(np.abs(psi(grid))))
    if sup < 1e-12:
        raise ConstructionError("degenerate pair: Psi is numerically zero")
    scale_factor = 1.0 / (2.0 * a_star * sup)

    def phi(x):
        return scale_factor * psi(x)

    expansion = expand(phi, truncation, quadrature_order)
    _verify_rank(expansion, 2, "construct_rank_2_bounded")
    return RankedFunction(
        evaluator=phi,
        expansion=expansion,
        declared_rank=2,
        sup_norm_bound=1.0 / (2.0 * a_star),
    )


@dataclass
class CoefficientSampler:
    """The random coefficient a(x) = (Phi(g(x)) + 1/a*)^(-1) and q = 1/a - 1/a*.

    Requires ||Phi||_inf < 1/a*, which keeps a positive and uniformly bounded:
    a in [1/(1/a* + ||Phi||), 1/(1/a* - ||Phi||)].
    """

    phi: RankedFunction
    a_star: float
    _spline: CubicSpline | None = field(init=False, default=None, repr=False)
    _sup: float = field(init=False, default=0.0, repr=False)

    def __post_init__(self):
        if self.a_star <= 0.0:
            raise ParameterError(f"a_star must be positive, got {self.a_star}")
        sup = self.phi.sup_norm_bound
        if sup is None:
            grid = np.linspace(-12.0, 12.0, 20001)
            sup = float(np.max(np.abs(self.phi(grid))))
        self._sup = sup
        if sup >= 1.0 / self.a_star:
            raise ConstructionError(
                f"||Phi||_inf = {sup:.4g} must be strictly below 1/a* = {1.0 / self.a_star:.4g}"
            )
        # cache a spline so path-length evaluations stay cheap even when the
        # evaluator itself is quadrature-backed; values are clipped to the
        # sup-norm budget so the coefficient bounds hold exactly
        knots = np.linspace(-14.0, 14.0, 8001)
        vals = np.clip(np.asarray(self.phi(knots), dtype=float), -sup, sup)
        self._spline = CubicSpline(knots, vals, bc_type="clamped")

    def q_of(self, g_values):
        """q(x) = Phi(g(x)) = 1/a(x) - 1/a*."""
        g = np.asarray(g_values, dtype=float)
        out = self._spline(np.clip(g, -14.0, 14.0))
        return np.clip(out, -self._sup, self._sup)

    def a_of(self, g_values):
        """The coefficient field a(x) evaluated on Gaussian samples."""
        return 1.0 / (self.q_of(g_values) + 1.0 / self.a_star)

    @property
    def lower_bound(self) -> float:
        return 1.0 / (1.0 / self.a_star + self._sup)

    @property
    def upper_bound(self) -> float:
        return 1.0 / (1.0 / self.a_star - self._sup)


def coefficient_sampler(phi: RankedFunction, a_star: float) -> CoefficientSampler:
    """Wrap a ranked transform as the coefficient sampler a = (Phi(g) + 1/a*)^-1."""
    return CoefficientSampler(phi=phi, a_star=a_star)
