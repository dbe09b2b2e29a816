"""Monte Carlo verification of the two limit theorems.

Oscillatory mode drives ensembles of the normalized integrals

    M_eps = (1/(eps d(1/eps))) int_0^1 Phi[g(x/eps)] h(x) dx

toward their law limit (V_m/m!) int_0^1 h dZ; corrector mode does the same
for the rescaled corrector of the random two-point boundary problem against
(V_m/m!) int F(x, y) dZ(y).  Covariance mode validates the chaos formula and
power-law decay of R_q, and the taqqu modes check the variance normalization
and finite-dimensional closeness of (1/d(T)) int_0^(Tx) Phi(g) to Z.

Every reported number is reproducible from (config, seed_base): replica r of
level k draws from the seed stream (seed_base, k, r).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .distances import (
    energy_permutation_pvalue,
    ks_against_normal,
    moment_summary,
    trend_ok,
)
from .errors import CoverageError, ParameterError
from .hermite_core import RankedFunction, coefficient_sampler, hermite_eval
from .hermite_process import (
    HermiteProcessConfig,
    IntegrandFn,
    ProcessPath,
    continuous_integrand,
    lambda_norm,
    simulate_Z_ensemble,
    wiener_integral,
)
from .homogenize1d import (
    ProblemSpec,
    decompose,
    limit_kernel,
    sample_fast_path,
    solve_random,
)
from .lrd_gauss import (
    GaussianPath,
    KernelSpec,
    corrector_scale,
    d_scale,
    simulate_path,
    theoretical_covariance,
)

__all__ = [
    "ExperimentConfig",
    "ConvergenceReport",
    "oscillatory_integral",
    "limit_sample",
    "covariance_decay_report",
    "taqqu_variance_report",
    "taqqu_variance_oracle",
    "finite_eps_variance",
    "run_convergence",
]

DISTRIBUTIONAL_MODES = ("oscillatory", "corrector", "taqqu_fdd")
MODES = DISTRIBUTIONAL_MODES + ("covariance", "taqqu")


def worker_count() -> int:
    """Replica-level parallelism cap from OSCILLAB_THREADS (default serial)."""
    raw = os.environ.get("OSCILLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map_indexed(fn, count: int):
    """Evaluate fn(i) for i in range(count), optionally threaded; the result
    order is by index, so parallel execution cannot change any output."""
    threads = worker_count()
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: kernel, transform, mode, scale schedule, and sampling knobs."""

    kernel: KernelSpec
    phi: RankedFunction
    mode: str
    epsilons: tuple = (0.1, 0.05, 0.02)
    h: IntegrandFn | None = None
    replicas: int = 200
    seed_base: int = 0
    resolution: float = 0.05
    window: float | None = None
    truncation_tol: float = 0.2
    probes: tuple = (0.25, 0.5, 0.75, 1.0)
    lags: tuple = (1.0, 10.0, 100.0, 1e3, 1e4, 1e5)
    horizons: tuple = (1e3, 1e4)
    a_star: float = 1.0
    b: float = 1.0
    source: str = "const"
    permutations: int = 200
    z_grid: int = 128
    time_step: float = 0.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode in DISTRIBUTIONAL_MODES and self.replicas < 100:
            raise ParameterError(
                f"distributional mode {self.mode!r} needs replicas >= 100, "
                f"got {self.replicas}"
            )
        eps = tuple(float(e) for e in self.epsilons)
        if any(e <= 0 for e in eps):
            raise ParameterError("epsilons must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ParameterError("epsilons must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)


@dataclass
class ConvergenceReport:
    """Per-level ensemble statistics, distances to the limit, and pass flags."""

    mode: str
    levels: list = field(default_factory=list)
    limit: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "levels": self.levels,
            "limit": self.limit,
            "flags": self.flags,
            "thresholds": self.thresholds,
        }


def oscillatory_integral(
    path: GaussianPath,
    phi: RankedFunction,
    h: IntegrandFn,
    epsilon: float,
    kernel: KernelSpec | None = None,
) -> float:
    """One sample of M_eps = (1/(eps d(1/eps))) int_0^1 Phi[g(x/eps)] h(x) dx.

    The x-integral is a midpoint rule on y-cells aligned with the path grid.
    """
    kernel = kernel if kernel is not None else path.kernel
    cells = int(round(1.0 / (epsilon * path.delta)))
    if cells < 1 or len(path.values) < cells:
        raise CoverageError(
            f"path covers {len(path.values) * path.delta:.1f} fast units; "
            f"needs {1.0 / epsilon:.1f} to span [0, 1/eps]"
        )
    width = 1.0 / cells
    mids = (np.arange(cells) + 0.5) * width
    values = phi(path.values[:cells]) * h(mids)
    return float(width * np.sum(values) / corrector_scale(kernel, epsilon))


def limit_sample(phi: RankedFunction, h: IntegrandFn, z_path: ProcessPath) -> float:
    """One sample of the limit (V_m/m!) int h dZ."""
    m = phi.declared_rank
    factor = phi.expansion[m] / math.factorial(m)
    return factor * wiener_integral(z_path, h)


def _chaos_series(phi: RankedFunction, r_g, start: int | None = None):
    """R_q(x) = sum_(q>=m) (V_q^2/q!) R_g(x)^q from the expansion of Phi."""
    weights = phi.expansion.normalized**2
    q = np.arange(len(weights))
    start = phi.declared_rank if start is None else start
    r_g = np.asarray(r_g, dtype=float)
    powers = r_g[..., None] ** q[start:]
    return powers @ weights[start:]


@dataclass
class _CovarianceTable:
    lags: np.ndarray
    interp: PchipInterpolator

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.interp(np.log1p(np.clip(x, 0.0, self.lags[-1])))


_COV_TABLES: dict = {}


def _covariance_table(kernel: KernelSpec, x_max: float, points_per_decade: int = 16):
    """Cached monotone interpolant of R_g on [0, x_max] (log1p abscissa).

    The table grows to the largest range requested for a kernel and is then
    reused for every smaller range.
    """
    hit = _COV_TABLES.get(kernel)
    if hit is not None and hit.lags[-1] >= x_max:
        return hit
    hi = 10.0 ** float(np.ceil(np.log10(max(x_max, 10.0))))
    decades = np.log10(hi) + 3.0
    lags = np.concatenate(
        [[0.0], np.geomspace(1e-3, hi, int(decades * points_per_decade) + 1)]
    )
    vals = np.array([theoretical_covariance(kernel, x) for x in lags])
    table = _CovarianceTable(lags=lags, interp=PchipInterpolator(np.log1p(lags), vals))
    _COV_TABLES[kernel] = table
    return table


def covariance_decay_report(
    phi: RankedFunction,
    kernel: KernelSpec,
    lags,
    replicas: int = 0,
    seed_base: int = 0,
    path_length: float = 2e3,
    time_step: float = 0.5,
    truncation_tol: float = 0.2,
) -> list[dict]:
    """Covariance of q = Phi(g) at each lag, two ways, with decay diagnostics.

    Method (i) is the chaos formula sum (V_q^2/q!) R_g(x)^q; method (ii), when
    replicas > 0, estimates the same quantity from simulated paths.  Each row
    reports the ratio to the asymptote (V_m^2/m!) L(x)^(2m) x^(2H-2) and the
    envelope constant |R_q| / (L^(2m) x^(-2(1-H))).
    """
    lags = np.asarray(sorted(float(x) for x in lags))
    if np.any(lags <= 0.0):
        raise ParameterError("lags must be positive")
    m = phi.declared_rank
    h_exp = 1.0 + m * (kernel.h0 - 1.0)
    lead = phi.expansion.normalized[m] ** 2
    r_g = np.array([theoretical_covariance(kernel, x) for x in lags])
    r_chaos = _chaos_series(phi, r_g)

    mc_mean = np.full(len(lags), np.nan)
    mc_se = np.full(len(lags), np.nan)
    if replicas > 0:
        n = int(round(path_length / time_step))
        window = math.ceil(16.0 * path_length / time_step) * time_step

        def one(r):
            path = simulate_path(
                kernel,
                n=n,
                delta=time_step,
                window=window,
                seed=(seed_base, 0, r),
                truncation_tol=truncation_tol,
            )
            q_vals = phi(path.values)
            out = np.empty(len(lags))
            for i, lag in enumerate(lags):
                k = int(round(lag / time_step))
                if k >= len(q_vals):
                    out[i] = np.nan
                else:
                    out[i] = np.mean(q_vals[: len(q_vals) - k] * q_vals[k:])
            return out

        estimates = np.array(_map_indexed(one, replicas))
        mc_mean = np.nanmean(estimates, axis=0)
        mc_se = np.nanstd(estimates, axis=0, ddof=1) / math.sqrt(replicas)

    rows = []
    for i, x in enumerate(lags):
        l_val = float(kernel.slowly_varying(x))
        envelope = l_val ** (2 * m) * x ** (-2.0 * (1.0 - h_exp))
        rows.append(
            {
                "lag": float(x),
                "r_g": float(r_g[i]),
                "r_q_chaos": float(r_chaos[i]),
                "r_q_mc": float(mc_mean[i]),
                "r_q_mc_se": float(mc_se[i]),
                "asymptote_ratio": float(r_chaos[i] / (lead * envelope)),
                "envelope_constant": float(abs(r_chaos[i]) / envelope),
            }
        )
    return rows


def taqqu_variance_oracle(kernel: KernelSpec, m: int, horizon: float) -> float:
    """Var[(1/d(T)) int_0^T H_m(g)] = (2 m!/d(T)^2) int_0^T (T-x) R_g(x)^m dx."""
    table = _covariance_table(kernel, horizon)
    fac = math.factorial(m)

    def integrand(x):
        return (horizon - x) * table(x) ** m

    inner = integrate.quad(integrand, 0.0, 1.0, limit=200)[0]
    log_part = integrate.quad(
        lambda w: integrand(math.exp(w)) * math.exp(w),
        0.0,
        math.log(horizon),
        limit=400,
    )[0]
    return 2.0 * fac * (inner + log_part) / d_scale(kernel, horizon) ** 2


def taqqu_variance_report(
    kernel: KernelSpec,
    m: int,
    horizons,
    replicas: int = 300,
    seed_base: int = 0,
    time_step: float = 0.5,
    truncation_tol: float = 0.2,
) -> list[dict]:
    """MC variance of (1/d(T)) int_0^T H_m(g(y)) dy per horizon, with the
    quadrature oracle for comparison.  The trend target is 1."""
    horizons = sorted(float(t) for t in horizons)
    rows = []
    for k, horizon in enumerate(horizons):
        n = int(round(horizon / time_step))
        window = math.ceil(16.0 * horizon / time_step) * time_step
        norm = d_scale(kernel, horizon)

        def one(r):
            path = simulate_path(
                kernel,
                n=n,
                delta=time_step,
                window=window,
                seed=(seed_base, k, r),
                truncation_tol=truncation_tol,
            )
            return time_step * np.sum(hermite_eval(m, path.values[:-1])) / norm

        samples = np.asarray(_map_indexed(one, replicas))
        summary = moment_summary(samples)
        rows.append(
            {
                "horizon": horizon,
                "variance_mc": summary["variance"],
                "se_variance": summary["se_variance"],
                "variance_oracle": taqqu_variance_oracle(kernel, m, horizon),
                "mean_mc": summary["mean"],
                "replicas": replicas,
            }
        )
    return rows


def finite_eps_variance(
    kernel: KernelSpec,
    phi: RankedFunction,
    h: IntegrandFn,
    epsilon: float,
    cells: int = 400,
) -> float:
    """Var[M_eps] = X(eps)^-2 int int h(x) h(y) R_q((x-y)/eps) dx dy by a
    midpoint double sum over the unit square."""
    table = _covariance_table(kernel, 1.0 / epsilon)
    mids = (np.arange(cells) + 0.5) / cells
    h_vals = h(mids)
    lag = np.abs(mids[:, None] - mids[None, :]) / epsilon
    r_q = _chaos_series(phi, table(lag))
    # the diagonal carries R_q(0) = Var Phi(g) exactly
    np.fill_diagonal(r_q, _chaos_series(phi, np.array([1.0]))[0])
    total = h_vals @ r_q @ h_vals / cells**2
    return float(total / corrector_scale(kernel, epsilon) ** 2)


def _z_config(config: ExperimentConfig, t_max: float = 1.0) -> HermiteProcessConfig:
    # the Z streams key on (seed, p) pairs while replica paths key on
    # (seed_base, k, r) triples, so the two stay independent
    return HermiteProcessConfig(
        m=config.phi.declared_rank,
        h0=config.kernel.h0,
        t_max=t_max,
        n_grid=config.z_grid,
        seed=config.seed_base,
    )


def _limit_ensemble_scalar(config: ExperimentConfig) -> np.ndarray:
    """Replicas of (V_m/m!) int h dZ."""
    z_cfg = _z_config(config, t_max=max(1.0, config.h.support[1]))
    paths = simulate_Z_ensemble(z_cfg, config.replicas)
    m = config.phi.declared_rank
    factor = config.phi.expansion[m] / math.factorial(m)
    times = z_cfg.times
    out = np.empty(config.replicas)
    for r in range(config.replicas):
        path = ProcessPath(times=times, values=paths[:, r], config=z_cfg, seed=r)
        out[r] = factor * wiener_integral(path, config.h)
    return out


def _run_oscillatory(config: ExperimentConfig) -> ConvergenceReport:
    h = config.h
    m = config.phi.declared_rank
    factor = config.phi.expansion[m] / math.factorial(m)
    limit_var = factor**2 * lambda_norm(h, config.kernel.h)
    limit_samples = _limit_ensemble_scalar(config)
    report = ConvergenceReport(mode="oscillatory")
    report.limit = {
        "variance_exact": float(limit_var),
        "summary": moment_summary(limit_samples),
        "gaussian": m == 1,
    }
    report.thresholds = {"ks_p": 0.01, "variance_ratio_band": 0.15, "inversions": 1}

    distances = []
    for k, eps in enumerate(config.epsilons):
        cells = int(math.ceil(1.0 / (eps * config.resolution)))

        def one(r):
            path = sample_fast_path(
                config.kernel,
                eps,
                cells,
                seed=(config.seed_base, k, r),
                window=config.window,
                truncation_tol=config.truncation_tol,
            )
            return oscillatory_integral(path, config.phi, h, eps)

        samples = np.asarray(_map_indexed(one, config.replicas))
        level = {"epsilon": eps, "summary": moment_summary(samples)}
        level["variance_oracle"] = finite_eps_variance(
            config.kernel, config.phi, h, eps
        )
        level["variance_ratio_to_limit"] = level["summary"]["variance"] / limit_var
        dist, p_energy = energy_permutation_pvalue(
            samples,
            limit_samples,
            n_permutations=config.permutations,
            seed=config.seed_base + k,
        )
        level["energy_distance"] = dist
        level["energy_p"] = p_energy
        if m == 1:
            stat, p_ks = ks_against_normal(samples, sigma=math.sqrt(limit_var))
            level["ks_stat"], level["ks_p"] = stat, p_ks
        distances.append(dist)
        report.levels.append(level)

    report.flags["energy_trend"] = trend_ok(distances, allowed_inversions=1)
    last = report.levels[-1]
    report.flags["variance_within_band"] = (
        abs(last["variance_ratio_to_limit"] - 1.0) <= 0.15
    )
    if m == 1:
        report.flags["ks_pass"] = last["ks_p"] > 0.01
    return report


def _source_fn(name: str):
    if name == "const":
        return lambda y: np.ones_like(np.asarray(y, dtype=float))
    if name == "linear":
        return lambda y: 2.0 * np.asarray(y, dtype=float)
    if name == "sin":
        return lambda y: np.sin(2.0 * np.pi * np.asarray(y, dtype=float))
    raise ParameterError(f"unknown source {name!r}; use const | linear | sin")


def _run_corrector(config: ExperimentConfig) -> ConvergenceReport:
    sampler = coefficient_sampler(config.phi, config.a_star)
    m = config.phi.declared_rank
    factor = config.phi.expansion[m] / math.factorial(m)
    probes = np.asarray(config.probes)

    z_cfg = _z_config(config)
    z_paths = simulate_Z_ensemble(z_cfg, config.replicas)
    proto = ProblemSpec(
        f=_source_fn(config.source),
        b=config.b,
        epsilon=config.epsilons[0],
        coeff=sampler,
        quad_grid=4096,
    )
    limit_vectors = np.empty((config.replicas, len(probes)))
    for r in range(config.replicas):
        zp = ProcessPath(times=z_cfg.times, values=z_paths[:, r], config=z_cfg, seed=r)
        for j, x_p in enumerate(probes):
            integrand = continuous_integrand(
                lambda y, _x=float(x_p): limit_kernel(_x, y, proto), 0.0, 1.0
            )
            limit_vectors[r, j] = factor * wiener_integral(zp, integrand)

    report = ConvergenceReport(mode="corrector")
    report.limit = {
        "probes": [float(p) for p in probes],
        "variance_per_probe": list(np.var(limit_vectors, axis=0, ddof=1)),
    }
    report.thresholds = {"inversions": 1, "energy_p": 0.01}

    distances = []
    for k, eps in enumerate(config.epsilons):
        cells = int(math.ceil(1.0 / (eps * config.resolution)))
        spec = ProblemSpec(
            f=_source_fn(config.source),
            b=config.b,
            epsilon=eps,
            coeff=sampler,
            quad_grid=cells,
        )
        x_eps = corrector_scale(config.kernel, eps)
        idx = np.rint(probes * cells).astype(int)

        def one(r):
            path = sample_fast_path(
                config.kernel,
                eps,
                cells,
                seed=(config.seed_base, k, r),
                window=config.window,
                truncation_tol=config.truncation_tol,
            )
            pair = solve_random(spec, path)
            dec = decompose(spec, path, pair)
            corrector = (pair.u_eps - pair.u_bar)[idx] / x_eps
            return np.concatenate([corrector, [abs(dec.rho_eps)]])

        raw = np.asarray(_map_indexed(one, config.replicas))
        vectors, rho_abs = raw[:, :-1], raw[:, -1]
        dist, p_energy = energy_permutation_pvalue(
            vectors,
            limit_vectors,
            n_permutations=config.permutations,
            seed=config.seed_base + k,
        )
        distances.append(dist)
        report.levels.append(
            {
                "epsilon": eps,
                "energy_distance": dist,
                "energy_p": p_energy,
                "variance_per_probe": list(np.var(vectors, axis=0, ddof=1)),
                "sup_corrector_median": float(
                    np.median(np.max(np.abs(vectors), axis=1) * x_eps)
                ),
                "rho_mean_abs": float(np.mean(rho_abs)),
                "rho_ratio": float(np.mean(rho_abs) / x_eps**2),
            }
        )
    report.flags["energy_trend"] = trend_ok(distances, allowed_inversions=1)
    ratios = [lvl["rho_ratio"] for lvl in report.levels]
    report.flags["rho_bounded"] = max(ratios) <= 4.0 * max(min(ratios), 1e-300)
    return report


def _run_covariance(config: ExperimentConfig) -> ConvergenceReport:
    rows = covariance_decay_report(
        config.phi,
        config.kernel,
        config.lags,
        replicas=config.replicas,
        seed_base=config.seed_base,
        time_step=config.time_step,
        truncation_tol=config.truncation_tol,
    )
    report = ConvergenceReport(mode="covariance")
    report.levels = rows
    report.thresholds = {"asymptote_band": 0.10}
    tail = [r for r in rows if r["lag"] >= 1e3]
    if tail:
        report.flags["asymptote_within_band"] = all(
            abs(r["asymptote_ratio"] - 1.0) <= 0.10 for r in tail
        )
    report.flags["envelope_finite"] = all(
        np.isfinite(r["envelope_constant"]) for r in rows
    )
    return report


def _run_taqqu_variance(config: ExperimentConfig) -> ConvergenceReport:
    m = config.phi.declared_rank
    rows = taqqu_variance_report(
        config.kernel,
        m,
        config.horizons,
        replicas=config.replicas,
        seed_base=config.seed_base,
        time_step=config.time_step,
        truncation_tol=config.truncation_tol,
    )
    report = ConvergenceReport(mode="taqqu")
    report.levels = rows
    report.thresholds = {"oracle_band": 0.1, "se_multiple": 3.0}
    last = rows[-1]
    report.flags["oracle_near_one"] = abs(last["variance_oracle"] - 1.0) <= 0.1
    report.flags["mc_matches_oracle"] = all(
        abs(r["variance_mc"] - r["variance_oracle"]) <= 3.0 * r["se_variance"]
        for r in rows
    )
    return report


def _run_taqqu_fdd(config: ExperimentConfig) -> ConvergenceReport:
    """Energy distance between (1/d(T)) int_0^(Tx) Phi(g) at x in {0.5, 1}
    and the limit (V_m/m!) (Z(0.5), Z(1))."""
    m = config.phi.declared_rank
    factor = config.phi.expansion[m] / math.factorial(m)
    z_cfg = _z_config(config)
    z_paths = simulate_Z_ensemble(z_cfg, config.replicas)
    half = z_cfg.n_grid // 2
    limit_vectors = factor * np.column_stack([z_paths[half], z_paths[-1]])

    report = ConvergenceReport(mode="taqqu_fdd")
    report.limit = {"probes": [0.5, 1.0]}
    report.thresholds = {"inversions": 1}
    distances = []
    for k, horizon in enumerate(sorted(float(t) for t in config.horizons)):
        n = int(round(horizon / config.time_step))
        window = math.ceil(16.0 * horizon / config.time_step) * config.time_step
        norm = d_scale(config.kernel, horizon)

        def one(r):
            path = simulate_path(
                config.kernel,
                n=n,
                delta=config.time_step,
                window=window,
                seed=(config.seed_base, k, r),
                truncation_tol=config.truncation_tol,
            )
            q_vals = config.phi(path.values[:-1])
            cum = np.cumsum(q_vals) * config.time_step / norm
            return np.array([cum[n // 2 - 1], cum[-1]])

        vectors = np.asarray(_map_indexed(one, config.replicas))
        dist, p_val = energy_permutation_pvalue(
            vectors,
            limit_vectors,
            n_permutations=config.permutations,
            seed=config.seed_base + k,
        )
        distances.append(dist)
        report.levels.append(
            {
                "horizon": horizon,
                "energy_distance": dist,
                "energy_p": p_val,
            }
        )
    report.flags["energy_trend"] = trend_ok(distances, allowed_inversions=1)
    return report


def run_convergence(config: ExperimentConfig) -> ConvergenceReport:
    """Dispatch one experiment mode and assemble its report."""
    if config.mode == "oscillatory":
        if config.h is None:
            raise ParameterError("oscillatory mode needs an integrand h")
        return _run_oscillatory(config)
    if config.mode == "corrector":
        return _run_corrector(config)
    if config.mode == "covariance":
        return _run_covariance(config)
    if config.mode == "taqqu":
        return _run_taqqu_variance(config)
    return _run_taqqu_fdd(config)
