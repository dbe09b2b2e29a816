import math

import numpy as np
import pytest

from oscillab import KernelSpec
from oscillab.distances import energy_distance, moment_summary, trend_ok
from oscillab.errors import CoverageError, ParameterError
from oscillab.hermite_core import (
    coefficient_sampler,
    pure_hermite,
    zero_transform,
)
from oscillab.hermite_process import (
    HermiteProcessConfig,
    continuous_integrand,
    lambda_norm,
    simulate_Z,
    simulate_Z_ensemble,
    step_integrand,
)
from oscillab.homogenize1d import sample_fast_path
from oscillab.limit_lab import (
    ExperimentConfig,
    covariance_decay_report,
    finite_eps_variance,
    limit_sample,
    oscillatory_integral,
    run_convergence,
    taqqu_variance_oracle,
    taqqu_variance_report,
)
from oscillab.lrd_gauss import theoretical_covariance

ONE = continuous_integrand(lambda y: np.ones_like(y), 0.0, 1.0)
HALF = step_integrand([0.0, 0.5], [1.0])


class TestOscillatoryIntegral:
    def test_zero_transform_gives_zero(self, kernel_m1):
        path = sample_fast_path(kernel_m1, 0.1, 200, seed=0)
        value = oscillatory_integral(path, zero_transform(1), ONE, 0.1)
        assert value == 0.0

    def test_zero_integrand_gives_zero(self, kernel_m1, phi_h1):
        path = sample_fast_path(kernel_m1, 0.1, 200, seed=0)
        zero_h = continuous_integrand(lambda y: np.zeros_like(y), 0.0, 1.0)
        assert oscillatory_integral(path, phi_h1, zero_h, 0.1) == 0.0

    def test_coverage_guard(self, kernel_m1, phi_h1):
        path = sample_fast_path(kernel_m1, 0.1, 200, seed=0)
        with pytest.raises(CoverageError):
            oscillatory_integral(path, phi_h1, ONE, 0.05)


class TestLimitSample:
    def test_pure_hermite_factor_is_one(self, phi_h1):
        cfg = HermiteProcessConfig(m=1, h0=0.75, n_grid=64, seed=1)
        path = simulate_Z(cfg)
        f = step_integrand([0.0, 1.0], [1.0])
        # V_m/m! = 1 for Phi = H_m, and int 1_(0,1] dZ = Z(1)
        assert limit_sample(phi_h1, f, path) == pytest.approx(path.values[-1], abs=1e-12)

    def test_variance_matches_isometry(self, phi_rank2, kernel_m2):
        cfg = HermiteProcessConfig(m=2, h0=0.9, n_grid=64, seed=2)
        ens = simulate_Z_ensemble(cfg, 400)
        from oscillab.hermite_process import ProcessPath

        samples = np.array(
            [
                limit_sample(
                    phi_rank2,
                    ONE,
                    ProcessPath(times=cfg.times, values=ens[:, r], config=cfg, seed=r),
                )
                for r in range(400)
            ]
        )
        factor = phi_rank2.expansion[2] / 2.0
        target = factor**2 * lambda_norm(ONE, cfg.h)
        var = np.var(samples, ddof=1)
        se = math.sqrt(
            max(np.mean((samples - samples.mean()) ** 4) - var**2, 0.0) / len(samples)
        )
        assert abs(var - target) <= 3.0 * se


class TestCovarianceDecay:
    def test_single_chaos_formula(self, kernel_m1, phi_h1):
        # Phi = H_m makes R_q = m! R_g^m exactly in the chaos route
        rows = covariance_decay_report(phi_h1, kernel_m1, lags=[1.0, 10.0, 100.0])
        for row in rows:
            expected = theoretical_covariance(kernel_m1, row["lag"])
            assert row["r_q_chaos"] == pytest.approx(expected, rel=1e-8)

    def test_asymptote_ratio_near_one(self, kernel_m1, phi_h1):
        rows = covariance_decay_report(phi_h1, kernel_m1, lags=[1e3, 1e4])
        for row in rows:
            assert abs(row["asymptote_ratio"] - 1.0) <= 0.10

    def test_envelope_constant_finite(self, kernel_m1, phi_h1):
        rows = covariance_decay_report(
            phi_h1, kernel_m1, lags=np.geomspace(1.0, 1e5, 11)
        )
        consts = [row["envelope_constant"] for row in rows]
        assert all(np.isfinite(c) for c in consts)
        assert max(consts) < 10.0

    def test_mc_matches_chaos(self, kernel_m1, phi_rank1):
        rows = covariance_decay_report(
            phi_rank1, kernel_m1, lags=[1.0, 10.0], replicas=150, seed_base=3,
            path_length=500.0,
        )
        for row in rows:
            assert abs(row["r_q_mc"] - row["r_q_chaos"]) <= 3.0 * row["r_q_mc_se"]


class TestTaqquVariance:
    def test_oracle_tends_to_one(self, kernel_m1):
        v1 = taqqu_variance_oracle(kernel_m1, 1, 1e3)
        v2 = taqqu_variance_oracle(kernel_m1, 1, 1e4)
        assert abs(v2 - 1.0) <= abs(v1 - 1.0) + 0.02
        assert abs(v2 - 1.0) < 0.1

    def test_report_positive_and_consistent(self, kernel_m1):
        rows = taqqu_variance_report(
            kernel_m1, 1, horizons=[500.0, 2e3], replicas=120, seed_base=4
        )
        for row in rows:
            assert row["variance_mc"] > 0.0
            assert abs(row["variance_mc"] - row["variance_oracle"]) <= 3.0 * row["se_variance"]


class TestFiniteEpsVariance:
    def test_matches_monte_carlo(self, kernel_m1, phi_h1):
        eps = 0.03
        cells = int(math.ceil(1.0 / (eps * 0.05)))
        samples = []
        for r in range(200):
            path = sample_fast_path(kernel_m1, eps, cells, seed=(5, 0, r))
            samples.append(oscillatory_integral(path, phi_h1, ONE, eps))
        samples = np.asarray(samples)
        oracle = finite_eps_variance(kernel_m1, phi_h1, ONE, eps)
        summary = moment_summary(samples)
        assert abs(summary["variance"] - oracle) <= 3.0 * summary["se_variance"]

    def test_discontinuous_h_supported(self, kernel_m1, phi_h1):
        # h with a jump keeps the same machinery (finite jump set)
        eps = 0.05
        cells = int(math.ceil(1.0 / (eps * 0.05)))
        samples = []
        for r in range(200):
            path = sample_fast_path(kernel_m1, eps, cells, seed=(6, 0, r))
            samples.append(oscillatory_integral(path, phi_h1, HALF, eps))
        samples = np.asarray(samples)
        oracle = finite_eps_variance(kernel_m1, phi_h1, HALF, eps)
        summary = moment_summary(samples)
        assert abs(summary["variance"] - oracle) <= 3.0 * summary["se_variance"]


class TestRunConvergence:
    def test_oscillatory_report_structure(self, kernel_m1, phi_h1):
        cfg = ExperimentConfig(
            kernel=kernel_m1, phi=phi_h1, mode="oscillatory",
            epsilons=(0.1, 0.05), h=ONE, replicas=100, seed_base=7,
            permutations=100,
        )
        report = run_convergence(cfg)
        assert report.mode == "oscillatory"
        assert len(report.levels) == 2
        for level in report.levels:
            assert {"epsilon", "summary", "variance_oracle", "energy_distance"} <= set(level)
        assert report.limit["gaussian"] is True
        assert "energy_trend" in report.flags

    def test_corrector_deterministic_coefficient_degenerate(self, kernel_m1):
        cfg = ExperimentConfig(
            kernel=kernel_m1, phi=zero_transform(1), mode="corrector",
            epsilons=(0.1,), replicas=100, seed_base=8, permutations=50,
        )
        report = run_convergence(cfg)
        level = report.levels[0]
        assert level["energy_distance"] == pytest.approx(0.0, abs=1e-12)
        assert max(report.limit["variance_per_probe"]) == pytest.approx(0.0, abs=1e-20)

    def test_taqqu_fdd_distance_below_threshold(self, kernel_m1, phi_h1):
        cfg = ExperimentConfig(
            kernel=kernel_m1, phi=phi_h1, mode="taqqu_fdd",
            horizons=(200.0, 2e3), replicas=150, seed_base=9, permutations=50,
        )
        report = run_convergence(cfg)
        dists = [lvl["energy_distance"] for lvl in report.levels]
        assert dists[-1] < 0.25
        assert trend_ok(dists, allowed_inversions=1)

    def test_mode_validation(self, kernel_m1, phi_h1):
        with pytest.raises(ParameterError):
            ExperimentConfig(kernel=kernel_m1, phi=phi_h1, mode="nope")
        with pytest.raises(ParameterError, match="replicas"):
            ExperimentConfig(
                kernel=kernel_m1, phi=phi_h1, mode="oscillatory", replicas=50
            )
        with pytest.raises(ParameterError, match="decreasing"):
            ExperimentConfig(
                kernel=kernel_m1, phi=phi_h1, mode="oscillatory",
                epsilons=(0.05, 0.1), replicas=100,
            )


class TestDistances:
    def test_energy_distance_zero_for_identical(self):
        x = np.random.default_rng(0).standard_normal(200)
        assert energy_distance(x, x) == pytest.approx(0.0, abs=1e-12)

    def test_energy_distance_detects_shift(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(300)
        y = rng.standard_normal(300) + 2.0
        z = rng.standard_normal(300)
        assert energy_distance(x, y) > 10.0 * abs(energy_distance(x, z))

    def test_trend(self):
        assert trend_ok([3.0, 2.0, 1.0])
        assert trend_ok([3.0, 3.5, 1.0], allowed_inversions=1)
        assert not trend_ok([1.0, 2.0, 3.0], allowed_inversions=1)

    def test_moment_summary_fields(self):
        s = moment_summary(np.random.default_rng(2).standard_normal(5000))
        assert abs(s["mean"]) < 4 * s["se_mean"]
        assert abs(s["variance"] - 1.0) < 4 * s["se_variance"]
        assert abs(s["kurtosis"] - 3.0) < 4 * s["se_kurtosis"]
