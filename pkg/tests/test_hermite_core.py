import math

import numpy as np
import pytest
from scipy import integrate

from oscillab.errors import (
    ConditioningError,
    ConstructionError,
    InputDomainError,
    ParameterError,
)
from oscillab.hermite_core import (
    coefficient_sampler,
    construct_rank_2_bounded,
    construct_rank_m,
    expand,
    gauss_hermite_nodes,
    hermite_eval,
    logistic,
    ou_semigroup,
    pure_hermite,
    shifted_logistic,
    vandermonde_weights,
    zero_transform,
)


def gaussian_integral(f, lo=-12.0, hi=12.0):
    # independent quadrature against the standard Gaussian measure
    val, _ = integrate.quad(
        lambda x: f(x) * math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi),
        lo,
        hi,
        limit=400,
    )
    return val


class TestHermitePolynomials:
    def test_base_cases(self):
        x = np.array([-1.3, 0.0, 2.4])
        assert np.array_equal(hermite_eval(0, x), np.ones(3))
        assert np.array_equal(hermite_eval(1, x), x)

    def test_small_order_values(self):
        assert hermite_eval(2, 3.0) == 8.0  # x^2 - 1
        assert hermite_eval(3, 2.0) == 2.0  # x^3 - 3x

    def test_orthogonality(self):
        # int H_p H_q dnu = q! delta_pq; compared on the sqrt(p! q!) scale,
        # where float64 quadrature roundoff is meaningful
        nodes, weights = gauss_hermite_nodes(40)
        for p in range(11):
            for q in range(11):
                val = np.sum(weights * hermite_eval(p, nodes) * hermite_eval(q, nodes))
                expected = math.factorial(q) if p == q else 0.0
                scale = math.sqrt(math.factorial(p) * math.factorial(q))
                assert abs(val - expected) / scale < 1e-10

    def test_negative_order(self):
        with pytest.raises(ParameterError):
            hermite_eval(-1, 0.0)


class TestExpand:
    def test_pure_hermite_input(self):
        e = expand(lambda x: hermite_eval(3, x))
        assert e[3] == pytest.approx(6.0, abs=1e-10)
        others = np.delete(e.normalized, 3)
        assert np.max(np.abs(others)) < 1e-12
        assert e.rank() == 3

    def test_square(self):
        e = expand(lambda x: x**2)
        assert e[0] == pytest.approx(1.0, abs=1e-12)
        assert abs(e[1]) < 1e-12
        assert e[2] == pytest.approx(2.0, abs=1e-12)
        assert e.rank() == 0

    def test_centred_indicator(self):
        e = expand(lambda x: (x > 0).astype(float) - 0.5)
        assert abs(e[0]) < 1e-14
        # oracle: int_0^inf x nu(dx) = 1/sqrt(2 pi); Gauss-Hermite converges
        # slowly on the jump, hence the loose tolerance
        assert e[1] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=2e-3)
        assert abs(e[2]) < 1e-13
        assert e.rank() == 1

    def test_rank_invariant_under_scaling(self):
        for scale in (1e-3, 1.0, 1e3):
            e = expand(lambda x, s=scale: s * (hermite_eval(2, x) + 0.1 * hermite_eval(5, x)))
            assert e.rank() == 2

    def test_rejects_nonfinite(self):
        with pytest.raises(InputDomainError):
            expand(lambda x: np.where(np.abs(x) > 5, np.nan, x))

    def test_quadrature_order_guard(self):
        with pytest.raises(ParameterError):
            expand(lambda x: x, truncation=30, quadrature_order=40)

    def test_parseval(self):
        phi = construct_rank_2_bounded(1.0)
        direct = gaussian_integral(lambda x: float(phi(np.array([x]))[0]) ** 2)
        assert abs(phi.expansion.series_norm_sq() - direct) < 1e-6


class TestOUSemigroup:
    def test_identity_at_zero(self):
        x = np.array([-0.7, 0.1, 1.9])
        out = ou_semigroup(np.tanh, 0.0, x)
        assert np.array_equal(out, np.tanh(x))

    @pytest.mark.parametrize("q", [1, 2, 4, 6])
    def test_eigenfunctions(self, q):
        x = np.array([0.3, -1.1, 2.2])
        lhs = ou_semigroup(lambda y: hermite_eval(q, y), 0.7, x)
        rhs = math.exp(-0.7 * q) * hermite_eval(q, x)
        assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-8

    def test_contraction(self):
        x = np.linspace(-6.0, 6.0, 41)
        for t in (0.1, 1.0, 5.0):
            out = ou_semigroup(np.tanh, t, x)
            assert np.max(np.abs(out)) <= 1.0 + 1e-12

    def test_eigen_relation_through_expand(self):
        # expand(P_t phi)_q = e^(-qt) expand(phi)_q for q <= 8
        phi = lambda x: np.tanh(x) + 0.3 * np.cos(2.0 * x)
        t = 0.45
        base = expand(phi)
        smoothed = expand(lambda x: ou_semigroup(phi, t, x))
        q = np.arange(9)
        decay = np.exp(-q * t)
        assert np.max(np.abs(smoothed.coeffs[:9] - decay * base.coeffs[:9])) < 1e-8

    def test_negative_time_rejected(self):
        with pytest.raises(ParameterError):
            ou_semigroup(np.tanh, -0.1, 0.0)


class TestVandermonde:
    def test_m1_closed_form(self):
        b = vandermonde_weights([0.0, 1.0])
        b0 = 1.0 / (1.0 - math.exp(-1.0))
        assert b[0] == pytest.approx(b0, rel=1e-12)
        assert b[1] == pytest.approx(-b0, rel=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_residual(self, m):
        nodes = np.arange(m + 1, dtype=float)
        b = vandermonde_weights(nodes)
        k = np.arange(m + 1)
        matrix = np.exp(-np.outer(k, nodes))
        rhs = np.zeros(m + 1)
        rhs[m] = 1.0
        assert np.max(np.abs(matrix @ b - rhs)) < 1e-10

    def test_m2_explicit(self):
        b = vandermonde_weights([0.0, 1.0, 2.0])
        for k in range(2):
            assert abs(np.sum(b * np.exp(-k * np.array([0.0, 1.0, 2.0])))) < 1e-10
        assert np.sum(b * np.exp(-2.0 * np.array([0.0, 1.0, 2.0]))) == pytest.approx(1.0, abs=1e-10)

    def test_conditioning_error(self):
        nodes = [0.0, 1e-7, 2e-7, 3e-7, 4e-7, 5e-7, 6e-7]
        with pytest.raises(ConditioningError) as err:
            vandermonde_weights(nodes)
        assert err.value.condition_number > 1e12

    def test_node_validation(self):
        with pytest.raises(ParameterError):
            vandermonde_weights([0.0, 1.0, 1.0])
        with pytest.raises(ParameterError):
            vandermonde_weights([-1.0, 1.0])
        with pytest.raises(ParameterError):
            vandermonde_weights([0.5])


class TestConstructRankM:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_rank_and_sup_bound(self, m):
        a_star = 1.0
        phi = construct_rank_m(m, a_star)
        scale = max(1.0, math.sqrt(phi.expansion.series_norm_sq()))
        assert np.max(np.abs(phi.expansion.normalized[:m])) < 1e-8 * scale
        grid = np.linspace(-10.0, 10.0, 100001)
        assert np.max(np.abs(phi(grid))) <= 1.0 / (2.0 * a_star) + 1e-12

    def test_tail_identity(self):
        # V_k(Phi) = (sum_l b_l e^(-k t_l)) V_k(psi) for all k
        m = 2
        nodes = np.arange(m + 1, dtype=float)
        b = vandermonde_weights(nodes)
        cap = 1.0 / (2.0 * np.sum(np.abs(b)))
        psi_scaled = lambda x: cap * np.clip(shifted_logistic(x), 0.0, 1.0)
        psi_exp = expand(psi_scaled)
        phi = construct_rank_m(m, 1.0)
        k = np.arange(31)
        factor = np.array([np.sum(b * np.exp(-kk * nodes)) for kk in k])
        assert np.max(np.abs(factor * psi_exp.normalized - phi.expansion.normalized)) < 1e-8

    def test_leading_coefficient_consistency(self):
        # the system normalizes sum_l b_l e^(-m t_l) = 1, so V_m(Phi) = V_m(psi)
        m = 2
        nodes = np.arange(m + 1, dtype=float)
        b = vandermonde_weights(nodes)
        cap = 1.0 / (2.0 * np.sum(np.abs(b)))
        psi_exp = expand(lambda x: cap * np.clip(shifted_logistic(x), 0.0, 1.0))
        phi = construct_rank_m(m, 1.0)
        assert phi.expansion[m] == pytest.approx(psi_exp[m], rel=1e-8)

    def test_degenerate_psi_rejected(self):
        # the plain logistic has no even-order component
        with pytest.raises(ConstructionError):
            construct_rank_m(2, 1.0, psi=logistic)
        with pytest.raises(ConstructionError):
            construct_rank_m(1, 1.0, psi=lambda x: np.full_like(x, 0.3))

    def test_custom_nodes(self):
        phi = construct_rank_m(2, 1.0, nodes=[0.0, 0.5, 1.7])
        assert phi.declared_rank == 2

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            construct_rank_m(0, 1.0)
        with pytest.raises(ParameterError):
            construct_rank_m(1, -1.0)
        with pytest.raises(ParameterError):
            construct_rank_m(2, 1.0, nodes=[0.0, 1.0])


class TestConstructRank2Bounded:
    def test_centred(self, phi_rank2):
        assert abs(phi_rank2.expansion[0]) < 1e-10
        assert abs(phi_rank2.expansion[1]) < 1e-10
        assert phi_rank2.declared_rank == 2

    def test_sin_cos_nondegenerate(self, phi_rank2):
        assert abs(phi_rank2.expansion[2]) > 1e-6

    def test_coefficient_bounds(self, phi_rank2):
        # a(x) = (Phi(g) + 1/a*)^(-1) in [2a*/3, 2a*]
        sampler = coefficient_sampler(phi_rank2, 1.0)
        g = np.random.default_rng(1).standard_normal(200000)
        a = sampler.a_of(g)
        assert np.all(a >= 2.0 / 3.0 - 1e-12)
        assert np.all(a <= 2.0 + 1e-12)

    def test_degenerate_pair(self):
        with pytest.raises(ConstructionError):
            construct_rank_2_bounded(1.0, h1=np.sin, h2=np.sin)


class TestCoefficientSampler:
    def test_zero_transform_constant(self):
        sampler = coefficient_sampler(zero_transform(1), 2.0)
        g = np.linspace(-4, 4, 101)
        assert np.allclose(sampler.a_of(g), 2.0)
        assert np.allclose(sampler.q_of(g), 0.0)

    def test_harmonic_mean_identity(self, phi_rank2):
        # V_0 = 0 forces E[1/a] = 1/a*; Monte Carlo check within 3 SE
        sampler = coefficient_sampler(phi_rank2, 1.0)
        g = np.random.default_rng(7).standard_normal(1_000_000)
        inv_a = 1.0 / sampler.a_of(g)
        se = np.std(inv_a) / math.sqrt(len(inv_a))
        assert abs(np.mean(inv_a) - 1.0) < 3.0 * se

    def test_unbounded_phi_rejected(self):
        with pytest.raises(ConstructionError):
            coefficient_sampler(pure_hermite(1), 1.0)

    def test_bound_too_large_rejected(self, phi_rank2):
        # ||Phi||_inf = 1/(2 a*) for the rank-2 construction; demanding the
        # sampler run at 3 a* makes 1/(3 a*) < ||Phi||_inf and must fail
        phi = construct_rank_2_bounded(0.25)  # sup bound = 2
        with pytest.raises(ConstructionError):
            coefficient_sampler(phi, 1.0)

    def test_spline_matches_evaluator(self, phi_rank1):
        sampler = coefficient_sampler(phi_rank1, 1.0)
        g = np.linspace(-8, 8, 4001)
        exact = phi_rank1(g)
        assert np.max(np.abs(sampler.q_of(g) - exact)) < 1e-8
