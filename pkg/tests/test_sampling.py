import math

import numpy as np
import pytest

from pickands.empirical import pseudo_observations
from pickands.estimators import EstimatorSpec, estimate_surface
from pickands.sampling import (
    AsymmetricLogisticParams,
    RngStream,
    asy_logistic_pickands,
    asy_logistic_pickands_batch,
    sample_asy_logistic,
    sample_max_linear,
    sample_positive_stable,
    sample_symmetric_logistic_frechet,
)
from pickands.simplex import midpoint_rule
from pickands.spectral import comonotone_measure, eval_copula, independence_measure
from tests.conftest import random_spectral_measure

SYMMETRIC = dict(theta=0.0, phi=0.0, psi=1.0)


def ks_uniform_statistic(u):
    u = np.sort(u)
    n = len(u)
    grid = np.arange(1, n + 1) / n
    return max(np.abs(grid - u).max(), np.abs(u - (grid - 1.0 / n)).max())


def frechet_margins_ok(x, level_factor=1.63):
    # KS of exp(-1/X) against uniform at the 1% level
    n = x.shape[0]
    for j in range(x.shape[1]):
        if ks_uniform_statistic(np.exp(-1.0 / x[:, j])) > level_factor / math.sqrt(n):
            return False
    return True


class TestPickandsFormula:
    def test_independence_is_constant_one(self, rng):
        params = AsymmetricLogisticParams(alpha=1.0, **SYMMETRIC)
        for _ in range(5):
            w = rng.dirichlet(np.ones(3))
            assert asy_logistic_pickands(params, w) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_barycenter_value(self):
        params = AsymmetricLogisticParams(alpha=0.5, **SYMMETRIC)
        val = asy_logistic_pickands(params, [1 / 3, 1 / 3, 1 / 3])
        assert val == pytest.approx(3.0**-0.5, rel=1e-12)

    def test_vertices_always_one(self, rng):
        for _ in range(10):
            t, f = rng.uniform(0, 0.5, 2)
            psi = rng.uniform(0, 1 - t - f)
            params = AsymmetricLogisticParams(
                alpha=rng.uniform(0.2, 1.0), theta=t, phi=f, psi=psi
            )
            for j in range(3):
                e = np.zeros(3)
                e[j] = 1.0
                assert asy_logistic_pickands(params, e) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            AsymmetricLogisticParams(alpha=0.0)
        with pytest.raises(ValueError):
            AsymmetricLogisticParams(alpha=0.5, theta=0.6, phi=0.3, psi=0.2)


class TestPositiveStable:
    def test_alpha_one_degenerate(self):
        assert sample_positive_stable(1.0, RngStream(0)) == 1.0
        draws = sample_positive_stable(1.0, RngStream(0), size=5)
        assert np.all(draws == 1.0)

    def test_laplace_transform(self):
        for alpha in (0.3, 0.5, 0.7):
            s = sample_positive_stable(alpha, RngStream(42), size=200_000)
            for t in (0.5, 1.0, 2.0):
                vals = np.exp(-t * s)
                se = vals.std(ddof=1) / math.sqrt(len(vals))
                assert abs(vals.mean() - math.exp(-(t**alpha))) <= 4 * se

    def test_half_stable_matches_inverse_chi_square(self):
        n = 100_000
        s = np.sort(sample_positive_stable(0.5, RngStream(7), size=n))
        z = np.random.default_rng(123).standard_normal(n)
        ref = np.sort(1.0 / (2.0 * z * z))
        both = np.concatenate([s, ref])
        cdf_s = np.searchsorted(s, both, side="right") / n
        cdf_r = np.searchsorted(ref, both, side="right") / n
        ks = np.abs(cdf_s - cdf_r).max()
        crit = math.sqrt(-0.5 * math.log(0.0005)) * math.sqrt(2.0 / n)
        assert ks <= crit

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            sample_positive_stable(0.0, RngStream(0))
        with pytest.raises(ValueError):
            sample_positive_stable(1.2, RngStream(0))


class TestSymmetricLogistic:
    def test_alpha_one_components_independent(self):
        z = sample_symmetric_logistic_frechet(1.0, 3, RngStream(5), size=50_000)
        u = np.exp(-1.0 / z)
        corr = np.corrcoef(u, rowvar=False)
        assert np.abs(corr[np.triu_indices(3, 1)]).max() <= 0.02
        assert frechet_margins_ok(z)

    def test_small_alpha_near_comonotone(self):
        z = sample_symmetric_logistic_frechet(0.05, 2, RngStream(6), size=20_000)
        u = np.exp(-1.0 / z)
        rank_corr = np.corrcoef(np.argsort(np.argsort(u, axis=0), axis=0), rowvar=False)
        assert rank_corr[0, 1] >= 0.98

    def test_copula_value_at_center(self):
        z = sample_symmetric_logistic_frechet(0.5, 2, RngStream(3), size=100_000)
        u = np.exp(-1.0 / z)
        emp = np.mean((u[:, 0] <= 0.5) & (u[:, 1] <= 0.5))
        target = math.exp(-math.sqrt(2.0 * math.log(2.0) ** 2))
        assert abs(emp - target) <= 0.005

    def test_margins_unit_frechet(self):
        z = sample_symmetric_logistic_frechet(0.4, 3, RngStream(8), size=30_000)
        assert frechet_margins_ok(z)


class TestAsyLogistic:
    def test_symmetric_case_matches_symmetric_sampler(self):
        # (phi, psi, theta) = (0, 1, 0) must reproduce the plain
        # symmetric-logistic law: compare margins and the min statistic
        params = AsymmetricLogisticParams(alpha=0.5, **SYMMETRIC)
        n = 100_000
        x1 = sample_asy_logistic(params, n, RngStream(21, 0))
        x2 = sample_symmetric_logistic_frechet(0.5, 3, RngStream(22, 0), size=n)
        crit = math.sqrt(-0.5 * math.log(0.0005)) * math.sqrt(2.0 / n)
        for stat in (lambda a: a.min(axis=1), lambda a: a[:, 0], lambda a: a[:, 2]):
            s1 = np.sort(stat(x1))
            s2 = np.sort(stat(x2))
            both = np.concatenate([s1, s2])
            ks = np.abs(
                np.searchsorted(s1, both, side="right") / n
                - np.searchsorted(s2, both, side="right") / n
            ).max()
            assert ks <= crit

    def test_alpha_one_gives_independent_frechet(self):
        params = AsymmetricLogisticParams(alpha=1.0, **SYMMETRIC)
        x = sample_asy_logistic(params, 50_000, RngStream(4))
        u = np.exp(-1.0 / x)
        corr = np.corrcoef(u, rowvar=False)
        assert np.abs(corr[np.triu_indices(3, 1)]).max() <= 0.02
        assert frechet_margins_ok(x)

    def test_extremal_coefficient_oracle(self):
        params = AsymmetricLogisticParams(alpha=0.5, theta=0.6, phi=0.3, psi=0.0)
        n = 100_000
        x = sample_asy_logistic(params, n, RngStream(11))
        ell_hat = n / np.sum(np.min(1.0 / x, axis=1))
        ell_true = 3.0 * asy_logistic_pickands(params, [1 / 3, 1 / 3, 1 / 3])
        assert abs(ell_hat - ell_true) <= 3.0 * ell_true / math.sqrt(n)

    def test_copula_matches_formula_at_grid_points(self):
        params = AsymmetricLogisticParams(alpha=0.5, theta=0.6, phi=0.3, psi=0.0)
        n = 100_000
        x = sample_asy_logistic(params, n, RngStream(31))
        u = np.exp(-1.0 / x)
        for point in ([0.5, 0.5, 0.5], [0.3, 0.6, 0.9], [0.8, 0.2, 0.7]):
            point = np.array(point)
            lx = -np.log(point)
            target = math.exp(
                -lx.sum() * asy_logistic_pickands(params, lx / lx.sum())
            )
            emp = np.mean(np.all(u <= point, axis=1))
            se = math.sqrt(target * (1.0 - target) / n)
            assert abs(emp - target) <= 3.0 * se

    def test_margins_asymmetric_case(self):
        params = AsymmetricLogisticParams(alpha=0.7, theta=0.6, phi=0.3, psi=0.0)
        x = sample_asy_logistic(params, 30_000, RngStream(12))
        assert frechet_margins_ok(x)

    def test_cfg_surface_recovers_truth(self):
        # closure of the whole chain: sample, rank, estimate, compare
        params = AsymmetricLogisticParams(alpha=0.5, theta=0.6, phi=0.3, psi=0.0)
        x = sample_asy_logistic(params, 100_000, RngStream(99))
        u_hat = pseudo_observations(x)
        rule = midpoint_rule(3, 11)  # 66 nodes
        surface = estimate_surface(EstimatorSpec("cfg", "linear"), u_hat, rule)
        truth = asy_logistic_pickands_batch(params, rule.nodes)
        assert np.abs(surface.values - truth).max() <= 0.01


class TestMaxLinear:
    def test_comonotone_components_equal(self):
        x = sample_max_linear(comonotone_measure(2), 100, RngStream(1))
        assert np.allclose(x[:, 0], x[:, 1])

    def test_independence_components_independent(self):
        x = sample_max_linear(independence_measure(3), 50_000, RngStream(2))
        u = np.exp(-1.0 / x)
        corr = np.corrcoef(u, rowvar=False)
        assert np.abs(corr[np.triu_indices(3, 1)]).max() <= 0.02

    def test_copula_point_matches_eval(self, rng):
        H = random_spectral_measure(3, rng)
        n = 100_000
        x = sample_max_linear(H, n, RngStream(9))
        u = np.exp(-1.0 / x)
        point = np.array([0.5, 0.5, 0.5])
        target = eval_copula(H, point)
        emp = np.mean(np.all(u <= point, axis=1))
        assert abs(emp - target) <= 3.0 * math.sqrt(0.25 / n)

    def test_margins_unit_frechet(self, rng):
        H = random_spectral_measure(4, rng)
        x = sample_max_linear(H, 30_000, RngStream(10))
        assert frechet_margins_ok(x)


class TestReproducibility:
    def test_identical_streams_bitwise_equal(self):
        params = AsymmetricLogisticParams(alpha=0.4, theta=0.2, phi=0.1, psi=0.5)
        a = sample_asy_logistic(params, 1000, RngStream(77, 3))
        b = sample_asy_logistic(params, 1000, RngStream(77, 3))
        assert np.array_equal(a, b)

    def test_distinct_streams_look_independent(self):
        params = AsymmetricLogisticParams(alpha=0.5, **SYMMETRIC)
        n = 4000
        a = sample_asy_logistic(params, n, RngStream(77, 0))
        b = sample_asy_logistic(params, n, RngStream(77, 1))
        ranks_a = np.argsort(np.argsort(a[:, 0]))
        ranks_b = np.argsort(np.argsort(b[:, 0]))
        rho = np.corrcoef(ranks_a, ranks_b)[0, 1]
        assert abs(rho) <= 4.0 / math.sqrt(n)

    def test_zero_weight_subsets_consume_no_randomness(self):
        # psi = 0 skips the triple subset: the pair draws must match a
        # parameter set that differs only in unused weights
        p1 = AsymmetricLogisticParams(alpha=0.5, theta=1.0, phi=0.0, psi=0.0)
        x1 = sample_asy_logistic(p1, 10, RngStream(5))
        assert np.all(x1 > 0)
