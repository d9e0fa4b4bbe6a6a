import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pickands.simplex import enumerate_grid, midpoint_rule
from pickands.spectral import (
    DependenceSurface,
    SpectralMeasure,
    check_shape,
    comonotone_measure,
    discretize,
    discretize_with_report,
    eval_copula,
    eval_pickands,
    eval_tail_dependence,
    independence_measure,
    pickands_surface,
    pickands_values,
    read_measure_csv,
    read_measure_json,
    validate,
    write_measure_csv,
    write_measure_json,
)
from tests.conftest import random_spectral_measure


class TestValidate:
    def test_independence_passes(self):
        report = validate(independence_measure(3))
        assert report.passed
        assert np.allclose(report.residuals, 0.0)

    def test_comonotone_passes(self):
        report = validate(comonotone_measure(4))
        assert report.passed
        assert report.total_mass == pytest.approx(4.0)

    def test_single_barycenter_mass_fails(self):
        measure = SpectralMeasure(p=2, points=[[0.5, 0.5]], masses=[1.0])
        report = validate(measure)
        assert not report.passed
        assert np.allclose(report.residuals, -0.5)

    def test_random_measures_pass(self, rng):
        for p in (2, 3, 4):
            assert validate(random_spectral_measure(p, rng)).passed

    def test_tiny_masses_pruned(self):
        measure = SpectralMeasure(
            p=2, points=[[1, 0], [0.5, 0.5], [0, 1]], masses=[1.0, 1e-15, 1.0]
        )
        assert len(measure) == 2

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            SpectralMeasure(p=2, points=[[1, 0], [0, 1]], masses=[1.0, -0.1])


class TestEvalPickands:
    def test_independence_is_one(self, rng):
        H = independence_measure(3)
        for _ in range(5):
            w = rng.dirichlet(np.ones(3))
            assert eval_pickands(H, w) == pytest.approx(1.0, abs=1e-12)

    def test_comonotone_is_max(self):
        H = comonotone_measure(3)
        assert eval_pickands(H, [0.5, 0.3, 0.2]) == pytest.approx(0.5, abs=1e-15)

    def test_hand_computed_three_atom_value(self):
        H = SpectralMeasure(
            p=2, points=[[1, 0], [0.5, 0.5], [0, 1]], masses=[0.5, 1.0, 0.5]
        )
        assert eval_pickands(H, [0.5, 0.5]) == pytest.approx(0.75, abs=1e-15)

    def test_vertex_values_equal_one(self, rng):
        # the moment constraint read at a vertex
        for p in (2, 3, 4):
            H = random_spectral_measure(p, rng)
            for j in range(p):
                e = np.zeros(p)
                e[j] = 1.0
                assert eval_pickands(H, e) == pytest.approx(1.0, abs=1e-12)

    def test_bounds_hold_for_random_measures(self, rng):
        for p in (2, 3):
            H = random_spectral_measure(p, rng)
            for _ in range(20):
                w = rng.dirichlet(np.ones(p))
                a = eval_pickands(H, w)
                assert max(w) - 1e-12 <= a <= 1.0 + 1e-12

    def test_batch_matches_scalar(self, rng):
        H = random_spectral_measure(3, rng)
        nodes = rng.dirichlet(np.ones(3), size=7)
        batch = pickands_values(H, nodes)
        for k, w in enumerate(nodes):
            assert batch[k] == pytest.approx(eval_pickands(H, w), abs=1e-14)


class TestTailDependence:
    def test_zero_argument(self, rng):
        H = random_spectral_measure(3, rng)
        assert eval_tail_dependence(H, np.zeros(3)) == 0.0

    def test_independence_sums(self):
        H = independence_measure(3)
        assert eval_tail_dependence(H, [1, 1, 1]) == pytest.approx(3.0, abs=1e-12)

    def test_comonotone_is_componentwise_max(self):
        H = comonotone_measure(2)
        assert eval_tail_dependence(H, [2.0, 3.0]) == pytest.approx(3.0, abs=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from([0.5, 2.0, 10.0]), st.integers(0, 2**31 - 1))
    def test_homogeneity(self, scale, seed):
        rng = np.random.default_rng(seed)
        H = random_spectral_measure(3, rng)
        x = rng.uniform(0.0, 5.0, 3)
        lhs = eval_tail_dependence(H, scale * x)
        rhs = scale * eval_tail_dependence(H, x)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_rejects_negative_components(self, rng):
        H = random_spectral_measure(2, rng)
        with pytest.raises(ValueError):
            eval_tail_dependence(H, [-1.0, 2.0])


class TestCopula:
    def test_all_ones(self, rng):
        H = random_spectral_measure(3, rng)
        assert eval_copula(H, np.ones(3)) == pytest.approx(1.0, abs=1e-15)

    def test_independence_is_product(self):
        H = independence_measure(2)
        assert eval_copula(H, [0.5, 0.5]) == pytest.approx(0.25, abs=1e-12)

    def test_comonotone_is_min(self):
        H = comonotone_measure(2)
        assert eval_copula(H, [0.3, 0.8]) == pytest.approx(0.3, abs=1e-14)

    def test_rejects_out_of_range(self, rng):
        H = random_spectral_measure(2, rng)
        with pytest.raises(ValueError):
            eval_copula(H, [0.0, 0.5])
        with pytest.raises(ValueError):
            eval_copula(H, [0.5, 1.5])


class TestDiscretize:
    def test_grid_supported_measure_is_fixed_point(self, rng):
        grid = enumerate_grid(2, 4)
        masses = np.zeros(len(grid))
        masses[grid.index_of([4, 0])] = 0.5
        masses[grid.index_of([2, 2])] = 1.0
        masses[grid.index_of([0, 4])] = 0.5
        H = SpectralMeasure(p=2, points=grid.points, masses=masses)
        Hm = discretize(H, 4)
        assert len(Hm) == len(H)
        assert np.allclose(Hm.points, H.points, atol=1e-12)
        assert np.allclose(Hm.masses, H.masses, rtol=1e-12)

    def test_single_atom_relocation(self):
        H = SpectralMeasure(p=2, points=[[0.6, 0.4]], masses=[2.0])
        Hm = discretize(H, 2)
        assert np.allclose(Hm.points, [[0.5, 0.5]])
        assert np.allclose(Hm.masses, [2.0])

    def test_output_is_valid_measure(self, rng):
        for p in (2, 3, 4):
            for m in (3, 7):
                H = random_spectral_measure(p, rng)
                assert validate(discretize(H, m)).passed

    def test_vertex_corrections_bounded(self, rng):
        # Provable bounds: the deficits c_j lie in [0, p) (the relocated
        # measure moves at most 1/m of each of its p units of mass per
        # margin), hence every correction mass is below p^2/(m + p^2 - p).
        for p in (2, 3, 4):
            for m in (5, 10, 20):
                for _ in range(10):
                    H = random_spectral_measure(p, rng, n_atoms=12)
                    _, report = discretize_with_report(H, m)
                    bound = p * p / (m + p * p - p)
                    assert np.all(report.c >= 0.0) and np.all(report.c < p)
                    assert 0.0 <= report.a0 < bound
                    assert np.all(report.a >= 0.0) and np.all(report.a < bound)

    def test_sup_error_bounded_by_p2_over_m(self, rng):
        p, m = 3, 10
        nodes = midpoint_rule(p, 14).nodes  # ~200 evaluation points
        for _ in range(5):
            H = random_spectral_measure(p, rng)
            Hm = discretize(H, m)
            gap = np.abs(pickands_values(Hm, nodes) - pickands_values(H, nodes)).max()
            assert gap <= p * p / m


def _mass_at(measure, point):
    hits = np.all(np.isclose(measure.points, point, atol=1e-12), axis=1)
    return float(measure.masses[hits].sum())


class TestCheckShape:
    def test_valid_measure_has_no_violations(self, rng):
        rule = midpoint_rule(2, 32)
        H = random_spectral_measure(2, rng)
        report = check_shape(pickands_surface(H, rule))
        assert report.passed
        assert report.n_pairs > 0

    def test_constant_one_passes(self):
        rule = midpoint_rule(3, 8)
        surface = DependenceSurface(rule=rule, values=np.ones(len(rule)))
        assert check_shape(surface).passed

    def test_constant_below_max_reports_lower_violation(self):
        rule = midpoint_rule(2, 16)
        surface = DependenceSurface(rule=rule, values=np.full(len(rule), 0.9))
        report = check_shape(surface)
        # worst violation occurs at the node closest to a vertex
        expected = rule.nodes.max() - 0.9
        assert report.max_lower_violation == pytest.approx(expected, abs=1e-12)
        assert not report.passed

    def test_concave_surface_reports_convexity_violation(self):
        rule = midpoint_rule(2, 64)
        w = rule.nodes[:, 0]
        values = 0.8 + 0.5 * w * (1.0 - w)  # concave bump
        report = check_shape(DependenceSurface(rule=rule, values=values))
        assert report.max_convexity_violation > 1e-6


class TestSerialization:
    def test_csv_round_trip(self, tmp_path, rng):
        H = random_spectral_measure(3, rng)
        path = tmp_path / "H.csv"
        write_measure_csv(H, path)
        back = read_measure_csv(path)
        assert back.p == 3
        assert np.allclose(back.points, H.points)
        assert np.allclose(back.masses, H.masses)

    def test_json_round_trip(self, tmp_path, rng):
        H = random_spectral_measure(2, rng)
        path = tmp_path / "H.json"
        write_measure_json(H, path)
        back = read_measure_json(path)
        assert np.allclose(back.points, H.points)
        assert np.allclose(back.masses, H.masses)
