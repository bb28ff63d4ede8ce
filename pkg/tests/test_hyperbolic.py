"""Ball geometry: closed forms, metric axioms, midpoint identities."""

import math

import numpy as np
import pytest

from mechpert.errors import EmptyInput, OutsideBall
from mechpert.hyperbolic import (
    einstein_midpoint,
    gaussian_density_weight,
    percentile_bandwidth,
    poincare_distance,
    project_to_ball,
)


def _random_ball_points(rng, count, dim=4, radius=0.9):
    points = []
    while len(points) < count:
        p = rng.uniform(-1, 1, size=dim)
        norm = np.linalg.norm(p)
        if norm > 0:
            points.append(p / norm * rng.uniform(0, radius))
    return points


class TestPoincareDistance:
    def test_identity(self):
        u = np.array([0.3, -0.2, 0.1])
        assert poincare_distance(u, u) == 0.0

    def test_radial_closed_form(self):
        # d((r, 0), origin) = 2 artanh(r)
        u = np.array([0.5, 0.0, 0.0])
        origin = np.zeros(3)
        assert poincare_distance(u, origin) == pytest.approx(math.log(3), abs=1e-10)
        for r in (0.1, 0.25, 0.7, 0.95):
            point = np.array([r, 0.0])
            assert poincare_distance(point, np.zeros(2)) == pytest.approx(
                2 * math.atanh(r), abs=1e-10
            )

    def test_symmetry_exact(self):
        rng = np.random.default_rng(0)
        for u, v in zip(_random_ball_points(rng, 50), _random_ball_points(rng, 50)):
            assert poincare_distance(u, v) == poincare_distance(v, u)

    def test_metric_axioms_sampled(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            u, v, w = _random_ball_points(rng, 3)
            duv = poincare_distance(u, v)
            dvw = poincare_distance(v, w)
            duw = poincare_distance(u, w)
            assert duv >= 0 and dvw >= 0 and duw >= 0
            assert duw <= duv + dvw + 1e-12

    def test_outside_ball_rejected(self):
        with pytest.raises(OutsideBall):
            poincare_distance(np.array([1.1, 0.0]), np.zeros(2))


class TestEinsteinMidpoint:
    def test_singleton_round_trip(self):
        rng = np.random.default_rng(3)
        for p in _random_ball_points(rng, 20):
            np.testing.assert_allclose(einstein_midpoint([p]), p, atol=1e-12)

    def test_antipodal_pair_origin(self):
        u = np.array([0.4, -0.3, 0.2])
        np.testing.assert_allclose(einstein_midpoint([u, -u]), np.zeros(3), atol=1e-10)

    def test_collinear_radial_points(self):
        # 1-d reduction: compute the Klein-model mean by hand on the same ray
        radii = [0.1, 0.3, 0.5]
        points = [np.array([r, 0.0]) for r in radii]
        ks = [2 * r / (1 + r * r) for r in radii]
        gammas = [1 / math.sqrt(1 - k * k) for k in ks]
        m = sum(g * k for g, k in zip(gammas, ks)) / sum(gammas)
        expected_r = m / (1 + math.sqrt(1 - m * m))
        midpoint = einstein_midpoint(points)
        np.testing.assert_allclose(midpoint, [expected_r, 0.0], atol=1e-12)

    def test_duplicated_point_fixed(self):
        p = np.array([0.2, 0.6])
        np.testing.assert_allclose(einstein_midpoint([p, p, p]), p, atol=1e-12)

    def test_always_inside_ball(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            points = _random_ball_points(rng, 5, radius=0.99)
            mid = einstein_midpoint(points)
            assert np.linalg.norm(mid) < 1.0 - 1e-12

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            einstein_midpoint([])


class TestPercentileBandwidth:
    def test_nearest_rank_20(self):
        distances = [float(i) for i in range(1, 11)]
        assert percentile_bandwidth(distances, 20.0) == 2.0

    def test_nearest_rank_15(self):
        distances = [float(i) for i in range(1, 11)]
        assert percentile_bandwidth(distances, 15.0) == 2.0

    def test_all_zero_floor(self):
        assert percentile_bandwidth([0.0, 0.0, 0.0], 20.0) == 1e-6

    def test_zero_result_uses_smallest_positive(self):
        assert percentile_bandwidth([0.0, 0.0, 0.0, 0.0, 3.0, 5.0], 20.0) == 3.0

    def test_unsorted_input(self):
        assert percentile_bandwidth([10.0, 1.0, 5.0, 2.0], 30.0) == 2.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            percentile_bandwidth([], 20.0)


class TestGaussianDensityWeight:
    def test_peak(self):
        assert gaussian_density_weight(0.0, 1.0) == 1.0

    def test_unit_bandwidth(self):
        assert gaussian_density_weight(1.0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-12)
        assert gaussian_density_weight(2.5, 2.5) == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_monotone_decay(self):
        weights = [gaussian_density_weight(d, 0.7) for d in np.linspace(0, 10, 50)]
        assert all(a > b for a, b in zip(weights, weights[1:]))
        assert weights[-1] < 1e-30

    def test_increasing_in_sigma(self):
        assert gaussian_density_weight(1.0, 2.0) > gaussian_density_weight(1.0, 1.0)

    def test_invalid_sigma(self):
        with pytest.raises(ValueError):
            gaussian_density_weight(1.0, 0.0)


class TestProjectToBall:
    def test_inside_untouched(self):
        p = np.array([0.5, 0.5])
        np.testing.assert_array_equal(project_to_ball(p), p)

    def test_boundary_rescaled(self):
        p = np.array([1.0, 0.0])
        projected = project_to_ball(p)
        assert np.linalg.norm(projected) == pytest.approx(1.0 - 1e-9)
