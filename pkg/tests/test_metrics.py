"""Metric oracles: scipy cross-checks, affine invariance, top-k construction."""

import numpy as np
import pytest
import scipy.stats

from mechpert.errors import ConstantInput, EmptyScores, LengthMismatch
from mechpert.metrics import c20, mean_sem, pearson, top_effect_indices


class TestPearson:
    def test_perfect_correlation(self):
        x = np.array([1.0, 2.0, 5.0])
        assert pearson(x, x) == pytest.approx(1.0)

    def test_perfect_anticorrelation(self):
        x = np.array([1.0, 2.0, 5.0])
        assert pearson(x, -x) == pytest.approx(-1.0)

    def test_hand_fixture_scipy_oracle(self):
        # value frozen from scipy.stats.pearsonr([1,2,3], [2,4,7])
        assert pearson(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 7.0])) == pytest.approx(
            0.9933992677987828, abs=1e-12
        )

    def test_matches_scipy_on_random_vectors(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x = rng.standard_normal(30)
            y = rng.standard_normal(30)
            expected = scipy.stats.pearsonr(x, y).statistic
            assert pearson(x, y) == pytest.approx(expected, abs=1e-12)

    def test_constant_input(self):
        with pytest.raises(ConstantInput):
            pearson(np.ones(5), np.arange(5.0))
        with pytest.raises(ConstantInput):
            pearson(np.arange(5.0), np.ones(5))

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pearson(np.arange(3.0), np.arange(4.0))
        with pytest.raises(LengthMismatch):
            pearson(np.array([1.0]), np.array([2.0]))


class TestC20:
    def test_short_profile_reduces_to_pearson(self):
        rng = np.random.default_rng(1)
        pred = rng.standard_normal(5)
        truth = rng.standard_normal(5)
        assert c20(pred, truth) == pearson(pred, truth)

    def test_identity(self):
        rng = np.random.default_rng(2)
        truth = rng.standard_normal(50)
        assert c20(truth.copy(), truth) == pytest.approx(1.0)

    def test_crafted_top_k_fixture(self):
        # 30 genes: indices 0..19 carry |truth| >= 10 (the known top-20 set by
        # the brute-force rank), 20..29 carry small effects. pred equals truth
        # on the top set and is anti-correlated on the rest.
        truth = np.concatenate([np.linspace(10, 29, 20) * np.resize([1, -1], 20), np.linspace(0.1, 1.0, 10)])
        pred = truth.copy()
        pred[20:] = -truth[20:]
        brute_force_top = set(np.argsort(-np.abs(truth), kind="stable")[:20])
        assert brute_force_top == set(range(20))
        assert c20(pred, truth) == pytest.approx(1.0, abs=1e-12)
        # sanity: the full-profile Pearson is visibly below 1
        assert pearson(pred, truth) < 1.0 - 1e-6

    def test_affine_invariance(self):
        rng = np.random.default_rng(3)
        truth = rng.standard_normal(100)
        pred = rng.standard_normal(100)
        base = c20(pred, truth)
        assert c20(3.7 * pred + 11.0, truth) == pytest.approx(base, abs=1e-12)
        assert c20(0.001 * pred - 5.0, truth) == pytest.approx(base, abs=1e-12)

    def test_tie_break_by_label(self):
        truth = np.array([1.0, 1.0, 1.0, 0.5])
        labels = ["D", "B", "A", "C"]
        idx = top_effect_indices(truth, 2, labels)
        # equal |truth|: A (index 2) then B (index 1)
        assert list(idx) == [2, 1]

    def test_constant_truth_subset(self):
        truth = np.concatenate([np.full(20, 5.0), np.linspace(0.1, 0.9, 10)])
        pred = np.arange(30.0)
        with pytest.raises(ConstantInput):
            c20(pred, truth)


class TestMeanSem:
    def test_constant_scores(self):
        result = mean_sem([1.0, 1.0, 1.0])
        assert result.mean == 1.0
        assert result.sem == 0.0

    def test_two_point_fixture(self):
        # s = sqrt(0.5), sem = sqrt(0.5)/sqrt(2) = 0.5
        result = mean_sem([0.0, 1.0])
        assert result.mean == pytest.approx(0.5)
        assert result.sem == pytest.approx(0.5)

    def test_singleton_flagged(self):
        result = mean_sem([0.7])
        assert result.mean == pytest.approx(0.7)
        assert result.sem == 0.0
        assert result.singleton

    def test_empty(self):
        with pytest.raises(EmptyScores):
            mean_sem([])
