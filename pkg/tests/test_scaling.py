"""Scale reconstruction tests with independent oracles."""

import numpy as np
import pytest
from scipy.special import ndtr

from jndscale.analysis.counts import ComparisonCounts, build_counts
from jndscale.analysis.scaling import (
    AnalysisError,
    PHI_INV_75,
    connected_components,
    fit_thurstone,
    reconstruct_scales,
    to_jnd,
)


def pair_matrix(c_ik, c_ki):
    return np.array([[0.0, c_ik], [c_ki, 0.0]])


def grid_search_delta(c_ik, c_ki):
    """Independent oracle: brute-force the binomial likelihood over deltas."""
    deltas = np.linspace(-6, 6, 240_001)
    p = np.clip(ndtr(deltas), 1e-12, 1 - 1e-12)
    ll = c_ik * np.log(p) + c_ki * np.log(1 - p)
    return float(deltas[np.argmax(ll)])


class TestFitThurstone:
    def test_two_stimulus_closed_form(self):
        scales, info = fit_thurstone(pair_matrix(75, 25), anchor=1)
        assert info.converged
        assert scales[0] == pytest.approx(PHI_INV_75, abs=1e-6)
        assert scales[0] == pytest.approx(grid_search_delta(75, 25), abs=1e-4)

    @pytest.mark.parametrize("c_ik,c_ki", [(90, 10), (60, 40), (30, 70), (99, 1)])
    def test_matches_grid_search_oracle(self, c_ik, c_ki):
        scales, _ = fit_thurstone(pair_matrix(c_ik, c_ki), anchor=1)
        assert scales[0] == pytest.approx(grid_search_delta(c_ik, c_ki), abs=1e-4)

    def test_symmetric_counts_give_zero_scales(self):
        counts = np.array([[0, 50, 10], [50, 0, 10], [10, 10, 0]], dtype=float)
        scales, info = fit_thurstone(counts)
        assert info.converged
        assert np.allclose(scales, 0.0)

    def test_anchor_is_exactly_zero(self):
        rng = np.random.default_rng(0)
        counts = rng.integers(1, 50, size=(6, 6)).astype(float)
        np.fill_diagonal(counts, 0)
        scales, _ = fit_thurstone(counts, anchor=3)
        assert scales[3] == 0.0

    def test_gauge_invariance_of_start_point(self):
        rng = np.random.default_rng(2)
        counts = rng.integers(5, 60, size=(8, 8)).astype(float)
        np.fill_diagonal(counts, 0)
        from_zero, _ = fit_thurstone(counts)
        from_random, _ = fit_thurstone(counts, start=rng.normal(0, 2, 8))
        assert np.max(np.abs(from_zero - from_random)) < 1e-5

    def test_likelihood_monotone_in_iterations(self):
        rng = np.random.default_rng(4)
        counts = rng.integers(0, 40, size=(10, 10)).astype(float)
        np.fill_diagonal(counts, 0)
        lls = [
            fit_thurstone(counts, max_iter=m)[1].log_likelihood for m in range(0, 12)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(lls, lls[1:]))

    def test_separated_pair_stays_finite(self):
        scales, info = fit_thurstone(pair_matrix(40, 0), anchor=1)
        assert np.isfinite(scales).all()
        assert scales[0] <= 6.0

    def test_chain_recovery_from_binomial_draws(self):
        rng = np.random.default_rng(7)
        true = np.array([0.0, 0.4, 1.0, 1.7, 2.3])
        n = len(true)
        counts = np.zeros((n, n))
        per_pair = 10_000
        for i in range(n):
            for k in range(i + 1, n):
                wins = rng.binomial(per_pair, ndtr(true[i] - true[k]))
                counts[i, k] = wins
                counts[k, i] = per_pair - wins
        scales, _ = fit_thurstone(counts)
        assert np.max(np.abs(scales - true)) < 0.03

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(AnalysisError, match="diagonal"):
            fit_thurstone(np.array([[1.0, 2.0], [2.0, 0.0]]))


class TestConnectivity:
    def test_connected_graph_single_component(self):
        counts = pair_matrix(5, 5)
        assert len(connected_components(counts)) == 1

    def test_disconnected_error_names_components(self, small_campaign, small_questions):
        counts = build_counts(small_campaign, small_questions, "sA", "BTC")
        broken = counts.matrix.copy()
        # sever every edge touching the last node
        broken[-1, :] = 0
        broken[:, -1] = 0
        severed = ComparisonCounts(
            counts.source_id, counts.protocol, counts.nodes, broken,
            counts.q_left, counts.q_right, counts.q_n_left, counts.q_n_right,
            counts.q_n_not_sure,
        )
        with pytest.raises(AnalysisError, match="disconnected") as err:
            reconstruct_scales(severed)
        assert str(counts.nodes[-1]) in str(err.value)


class TestToJnd:
    def test_thurstone_unit_becomes_one_jnd(self):
        assert to_jnd(np.array([0.6745]))[0] == pytest.approx(1.0, abs=1e-3)

    def test_zero_maps_to_zero(self):
        assert to_jnd(np.array([0.0]))[0] == 0.0

    def test_linearity(self):
        assert to_jnd(np.array([1.3490]))[0] == pytest.approx(2.0, abs=1e-3)

    def test_dict_input(self):
        out = to_jnd({("c", 1): PHI_INV_75})
        assert out[("c", 1)] == pytest.approx(1.0)
