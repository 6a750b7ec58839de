import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pulsedeconv as pd
from conftest import make_spikes


def report_with(epsilon, beta, nu=1.1):
    return pd.AdmissibilityReport(C=(1.22, 1.59, 2.04, 2.6), epsilon=epsilon,
                                  beta=beta, nu=nu, passed=True)


class TestLocalizationError:
    def test_identical_supports(self):
        t = make_spikes([10, 20], [1.0, 2.0], 50)
        np.testing.assert_array_equal(pd.localization_error(t, t), [0.0, 0.0])

    def test_nearest_match(self):
        truth = make_spikes([10], [1.0], 50)
        est = make_spikes([12, 40], [1.0, 1.0], 50)
        np.testing.assert_array_equal(pd.localization_error(truth, est), [2.0])

    def test_empty_truth(self):
        truth = make_spikes([], [], 50)
        est = make_spikes([12], [1.0], 50)
        assert len(pd.localization_error(truth, est)) == 0

    def test_empty_estimate_gives_inf(self):
        truth = make_spikes([10, 20], [1.0, 1.0], 50)
        est = make_spikes([], [], 50)
        assert np.all(np.isinf(pd.localization_error(truth, est)))

    @given(shift=st.integers(0, 100))
    @settings(max_examples=30, deadline=None)
    def test_translation_invariance(self, shift):
        truth = make_spikes(np.array([10, 30]) + shift, [1.0, 1.0], 200)
        est = make_spikes(np.array([12, 28]) + shift, [1.0, 1.0], 200)
        np.testing.assert_array_equal(pd.localization_error(truth, est),
                                      [2.0, 2.0])


class TestPartition:
    def test_single_spike_window(self):
        # N*eps*sigma = 2 -> indices 48..52
        truth = make_spikes([50], [1.0], 100)
        part = pd.partition_near_far(truth, epsilon=0.5, sigma=1.0, N=4)
        np.testing.assert_array_equal(part.near_indices, [48, 49, 50, 51, 52])

    def test_empty_truth_all_far(self):
        truth = make_spikes([], [], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        assert len(part.near_indices) == 0
        assert len(part.far_indices) == 100

    def test_disjoint_windows_count(self):
        truth = make_spikes([20, 60], [1.0, 1.0], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        assert len(part.near_indices) == 2 * (2 * 2 + 1)

    def test_near_far_disjoint_cover(self):
        truth = make_spikes([20, 30], [1.0, 1.0], 64)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        assert len(part.near_indices) + len(part.far_indices) == 64


class TestFarFalseAmplitude:
    def test_all_near_gives_zero(self):
        truth = make_spikes([50], [1.0], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        est = make_spikes([49, 51], [0.5, -0.5], 100)
        assert pd.far_false_amplitude(est, part) == 0.0

    def test_single_far_spike(self):
        truth = make_spikes([50], [1.0], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        est = make_spikes([80], [0.3], 100)
        assert pd.far_false_amplitude(est, part) == pytest.approx(0.3)

    def test_mixed(self):
        truth = make_spikes([50], [1.0], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        est = make_spikes([50, 80, 90], [1.0, 0.3, -0.2], 100)
        assert pd.far_false_amplitude(est, part) == pytest.approx(0.5)


class TestComputeBounds:
    def test_zero_delta_zero_bounds(self):
        truth = make_spikes([10], [5.0], 100)
        b = pd.compute_bounds(report_with(0.5, 0.662), 1.0, 4, 0.0, truth, 1.0)
        assert b.l1_bound == 0.0
        assert b.far_amp_bound == 0.0
        assert b.weighted_d2_bound == 0.0
        np.testing.assert_array_equal(b.loc_bound_per_spike, [0.0])

    def test_arithmetic_example(self):
        # gamma = max(4, 2) = 4; 16*16*0.01/0.662
        truth = make_spikes([10], [5.0], 100)
        b = pd.compute_bounds(report_with(0.5, 0.662), 1.0, 4, 0.01, truth, 1.0)
        assert b.gamma == 4.0
        assert b.l1_bound == pytest.approx(16 * 16 * 0.01 / 0.662, rel=1e-12)
        assert b.l1_bound == pytest.approx(3.8670694864, abs=1e-9)

    def test_loc_bound_formula(self):
        truth = make_spikes([10], [5.0], 100)
        delta = 0.001
        b = pd.compute_bounds(report_with(0.5, 0.662), 1.0, 4, delta, truth, 1.0)
        gamma = 4.0
        l1b = 16 * gamma ** 2 * delta / 0.662
        expect = (8 * gamma ** 2 / 0.662) * np.sqrt(1.0 * delta / (5.0 - l1b))
        assert b.loc_bound_per_spike[0] == pytest.approx(expect, rel=1e-12)

    def test_boundary_amplitude_undefined(self):
        truth = make_spikes([10], [3.8670694864 / 1.0], 100)
        # |c| == 16 gamma^2 delta / beta exactly -> undefined, flagged NaN
        b = pd.compute_bounds(report_with(0.5, 0.662), 1.0, 4, 0.01, truth, 1.0)
        assert np.isnan(b.loc_bound_per_spike[0])
        assert not b.defined_mask()[0]

    def test_gamma_uses_inverse_epsilon(self):
        truth = make_spikes([10], [5.0], 100)
        b = pd.compute_bounds(report_with(0.1, 0.5), 1.0, 4, 0.01, truth, 1.0)
        assert b.gamma == 10.0


class TestLemma21Check:
    def test_exact_estimate(self):
        truth = make_spikes([50], [2.0], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)
        out = pd.check_lemma21(truth, truth, part, bound=1.0)
        assert out == {"lhs": 0.0, "holds": True}

    def test_near_spike_arithmetic(self):
        # one near spike of amplitude 2 at distance 3: lhs = 2 * 9 = 18
        truth = make_spikes([50], [5.0], 100)
        part = pd.partition_near_far(truth, 1.0, 1.0, 4)  # radius 4
        est = make_spikes([53], [2.0], 100)
        out = pd.check_lemma21(truth, est, part, bound=20.0)
        assert out["lhs"] == pytest.approx(18.0)
        assert out["holds"]

    def test_violation_detected(self):
        truth = make_spikes([50], [5.0], 100)
        part = pd.partition_near_far(truth, 1.0, 1.0, 4)
        est = make_spikes([53], [2.0], 100)
        out = pd.check_lemma21(truth, est, part, bound=10.0)
        assert not out["holds"]

    def test_far_spikes_excluded(self):
        truth = make_spikes([50], [5.0], 100)
        part = pd.partition_near_far(truth, 0.5, 1.0, 4)  # radius 2
        est = make_spikes([80], [9.0], 100)
        out = pd.check_lemma21(truth, est, part, bound=0.1)
        assert out["lhs"] == 0.0
        assert out["holds"]
