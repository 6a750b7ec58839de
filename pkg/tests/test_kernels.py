import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import pulsedeconv as pd

# curvature-envelope constants for the two built-in families, reproduced to
# two decimals by the grid supremum
GAUSSIAN_C = (1.22, 1.59, 2.04, 2.6)
CAUCHY_C = (1.0, 1.0, 2.0, 5.22)


class TestEvalKernel:
    def test_gaussian_at_zero(self, gaussian):
        assert pd.eval_kernel(gaussian, 0.0, 0) == 1.0

    def test_gaussian_second_derivative_at_zero(self, gaussian):
        assert pd.eval_kernel(gaussian, 0.0, 2) == -1.0

    def test_cauchy_at_one(self, cauchy):
        assert pd.eval_kernel(cauchy, 1.0, 0) == 0.5

    def test_cauchy_second_derivative_at_zero(self, cauchy):
        assert pd.eval_kernel(cauchy, 0.0, 2) == -2.0

    def test_gaussian_at_half(self, gaussian):
        # closed form evaluated independently
        assert pd.eval_kernel(gaussian, 0.5, 0) == pytest.approx(
            math.exp(-0.125), abs=1e-15
        )

    @pytest.mark.parametrize("order", [-1, 4, 10])
    def test_unsupported_order(self, gaussian, order):
        with pytest.raises(ValueError):
            pd.eval_kernel(gaussian, 0.0, order)

    @pytest.mark.parametrize("name", ["gaussian", "cauchy"])
    def test_evenness(self, name):
        k = pd.kernel_by_name(name)
        t = np.linspace(0.0, 8.0, 101)
        np.testing.assert_allclose(k.eval(t, 0), k.eval(-t, 0), rtol=0, atol=0)

    @pytest.mark.parametrize("name", ["gaussian", "cauchy"])
    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivative_consistency(self, name, order):
        # central differences of order-1 match the closed form to 1e-6 relative
        k = pd.kernel_by_name(name)
        t = np.linspace(-3.0, 3.0, 241)
        h = 1e-5
        fd = (k.eval(t + h, order - 1) - k.eval(t - h, order - 1)) / (2 * h)
        exact = k.eval(t, order)
        scale = np.max(np.abs(exact))
        np.testing.assert_allclose(fd, exact, atol=1e-6 * scale)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            pd.kernel_by_name("sinc")


class TestVerifyAdmissibility:
    def test_gaussian_constants(self, gaussian_report):
        for got, want in zip(gaussian_report.C, GAUSSIAN_C):
            assert got == pytest.approx(want, abs=0.01)
        assert gaussian_report.passed

    def test_cauchy_constants(self, cauchy):
        report = pd.verify_admissibility(cauchy)
        for got, want in zip(report.C, CAUCHY_C):
            assert got == pytest.approx(want, abs=0.01)
        assert report.passed

    def test_beta_for_explicit_epsilon(self, gaussian):
        # beta = -g''(0.5) = 0.75 * exp(-1/8), computed independently
        report = pd.verify_admissibility(gaussian, epsilon=0.5)
        assert report.beta == pytest.approx(0.75 * math.exp(-0.125), abs=1e-6)
        assert report.epsilon == 0.5
        assert report.passed

    def test_constants_bound_derivatives_pointwise(self, gaussian, gaussian_report):
        t = np.linspace(-20.0, 20.0, 4001)
        for order, C in enumerate(gaussian_report.C):
            bound = C / (1.0 + t * t)
            assert np.all(np.abs(gaussian.eval(t, order)) <= bound + 1e-12)

    def test_epsilon_beta_below_nu(self, gaussian_report, cauchy):
        assert 0 < gaussian_report.epsilon < gaussian_report.nu
        assert 0 < gaussian_report.beta < gaussian_report.nu
        rc = pd.verify_admissibility(cauchy)
        assert 0 < rc.epsilon < rc.nu
        assert 0 < rc.beta < rc.nu

    def test_json_fields(self, gaussian_report):
        d = gaussian_report.to_json_dict()
        assert set(d) == {"C0", "C1", "C2", "C3", "epsilon", "beta", "nu",
                          "passed"}

    def test_grid_preconditions(self, gaussian):
        with pytest.raises(ValueError):
            pd.verify_admissibility(gaussian, t_max=5.0)
        with pytest.raises(ValueError):
            pd.verify_admissibility(gaussian, step=1e-2)

    def test_custom_kernel_requires_nu(self, gaussian):
        k = pd.custom_kernel("anon", gaussian.derivatives)
        with pytest.raises(ValueError):
            pd.verify_admissibility(k)
        report = pd.verify_admissibility(k, nu=1.1)
        assert report.passed

    def test_inadmissible_kernel_reports_failure(self):
        # t^2 exp(-t^2/2): zero (and convex) at the origin, so no
        # concavity neighbourhood exists
        def d0(t):
            return t * t * np.exp(-t * t / 2)

        def d1(t):
            return (2 * t - t ** 3) * np.exp(-t * t / 2)

        def d2(t):
            return (2 - 5 * t * t + t ** 4) * np.exp(-t * t / 2)

        def d3(t):
            return (-12 * t + 9 * t ** 3 - t ** 5) * np.exp(-t * t / 2)

        k = pd.custom_kernel("bump", (d0, d1, d2, d3), min_separation=1.0)
        report = pd.verify_admissibility(k)
        assert not report.passed


class TestSampleKernel:
    def test_gaussian_taps(self, sampled_g14):
        assert sampled_g14.tap(0) == 1.0
        assert sampled_g14.tap(4) == pytest.approx(math.exp(-0.5), abs=1e-15)

    def test_cauchy_tap(self, cauchy):
        sk = pd.sample_kernel(cauchy, 1.0, 1, trunc_tol=1e-3)
        assert sk.tap(1) == 0.5

    def test_radius_from_tail_bound(self, gaussian, sampled_g14):
        # brute-force scan oracle: smallest R with C0/(1+(R/4)^2) < 1e-6
        t = np.arange(0.0, 20.0005, 1e-3)
        C0 = np.max(np.abs(gaussian.eval(t, 0)) * (1 + t * t))
        R = 1
        while C0 / (1.0 + (R / 4.0) ** 2) >= 1e-6:
            R += 1
        assert sampled_g14.radius == R
        assert R >= 4 * 4  # at least sigma*N pulse widths

    def test_taps_symmetric(self, sampled_g14):
        np.testing.assert_array_equal(sampled_g14.taps, sampled_g14.taps[::-1])

    def test_taps_exact(self, gaussian, sampled_g14):
        k = np.arange(-sampled_g14.radius, sampled_g14.radius + 1)
        np.testing.assert_array_equal(sampled_g14.taps, gaussian.eval(k / 4.0, 0))

    def test_effective_radius_much_smaller(self, sampled_g14):
        assert sampled_g14.effective_radius < sampled_g14.radius / 10
        # every tap outside the effective radius sits below the tolerance
        r = sampled_g14.effective_radius
        R = sampled_g14.radius
        outside = np.abs(np.arange(-R, R + 1)) >= r
        assert np.all(np.abs(sampled_g14.taps[outside]) < sampled_g14.trunc_tol)

    def test_banded_taps_consistency(self, sampled_g14):
        band = sampled_g14.banded_taps()
        assert len(band) % 2 == 1
        rb = (len(band) - 1) // 2
        assert band[rb] == 1.0
        assert np.all(np.abs(band[[0, -1]]) >= 1e-8)

    @pytest.mark.parametrize("bad", [0.0, -1e-3])
    def test_invalid_trunc_tol(self, gaussian, bad):
        with pytest.raises(ValueError):
            pd.sample_kernel(gaussian, 1.0, 4, trunc_tol=bad)

    def test_invalid_scale(self, gaussian):
        with pytest.raises(ValueError):
            pd.sample_kernel(gaussian, -1.0, 4)
        with pytest.raises(ValueError):
            pd.sample_kernel(gaussian, 1.0, 0)

    @given(sigma=st.floats(0.5, 3.0), N=st.integers(1, 8))
    @settings(max_examples=20, deadline=None)
    def test_tail_bound_holds(self, sigma, N):
        sk = pd.sample_kernel(pd.gaussian_kernel(), sigma, N, trunc_tol=1e-4)
        t = np.arange(0.0, 20.0005, 1e-3)
        C0 = np.max(np.exp(-t * t / 2) * (1 + t * t))
        assert C0 / (1.0 + (sk.radius / (sigma * N)) ** 2) < 1e-4
        assert C0 / (1.0 + ((sk.radius - 1) / (sigma * N)) ** 2) >= 1e-4
