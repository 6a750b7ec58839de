"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

import pulsedeconv as pd


@pytest.fixture(scope="session")
def gaussian():
    return pd.gaussian_kernel()


@pytest.fixture(scope="session")
def cauchy():
    return pd.cauchy_kernel()


@pytest.fixture(scope="session")
def gaussian_report(gaussian):
    return pd.verify_admissibility(gaussian)


@pytest.fixture(scope="session")
def sampled_g14(gaussian):
    """Gaussian sampled at sigma=1, N=4 (the workhorse scale)."""
    return pd.sample_kernel(gaussian, 1.0, 4)


def dense_operator(sampled: pd.SampledKernel, grid_len: int) -> np.ndarray:
    """Independent dense build of the grid convolution operator.

    Assembled entry by entry from the banded taps, sharing no code with the
    package's sparse constructor.
    """
    taps = sampled.banded_taps()
    R = (len(taps) - 1) // 2
    G = np.zeros((grid_len, grid_len))
    for row in range(grid_len):
        for col in range(grid_len):
            k = row - col
            if -R <= k <= R:
                G[row, col] = taps[k + R]
    return G


def reference_l1_objective(y: np.ndarray, sampled: pd.SampledKernel,
                           delta: float) -> float:
    """Independent oracle for the l1 deconvolution optimum.

    Models the problem directly (norm1 objective and residual constraint) in
    cvxpy and solves with CLARABEL; shares neither the LP reformulation nor
    the solver with the production path.
    """
    import cvxpy as cp

    L = len(y)
    G = dense_operator(sampled, L)
    x = cp.Variable(L)
    if delta == 0.0:
        constraints = [G @ x == y]
    else:
        constraints = [cp.norm1(y - G @ x) <= delta]
    prob = cp.Problem(cp.Minimize(cp.norm1(x)), constraints)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"oracle failed: {prob.status}")
    return float(prob.value)


def make_spikes(locations, amplitudes, grid_len) -> pd.SpikeTrain:
    return pd.SpikeTrain(np.asarray(locations), np.asarray(amplitudes), grid_len)
