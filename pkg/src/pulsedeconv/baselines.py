"""Greedy (OMP) and subspace (MUSIC) reference methods for spike localization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .kernels import SampledKernel
from .recovery import convolution_matrix
from .signals import Measurements, SpikeTrain

__all__ = [
    "OmpConfig",
    "MusicConfig",
    "omp_deconvolution",
    "music_deconvolution",
]


@dataclass(frozen=True)
class OmpConfig:
    max_atoms: int
    residual_tol: float = 1e-9

    def __post_init__(self):
        if self.max_atoms < 1:
            raise ValueError("max_atoms must be >= 1")


@dataclass(frozen=True)
class MusicConfig:
    model_order: int
    deconv_regularization: float = 1e-6
    hankel_rows: int = 128

    def __post_init__(self):
        if self.model_order < 0:
            raise ValueError("model_order must be >= 0")
        if self.deconv_regularization <= 0:
            raise ValueError("deconv_regularization must be positive")
        if self.model_order > self.hankel_rows:
            raise ValueError("model_order must not exceed hankel_rows")


def omp_deconvolution(y: Measurements, kernel: SampledKernel,
                      cfg: OmpConfig) -> SpikeTrain:
    """Orthogonal matching pursuit over all integer shifts of the kernel.

    Greedy max-correlation atom selection with a full least-squares re-fit of
    the selected atoms each iteration; stops at max_atoms, at residual_tol, or
    (with a warning) when the selected sub-dictionary loses rank.
    """
    L = y.grid_len
    G = convolution_matrix(kernel, L)
    norms = np.sqrt(np.asarray(G.power(2).sum(axis=0)).ravel())
    norms[norms == 0.0] = np.inf

    residual = y.y.copy()
    selected: list[int] = []
    amps = np.zeros(0)
    for _ in range(cfg.max_atoms):
        if np.linalg.norm(residual) <= cfg.residual_tol:
            break
        corr = np.abs(G.T @ residual) / norms
        corr[selected] = -np.inf
        k = int(np.argmax(corr))
        trial = selected + [k]
        sub = G[:, trial].toarray()
        sol, _, rank, _ = np.linalg.lstsq(sub, y.y, rcond=None)
        if rank < len(trial):
            warnings.warn(
                "selected sub-dictionary is rank deficient; "
                "stopping with the current estimate",
                RuntimeWarning,
            )
            break
        selected, amps = trial, sol
        residual = y.y - sub @ sol
    if not selected:
        return SpikeTrain(np.empty(0, dtype=np.int64), np.empty(0), L)

    keep = np.asarray(amps) != 0.0
    locs = np.asarray(selected, dtype=np.int64)[keep]
    vals = np.asarray(amps)[keep]
    order = np.argsort(locs)
    return SpikeTrain(locs[order], vals[order], L)


def _kernel_transfer(kernel: SampledKernel, L: int) -> np.ndarray:
    # circular embedding of the centered taps; wrap-around only matters at
    # the trunc_tol level so the spectral division is unaffected
    h = np.zeros(L)
    R = kernel.radius
    for k in range(-R, R + 1):
        tap = kernel.taps[k + R]
        if tap != 0.0:
            h[k % L] += tap
    return np.fft.fft(h)


def music_deconvolution(y: Measurements, kernel: SampledKernel,
                        cfg: MusicConfig) -> np.ndarray:
    """Subspace spike localization on the deconvolved spectrum.

    Tikhonov-regularized spectral division of y by the kernel transfer
    function turns the pulse stream into (approximately) a sum of complex
    exponentials across frequency; a Hankel matrix of that sequence yields a
    noise subspace whose pseudospectrum peaks at the spike locations.
    Returns the model_order strongest peak locations, sorted.
    """
    L = y.grid_len
    if cfg.model_order == 0:
        return np.empty(0, dtype=np.int64)
    if not np.any(y.y):
        warnings.warn("all-zero input has no signal subspace", RuntimeWarning)
        return np.empty(0, dtype=np.int64)

    Y = np.fft.fft(y.y)
    H = _kernel_transfer(kernel, L)
    hmax2 = float(np.max(np.abs(H)) ** 2)
    lam = cfg.deconv_regularization * hmax2
    Z = Y * np.conj(H) / (np.abs(H) ** 2 + lam)

    # keep the contiguous low-frequency band where the division is
    # informative (|H|^2 >= lam); outside it Tikhonov suppresses Z toward 0
    # and the junk rows would pollute the signal subspace
    shift = np.fft.fftshift(np.arange(L))
    Zs = Z[shift]
    strong = np.abs(H[shift]) ** 2 >= lam
    center = L // 2
    lo = hi = center
    while lo > 0 and strong[lo - 1]:
        lo -= 1
    while hi < L - 1 and strong[hi + 1]:
        hi += 1
    band = np.arange(lo, hi + 1)
    freqs = shift[band].astype(float)
    freqs[freqs >= L // 2 + L % 2] -= L   # signed frequency indices
    Zb = Zs[band]
    B = len(Zb)

    r = min(cfg.hankel_rows, B // 2)
    if r <= cfg.model_order:
        r = min(B - 1, cfg.model_order + 1)
    ncols = B - r + 1
    if r < 1 or ncols <= cfg.model_order:
        warnings.warn(
            "informative band too narrow for the requested model order",
            RuntimeWarning,
        )
        return np.empty(0, dtype=np.int64)
    idx = np.arange(r)[:, None] + np.arange(ncols)[None, :]
    Hk = Zb[idx]

    U, s, _ = np.linalg.svd(Hk, full_matrices=False)
    if s[0] == 0.0 or s[min(cfg.model_order, len(s)) - 1] / s[0] < 1e-12:
        warnings.warn(
            "model order exceeds the numerically significant rank",
            RuntimeWarning,
        )
    noise_space = U[:, cfg.model_order:]

    # pseudospectrum over all grid locations via steering vectors on the band
    steer = np.exp(-2j * np.pi * np.outer(freqs[:r], np.arange(L)) / L)
    proj = noise_space.conj().T @ steer
    denom = np.sum(np.abs(proj) ** 2, axis=0)
    pseudo = 1.0 / np.maximum(denom, 1e-300)

    interior = (pseudo >= np.roll(pseudo, 1)) & (pseudo > np.roll(pseudo, -1))
    peaks = np.nonzero(interior)[0]
    if len(peaks) < cfg.model_order:
        peaks = np.argsort(pseudo)[::-1][: cfg.model_order]
    top = peaks[np.argsort(pseudo[peaks])[::-1][: cfg.model_order]]
    return np.sort(top.astype(np.int64))
