"""Spike trains, separation checking, pulse-stream synthesis, demodulation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.signal import firwin

from .kernels import SampledKernel

__all__ = [
    "SpikeTrain",
    "Measurements",
    "L1Budget",
    "GaussianSNR",
    "NoiseSpec",
    "FilterSpec",
    "check_separation",
    "synthesize",
    "demodulate",
]


@dataclass(frozen=True)
class SpikeTrain:
    """Sparse signal: strictly increasing integer locations with nonzero amplitudes."""

    locations: np.ndarray
    amplitudes: np.ndarray
    grid_len: int

    def __post_init__(self):
        locs = np.asarray(self.locations, dtype=np.int64)
        amps = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "amplitudes", amps)
        if locs.shape != amps.shape or locs.ndim != 1:
            raise ValueError("locations and amplitudes must be 1-d and equal length")
        if len(locs) and (np.any(locs < 0) or np.any(locs >= self.grid_len)):
            raise ValueError("spike locations must lie in [0, grid_len)")
        if len(locs) > 1 and np.any(np.diff(locs) <= 0):
            raise ValueError("spike locations must be strictly increasing")
        if np.any(amps == 0.0):
            raise ValueError("zero amplitudes must not be stored")

    def __len__(self) -> int:
        return len(self.locations)

    def to_dense(self) -> np.ndarray:
        x = np.zeros(self.grid_len)
        x[self.locations] = self.amplitudes
        return x

    @classmethod
    def from_dense(cls, x: np.ndarray, floor: float = 0.0) -> "SpikeTrain":
        x = np.asarray(x, dtype=float)
        idx = np.nonzero(np.abs(x) > floor)[0]
        return cls(idx, x[idx], len(x))

    def to_json_dict(self) -> dict:
        return {
            "grid_len": int(self.grid_len),
            "locations": [int(k) for k in self.locations],
            "amplitudes": [float(c) for c in self.amplitudes],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpikeTrain":
        return cls(np.asarray(d["locations"]), np.asarray(d["amplitudes"]),
                   int(d["grid_len"]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value"])
            for k, c in zip(self.locations, self.amplitudes):
                w.writerow([int(k), repr(float(c))])


@dataclass(frozen=True)
class Measurements:
    """Sampled noisy pulse stream with its l1 noise budget."""

    y: np.ndarray
    delta: float
    sigma: float
    N: int

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def grid_len(self) -> int:
        return len(self.y)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value"])
            for k, v in enumerate(self.y):
                w.writerow([k, repr(float(v))])

    @classmethod
    def read_csv(cls, path, delta: float, sigma: float, N: int) -> "Measurements":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows and rows[0][:2] == ["index", "value"]:
            rows = rows[1:]
        y = np.empty(len(rows))
        for row in rows:
            y[int(row[0])] = float(row[1])
        return cls(y, delta, sigma, N)

    def to_json_dict(self) -> dict:
        return {
            "delta": float(self.delta),
            "sigma": float(self.sigma),
            "N": int(self.N),
            "y": [float(v) for v in self.y],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


@dataclass(frozen=True)
class L1Budget:
    """Noise with an exact l1 norm: Gaussian shape rescaled so ||eta||_1 = delta."""

    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")


@dataclass(frozen=True)
class GaussianSNR:
    """White Gaussian noise scaled to an exact signal-to-noise ratio in dB."""

    snr_db: float

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")


NoiseSpec = Union[L1Budget, GaussianSNR]


def check_separation(spikes: SpikeTrain, nu: float, sigma: float, N: int) -> bool:
    """True iff all pairwise spike gaps are >= N*nu*sigma (vacuous below 2 spikes)."""
    if nu <= 0 or sigma <= 0:
        raise ValueError("nu and sigma must be positive")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if len(spikes) < 2:
        return True
    return bool(np.min(np.diff(spikes.locations)) >= N * nu * sigma)


def _conv_same(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Centered convolution cropped to len(x), for odd-length taps of any size.

    out[k] = sum_m x[m] * taps[k - m + R]; np.convolve's 'same' mode keys the
    output length to the longer input, which is the taps whenever the
    conservative truncation radius exceeds the grid.
    """
    R = (len(taps) - 1) // 2
    return np.convolve(x, taps)[R:R + len(x)]


def _draw_noise(noise: NoiseSpec, clean: np.ndarray, rng) -> np.ndarray:
    if isinstance(noise, L1Budget):
        if noise.delta == 0.0:
            return np.zeros_like(clean)
        eta = rng.standard_normal(len(clean))
        eta *= noise.delta / np.sum(np.abs(eta))
        # rounding can leave the realized norm a few ulp above the budget
        while np.sum(np.abs(eta)) > noise.delta:
            eta *= noise.delta / np.sum(np.abs(eta))
        return eta
    if isinstance(noise, GaussianSNR):
        p_sig = float(np.mean(clean ** 2))
        if p_sig == 0.0:
            raise ValueError("cannot set an SNR against an all-zero signal")
        eta = rng.standard_normal(len(clean))
        target = p_sig / 10.0 ** (noise.snr_db / 10.0)
        return eta * np.sqrt(target / np.mean(eta ** 2))
    raise TypeError(f"unsupported noise spec: {noise!r}")


def synthesize(spikes: SpikeTrain, kernel: SampledKernel, noise: NoiseSpec,
               rng=None, delta_mode: str = "noise_l1") -> Measurements:
    """Convolve a spike train with the sampled kernel and add noise.

    The returned delta is the realized noise budget: ``noise_l1`` records
    ||eta||_1 (the quantity the recovery guarantees are stated for);
    ``filtered_noise_l1`` records ||eta * g||_1 instead, mirroring setups
    where the budget is measured after the pulse-shaping filter.

    Spikes must keep one effective kernel radius clear of the grid edges so
    no pulse is truncated.
    """
    if delta_mode not in ("noise_l1", "filtered_noise_l1"):
        raise ValueError(f"unknown delta_mode {delta_mode!r}")
    margin = kernel.effective_radius
    if spikes.grid_len < 2 * margin + 1:
        raise ValueError(
            f"grid of length {spikes.grid_len} cannot hold a pulse of "
            f"effective radius {margin}"
        )
    if len(spikes) and (spikes.locations.min() < margin
                        or spikes.locations.max() >= spikes.grid_len - margin):
        raise ValueError(
            f"spikes must stay {margin} samples clear of the grid edges"
        )

    # the banded taps are the same operator the recovery matrix uses, so a
    # noiseless synthesis stays exactly representable (exact recovery at
    # zero budget is meaningful)
    taps = kernel.banded_taps()
    clean = _conv_same(spikes.to_dense(), taps)
    if rng is None:
        rng = np.random.default_rng()
    eta = _draw_noise(noise, clean, rng)
    if delta_mode == "noise_l1":
        delta = float(np.sum(np.abs(eta)))
    else:
        delta = float(np.sum(np.abs(_conv_same(eta, taps))))
    return Measurements(clean + eta, delta, kernel.sigma, kernel.N)


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass FIR design for demodulation: Hamming windowed-sinc.

    numtaps=None sizes the filter for >= 60 dB stopband at the transition
    width carrier - cutoff.
    """

    cutoff_hz: float
    numtaps: int | None = None

    def design(self, sample_hz: float, carrier_hz: float) -> np.ndarray:
        nyq = sample_hz / 2.0
        if self.cutoff_hz >= nyq:
            raise ValueError(
                f"cutoff {self.cutoff_hz} must lie below Nyquist {nyq}"
            )
        if self.cutoff_hz <= 0:
            raise ValueError("cutoff must be positive")
        n = self.numtaps
        if n is None:
            transition = max(carrier_hz - self.cutoff_hz, self.cutoff_hz / 2.0)
            n = int(np.ceil(3.3 * sample_hz / transition))
        if n % 2 == 0:
            n += 1
        return firwin(n, self.cutoff_hz, fs=sample_hz, window="hamming")


def demodulate(rf: np.ndarray, carrier_hz: float, sample_hz: float,
               fir: FilterSpec) -> np.ndarray:
    """Mix an RF trace down to baseband and low-pass it.

    Multiplies by the carrier and applies the FIR; a tone A*cos(2*pi*f*t)
    comes out as a constant ~A/2 away from the edges (the image at 2f is
    rejected by the filter, the half-amplitude factor is not compensated).
    """
    if carrier_hz >= sample_hz / 2.0:
        raise ValueError("carrier must lie below Nyquist")
    rf = np.asarray(rf, dtype=float)
    h = fir.design(sample_hz, carrier_hz)
    t = np.arange(len(rf)) / sample_hz
    mixed = rf * np.cos(2.0 * np.pi * carrier_hz * t)
    return _conv_same(mixed, h)
