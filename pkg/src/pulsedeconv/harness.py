"""Config-driven randomized experiment runner.

Each trial draws an evenly spaced spike train with random amplitudes and
signs, synthesizes a noisy pulse stream at a target SNR, recovers it with the
configured methods, and records localization/false-detection metrics next to
the theoretical bounds.  Outputs are deterministic for a fixed config+seed:
per-trial seeds derive from the master seed by (cell, trial) spawn keys and
records are sorted before emission, so execution order (including the
optional process pool, capped by PULSEDECONV_THREADS) cannot affect them.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from .baselines import MusicConfig, OmpConfig, music_deconvolution, omp_deconvolution
from .kernels import kernel_by_name, sample_kernel, verify_admissibility
from .metrics import (
    check_lemma21,
    compute_bounds,
    far_false_amplitude,
    localization_error,
    partition_near_far,
)
from .recovery import RecoveryProblem, convolution_matrix, solve_l1_deconvolution
from .signals import GaussianSNR, L1Budget, Measurements, SpikeTrain, synthesize

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "run_experiment",
    "aggregate",
    "emit_outputs",
    "TRIALS_CSV_COLUMNS",
    "SUMMARY_CSV_COLUMNS",
]

TRIALS_CSV_COLUMNS = [
    "snr_db", "separation", "sigma", "method", "trial", "spike_index",
    "true_loc", "true_amp", "nearest_est_loc", "loc_error", "delta",
    "l1_err", "l1_bound", "loc_bound", "far_amp", "far_bound",
    "lemma21_lhs", "lemma21_bound", "violation_flags",
]

SUMMARY_CSV_COLUMNS = [
    "snr_db", "separation", "sigma", "method", "n_trials", "n_spikes",
    "mean_loc_error", "std_loc_error", "miss_count", "mean_far_amp",
    "violation_count",
]

_METHODS = ("l1", "omp", "music")


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: str = "gaussian"
    sigma: tuple = (1.0,)
    N: int = 4
    grid_len: int = 2048
    spike_count: int = 10
    separation: tuple = (1.1, 1.5, 2.0)   # in units of sigma*N
    amplitude_range: tuple = (5.0, 10.0)
    snr_db: tuple = (15.0, 20.0, 25.0, 30.0, 35.0)
    trials: int = 20
    seed: int = 0
    methods: tuple = ("l1",)
    delta_mode: str = "eta_l1"            # or "eta_conv_g_l1"
    trunc_tol: float = 1e-6
    solver_tol: float = 1e-8
    # optional RF stage: pulses modulated onto a carrier, demodulated before
    # recovery; {"carrier": cycles/sample < 0.5, "cutoff": cycles/sample}
    rf: dict | None = None

    def __post_init__(self):
        for name in ("sigma", "separation", "methods", "amplitude_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        # null snr entries mean a noiseless cell
        object.__setattr__(
            self, "snr_db",
            tuple(float("inf") if v is None else float(v) for v in self.snr_db),
        )
        if self.rf is not None:
            carrier = self.rf.get("carrier")
            cutoff = self.rf.get("cutoff")
            if not (carrier and cutoff and 0 < cutoff < carrier < 0.5):
                raise ValueError(
                    "rf needs 0 < cutoff < carrier < 0.5 (cycles/sample)"
                )
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sigma or not self.separation or not self.snr_db:
            raise ValueError("sigma, separation and snr_db lists must be nonempty")
        if self.delta_mode not in ("eta_l1", "eta_conv_g_l1"):
            raise ValueError(f"unknown delta_mode {self.delta_mode!r}")
        bad = set(self.methods) - set(_METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")
        lo, hi = self.amplitude_range
        if not 0 < lo <= hi:
            raise ValueError("amplitude_range must satisfy 0 < lo <= hi")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls(**json.load(fh))

    def to_json(self) -> str:
        d = {k: (list(v) if isinstance(v, tuple) else v)
             for k, v in self.__dict__.items()}
        return json.dumps(d, indent=2, sort_keys=True)


@dataclass(frozen=True)
class TrialRecord:
    snr_db: float
    separation: float
    sigma: float
    method: str
    trial: int
    seed: str
    truth: SpikeTrain
    estimate: SpikeTrain
    delta: float
    loc_errors: np.ndarray
    l1_err: float
    far_amp: float
    lemma21_lhs: float
    l1_bound: float
    loc_bounds: np.ndarray
    far_bound: float
    lemma21_bound: float
    nearest_est: np.ndarray
    violations: tuple = field(default=())


def _make_truth(cfg: ExperimentConfig, sigma: float, separation: float,
                margin: int, rng) -> SpikeTrain:
    spacing = int(np.ceil(separation * sigma * cfg.N))
    # real (in-phase) demodulation scales a spike at j by cos(2*pi*f*j), so
    # the RF mode keeps reflectors aligned to the carrier period
    snap = 1
    if cfg.rf is not None:
        period = 1.0 / cfg.rf["carrier"]
        if abs(period - round(period)) > 1e-9:
            raise ValueError("rf carrier must divide the sample rate evenly")
        snap = int(round(period))
        spacing = int(np.ceil(spacing / snap)) * snap
    span = (cfg.spike_count - 1) * spacing
    lo = -(-margin // snap)                                   # ceil in units
    hi = (cfg.grid_len - 1 - margin - span) // snap
    if hi < lo:
        raise ValueError(
            f"{cfg.spike_count} spikes at spacing {spacing} do not fit a grid "
            f"of {cfg.grid_len} with margin {margin}"
        )
    start = snap * int(rng.integers(lo, hi + 1))
    locs = start + np.arange(cfg.spike_count) * spacing
    lo, hi = cfg.amplitude_range
    amps = rng.uniform(lo, hi, cfg.spike_count) * rng.choice([-1.0, 1.0],
                                                             cfg.spike_count)
    return SpikeTrain(locs, amps, cfg.grid_len)


_SHARED_CACHE: dict = {}


def _shared(cfg: ExperimentConfig, sigma: float):
    key = (cfg.kernel, sigma, cfg.N, cfg.grid_len, cfg.trunc_tol)
    if key not in _SHARED_CACHE:
        kernel = kernel_by_name(cfg.kernel)
        report = verify_admissibility(kernel)
        sampled = sample_kernel(kernel, sigma, cfg.N, cfg.trunc_tol)
        G = convolution_matrix(sampled, cfg.grid_len)
        _SHARED_CACHE[key] = (kernel, report, sampled, G)
    return _SHARED_CACHE[key]


def _estimate(method: str, meas, sampled, cfg: ExperimentConfig,
              truth: SpikeTrain, G) -> SpikeTrain:
    if method == "l1":
        problem = RecoveryProblem(meas, sampled, meas.delta,
                                  solver_tol=cfg.solver_tol)
        sol = solve_l1_deconvolution(problem, G=G)
        if sol.support:
            locs, amps = zip(*sol.support)
            return SpikeTrain(np.asarray(locs), np.asarray(amps), cfg.grid_len)
        return SpikeTrain(np.empty(0, dtype=np.int64), np.empty(0), cfg.grid_len)
    if method == "omp":
        return omp_deconvolution(meas, sampled, OmpConfig(max_atoms=len(truth)))
    if method == "music":
        locs = music_deconvolution(meas, sampled,
                                   MusicConfig(model_order=len(truth)))
        amps = np.full(len(locs), np.nan)
        return SpikeTrain(locs, amps, cfg.grid_len)
    raise ValueError(f"unknown method {method!r}")


def _rf_stage(truth: SpikeTrain, sampled, rf: dict, noise, rng) -> "Measurements":
    """Modulate the pulse train onto a carrier, add noise, demodulate.

    The returned measurements carry the full baseband perturbation (filtered
    noise plus demodulation imperfections) as their budget, so the recovery
    guarantees stay conditioned on an exact ||eta||_1 <= delta.
    """
    from .signals import FilterSpec, demodulate
    from .signals import _conv_same, _draw_noise

    taps = sampled.banded_taps()
    rb = (len(taps) - 1) // 2
    carrier = rf["carrier"]
    mod = taps * np.cos(2.0 * np.pi * carrier * np.arange(-rb, rb + 1))
    clean_rf = _conv_same(truth.to_dense(), mod)
    eta = _draw_noise(noise, clean_rf, rng)
    fir = FilterSpec(cutoff_hz=rf["cutoff"], numtaps=rf.get("numtaps"))
    baseband = 2.0 * demodulate(clean_rf + eta, carrier, 1.0, fir)
    clean = _conv_same(truth.to_dense(), taps)
    delta = float(np.sum(np.abs(baseband - clean)))
    return Measurements(baseband, delta, sampled.sigma, sampled.N)


def _run_cell_trial(cfg: ExperimentConfig, cell_index: int, sigma: float,
                    separation: float, snr_db: float, trial: int) -> list:
    kernel, report, sampled, G = _shared(cfg, sigma)
    rng = np.random.default_rng(
        np.random.SeedSequence(cfg.seed, spawn_key=(cell_index, trial))
    )
    margin = sampled.effective_radius
    truth = _make_truth(cfg, sigma, separation, margin, rng)
    noise = L1Budget(0.0) if np.isinf(snr_db) else GaussianSNR(snr_db)
    if cfg.rf is not None:
        meas = _rf_stage(truth, sampled, cfg.rf, noise, rng)
    else:
        mode = "noise_l1" if cfg.delta_mode == "eta_l1" else "filtered_noise_l1"
        meas = synthesize(truth, sampled, noise, rng=rng, delta_mode=mode)
    g0 = float(kernel.eval(0.0, 0))
    bounds = compute_bounds(report, sigma, cfg.N, meas.delta, truth, g0)
    partition = partition_near_far(truth, report.epsilon, sigma, cfg.N)

    records = []
    for method in cfg.methods:
        est = _estimate(method, meas, sampled, cfg, truth, G)
        loc = localization_error(truth, est)
        nearest = np.full(len(truth), -1, dtype=np.int64)
        if len(est):
            j = np.abs(truth.locations[:, None] - est.locations[None, :]).argmin(axis=1)
            nearest = est.locations[j]
        has_amps = len(est) == 0 or np.all(np.isfinite(est.amplitudes))
        if has_amps:
            l1_err = float(np.sum(np.abs(est.to_dense() - truth.to_dense())))
            far = far_false_amplitude(est, partition)
            lemma = check_lemma21(truth, est, partition, bounds.weighted_d2_bound)
            lhs = lemma["lhs"]
        else:
            l1_err, far, lhs = np.nan, np.nan, np.nan

        violations = []
        if method == "l1" and cfg.delta_mode == "eta_l1":
            # solver-precision allowance, needed when delta = 0 makes every
            # bound exactly zero while the LP leaves ~1e-9 dust
            tol = 1e-6
            if l1_err > bounds.l1_bound + tol:
                violations.append("l1")
            if far > bounds.far_amp_bound + tol:
                violations.append("far")
            if lhs > bounds.weighted_d2_bound + tol:
                violations.append("lemma21")
            defined = bounds.defined_mask()
            if np.any(loc[defined] > bounds.loc_bound_per_spike[defined] + tol):
                violations.append("loc")

        records.append(TrialRecord(
            snr_db=snr_db, separation=separation, sigma=sigma, method=method,
            trial=trial, seed=f"{cfg.seed}:{cell_index}:{trial}",
            truth=truth, estimate=est, delta=meas.delta,
            loc_errors=loc, l1_err=l1_err, far_amp=far, lemma21_lhs=lhs,
            l1_bound=bounds.l1_bound, loc_bounds=bounds.loc_bound_per_spike,
            far_bound=bounds.far_amp_bound,
            lemma21_bound=bounds.weighted_d2_bound,
            nearest_est=nearest, violations=tuple(violations),
        ))
    return records


def _worker(args) -> list:
    return _run_cell_trial(*args)


def run_experiment(config: ExperimentConfig) -> list:
    """Run every (sigma, separation, snr) cell for the configured trial count.

    Aborts before any trial if the kernel fails its admissibility check.
    Worker count comes from PULSEDECONV_THREADS (default 1, serial).
    """
    kernel = kernel_by_name(config.kernel)
    report = verify_admissibility(kernel)
    if not report.passed:
        raise RuntimeError(
            f"kernel {config.kernel!r} failed admissibility: "
            f"{report.to_json()}"
        )

    cells = list(product(config.sigma, config.separation, config.snr_db))
    tasks = [
        (config, ci, sigma, sep, snr, t)
        for ci, (sigma, sep, snr) in enumerate(cells)
        for t in range(config.trials)
    ]
    workers = int(os.environ.get("PULSEDECONV_THREADS", "1") or "1")
    records: list = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_worker, tasks, chunksize=4):
                records.extend(batch)
    else:
        for task in tasks:
            records.extend(_worker(task))
    records.sort(key=lambda r: (r.sigma, r.separation, r.snr_db,
                                r.method, r.trial))
    return records


def aggregate(records: list) -> list:
    """Per-cell summary: detection-only mean/std of localization error,
    miss count, mean far amplitude, bound-violation count."""
    if not records:
        return []
    cells: dict = {}
    for r in records:
        cells.setdefault((r.sigma, r.separation, r.snr_db, r.method),
                         []).append(r)
    rows = []
    for (sigma, sep, snr, method), rs in sorted(cells.items()):
        errs = np.concatenate([r.loc_errors for r in rs]) if rs else np.empty(0)
        finite = errs[np.isfinite(errs)]
        far = np.asarray([r.far_amp for r in rs], dtype=float)
        far = far[np.isfinite(far)]
        rows.append({
            "snr_db": snr,
            "separation": sep,
            "sigma": sigma,
            "method": method,
            "n_trials": len(rs),
            "n_spikes": int(errs.size),
            "mean_loc_error": float(np.mean(finite)) if finite.size else np.nan,
            "std_loc_error": float(np.std(finite)) if finite.size else np.nan,
            "miss_count": int(np.sum(~np.isfinite(errs))),
            "mean_far_amp": float(np.mean(far)) if far.size else np.nan,
            "violation_count": int(sum(len(r.violations) for r in rs)),
        })
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf"
        return repr(v)
    return str(v)


def emit_outputs(records: list, summary: list, outdir,
                 plots: bool = True) -> list:
    """Write trials.csv (one row per trial per true spike), summary.csv, and
    (optionally) SVG figures.  Returns the written paths."""
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        paths = []

        trials_path = outdir / "trials.csv"
        with open(trials_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRIALS_CSV_COLUMNS)
            for r in records:
                flags = ";".join(r.violations)
                for i in range(len(r.truth)):
                    near = r.nearest_est[i]
                    w.writerow([
                        _fmt(r.snr_db), _fmt(r.separation), _fmt(r.sigma),
                        r.method, r.trial, i,
                        int(r.truth.locations[i]),
                        _fmt(float(r.truth.amplitudes[i])),
                        "" if near < 0 else int(near),
                        _fmt(float(r.loc_errors[i])),
                        _fmt(r.delta), _fmt(r.l1_err), _fmt(r.l1_bound),
                        _fmt(float(r.loc_bounds[i])),
                        _fmt(r.far_amp), _fmt(r.far_bound),
                        _fmt(r.lemma21_lhs), _fmt(r.lemma21_bound),
                        flags,
                    ])
        paths.append(trials_path)

        summary_path = outdir / "summary.csv"
        with open(summary_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SUMMARY_CSV_COLUMNS)
            for row in summary:
                w.writerow([_fmt(row[c]) for c in SUMMARY_CSV_COLUMNS])
        paths.append(summary_path)

        if plots and summary:
            from .plots import render_figures

            paths.extend(render_figures(summary, outdir))
        return paths
    except OSError as exc:
        raise OSError(f"failed writing outputs under {outdir}: {exc}") from exc
