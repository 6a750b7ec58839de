"""Command-line interface: run experiments, recover spike trains, build and
verify certificates, locate the minimal separation, run the baselines."""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .baselines import MusicConfig, OmpConfig, music_deconvolution, omp_deconvolution
from .certificate import build_certificate, empirical_min_separation, verify_certificate
from .harness import ExperimentConfig, aggregate, emit_outputs, run_experiment
from .kernels import kernel_by_name, sample_kernel, verify_admissibility
from .recovery import RecoveryProblem, solve_l1_deconvolution
from .signals import Measurements


def _add_kernel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", default="gaussian",
                   help="kernel family name (gaussian, cauchy)")
    p.add_argument("--sigma", type=float, default=1.0, help="kernel scale")
    p.add_argument("--N", type=int, default=4, help="samples per unit scale")
    p.add_argument("--trunc-tol", type=float, default=1e-6,
                   help="kernel truncation tolerance")


def _read_measurements(path: str, delta: float, sigma: float, N: int) -> Measurements:
    return Measurements.read_csv(path, delta=delta, sigma=sigma, N=N)


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json(args.config)
    records = run_experiment(config)
    summary = aggregate(records)
    paths = emit_outputs(records, summary, args.outdir, plots=not args.no_plots)
    print(json.dumps({
        "records": len(records),
        "cells": len(summary),
        "outputs": [str(p) for p in paths],
    }, indent=2))
    return 0


def _cmd_recover(args) -> int:
    kernel = kernel_by_name(args.kernel)
    sampled = sample_kernel(kernel, args.sigma, args.N, args.trunc_tol)
    meas = _read_measurements(args.input, args.delta, args.sigma, args.N)
    problem = RecoveryProblem(meas, sampled, args.delta, solver_tol=args.tol)
    sol = solve_l1_deconvolution(problem)
    with open(args.out_solution, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "x_hat"])
        for k, v in enumerate(sol.x_hat):
            w.writerow([k, repr(float(v))])
    with open(args.out_status, "w") as fh:
        fh.write(sol.status_json() + "\n")
    print(sol.status_json())
    return 0


def _parse_floats(text: str) -> np.ndarray:
    return np.asarray([float(v) for v in text.split(",") if v.strip() != ""])


def _cmd_certify(args) -> int:
    kernel = kernel_by_name(args.kernel)
    nodes = _parse_floats(args.nodes)
    signs = _parse_floats(args.signs)
    report = verify_admissibility(kernel)
    eps = args.epsilon if args.epsilon is not None else report.epsilon
    beta = args.beta if args.beta is not None else report.beta
    cert = build_certificate(nodes, signs, kernel, args.sigma)
    ver = verify_certificate(cert, eps, beta)
    dump = {"certificate": cert.to_json_dict(),
            "verification": ver.to_json_dict(),
            "epsilon": eps, "beta": beta}
    out = json.dumps(dump, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    print(out)
    return 0 if ver.passed else 1


def _cmd_find_nu(args) -> int:
    kernel = kernel_by_name(args.kernel)
    nu = empirical_min_separation(
        kernel, M=args.nodes, tol=args.tol,
        bracket=(args.bracket_lo, args.bracket_hi),
        n_random_patterns=args.random_patterns, seed=args.seed,
    )
    print(json.dumps({"kernel": args.kernel, "min_separation": nu,
                      "nodes": args.nodes, "tol": args.tol}, indent=2))
    return 0


def _cmd_omp(args) -> int:
    kernel = kernel_by_name(args.kernel)
    sampled = sample_kernel(kernel, args.sigma, args.N, args.trunc_tol)
    meas = _read_measurements(args.input, 0.0, args.sigma, args.N)
    cfg = OmpConfig(max_atoms=args.max_atoms, residual_tol=args.residual_tol)
    spikes = omp_deconvolution(meas, sampled, cfg)
    spikes.write_csv(args.out)
    print(json.dumps({"detected": len(spikes), "out": args.out}))
    return 0


def _cmd_music(args) -> int:
    kernel = kernel_by_name(args.kernel)
    sampled = sample_kernel(kernel, args.sigma, args.N, args.trunc_tol)
    meas = _read_measurements(args.input, 0.0, args.sigma, args.N)
    cfg = MusicConfig(model_order=args.model_order,
                      deconv_regularization=args.regularization,
                      hankel_rows=args.hankel_rows)
    locs = music_deconvolution(meas, sampled, cfg)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for k in locs:
            w.writerow([int(k), 1.0])
    print(json.dumps({"detected": len(locs), "out": args.out}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsedeconv",
        description="Sparse deconvolution of pulse streams by l1 minimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a config-driven experiment sweep")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--outdir", required=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("recover", help="solve the l1 deconvolution program")
    _add_kernel_args(p)
    p.add_argument("--input", required=True, help="measurement CSV (index,value)")
    p.add_argument("--delta", type=float, required=True, help="l1 noise budget")
    p.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    p.add_argument("--out-solution", default="solution.csv")
    p.add_argument("--out-status", default="status.json")
    p.set_defaults(fn=_cmd_recover)

    p = sub.add_parser("certify", help="build and verify a dual certificate")
    p.add_argument("--kernel", default="gaussian")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--nodes", required=True, help="comma-separated node positions")
    p.add_argument("--signs", required=True, help="comma-separated +1/-1")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--out", default=None, help="write the JSON dump here")
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("find-nu", help="bisect the minimal certified separation")
    p.add_argument("--kernel", default="gaussian")
    p.add_argument("--nodes", type=int, default=8, help="node count M")
    p.add_argument("--tol", type=float, default=0.02, help="bisection resolution")
    p.add_argument("--bracket-lo", type=float, default=0.2)
    p.add_argument("--bracket-hi", type=float, default=2.5)
    p.add_argument("--random-patterns", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_find_nu)

    p = sub.add_parser("omp", help="orthogonal matching pursuit baseline")
    _add_kernel_args(p)
    p.add_argument("--input", required=True, help="measurement CSV (index,value)")
    p.add_argument("--max-atoms", type=int, required=True)
    p.add_argument("--residual-tol", type=float, default=1e-9)
    p.add_argument("--out", default="omp_spikes.csv")
    p.set_defaults(fn=_cmd_omp)

    p = sub.add_parser("music", help="subspace localization baseline")
    _add_kernel_args(p)
    p.add_argument("--input", required=True, help="measurement CSV (index,value)")
    p.add_argument("--model-order", type=int, required=True)
    p.add_argument("--regularization", type=float, default=1e-6)
    p.add_argument("--hankel-rows", type=int, default=128)
    p.add_argument("--out", default="music_locations.csv")
    p.set_defaults(fn=_cmd_music)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
