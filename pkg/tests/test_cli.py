import json

import numpy as np
import pytest

import pulsedeconv as pd
from pulsedeconv.cli import main
from conftest import make_spikes


@pytest.fixture()
def meas_csv(tmp_path, sampled_g14):
    truth = make_spikes([60, 100, 140], [5.0, -7.0, 9.0], 256)
    meas = pd.synthesize(truth, sampled_g14, pd.L1Budget(0.0))
    path = tmp_path / "meas.csv"
    meas.write_csv(path)
    return path


def test_recover_outputs(tmp_path, meas_csv, capsys):
    sol = tmp_path / "sol.csv"
    status = tmp_path / "status.json"
    rc = main([
        "recover", "--input", str(meas_csv), "--kernel", "gaussian",
        "--sigma", "1.0", "--N", "4", "--delta", "0.0",
        "--out-solution", str(sol), "--out-status", str(status),
    ])
    assert rc == 0
    st = json.loads(status.read_text())
    assert st["status"] == "optimal"
    assert st["objective"] == pytest.approx(21.0, abs=1e-6)
    rows = sol.read_text().splitlines()
    assert rows[0] == "k,x_hat"
    assert len(rows) == 257


def test_certify_passing(capsys):
    rc = main([
        "certify", "--kernel", "gaussian", "--sigma", "1.0",
        "--nodes", "0,3.0", "--signs", "1,-1",
    ])
    out = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert out["verification"]["passed"]
    assert len(out["certificate"]["coeffs_a"]) == 2


def test_certify_failing_exit_code(capsys):
    rc = main([
        "certify", "--kernel", "gaussian", "--sigma", "1.0",
        "--nodes", "0,0.5", "--signs", "1,-1",
    ])
    assert rc == 1


def test_find_nu_quick(capsys):
    rc = main([
        "find-nu", "--kernel", "gaussian", "--nodes", "2", "--tol", "0.2",
        "--bracket-lo", "0.4", "--bracket-hi", "2.4", "--random-patterns", "0",
    ])
    out = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert 0.4 < out["min_separation"] < 2.4


def test_omp_cli(tmp_path, meas_csv):
    out = tmp_path / "omp.csv"
    rc = main([
        "omp", "--input", str(meas_csv), "--max-atoms", "3",
        "--out", str(out),
    ])
    assert rc == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "index,value"
    assert len(rows) == 4


def test_music_cli(tmp_path, meas_csv):
    out = tmp_path / "music.csv"
    rc = main([
        "music", "--input", str(meas_csv), "--model-order", "3",
        "--out", str(out),
    ])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 4


def test_run_cli(tmp_path):
    cfg = dict(kernel="gaussian", sigma=[1.0], N=4, grid_len=384,
               spike_count=3, separation=[2.0], snr_db=[25.0], trials=1,
               seed=3, methods=["l1"])
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main([
        "run", "--config", str(cfg_path), "--outdir", str(tmp_path / "out"),
    ])
    assert rc == 0
    assert (tmp_path / "out" / "trials.csv").exists()
    assert (tmp_path / "out" / "summary.csv").exists()
    assert (tmp_path / "out" / "loc_error_vs_snr.svg").exists()
