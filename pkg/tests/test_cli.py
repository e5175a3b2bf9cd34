import csv
import json
import subprocess
import sys

import pytest

from pdsense.cli import main

SMALL = "sweep.theta_r_step_deg = 10\nuncertainty.levels = medium\n"


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return str(p)


def test_eval_json(capsys):
    assert main(["eval", "--theta-r", "20", "--level", "high", "--model", "constant"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["model"] == "constant" and out["level"] == "high"
    assert out["a_phi"] == 0.0 and out["three_sigma_pd"] < 0.01
    assert out["state"][2] == -3000.0


def test_sweep_files(tmp_path, small_config):
    out = tmp_path / "out"
    assert main(["sweep", "--config", small_config, "--model", "spikeball", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "sweep_spikeball_medium.csv")))
    assert len(rows) == 19
    assert json.loads((out / "sweep_spikeball_medium.json").read_text())[3]["p_d"] == float(rows[3]["p_d"])
    assert (out / "FIGURES.md").exists()


def test_montecarlo_files(tmp_path, small_config):
    out = tmp_path / "mc"
    assert main(["montecarlo", "--config", small_config, "--runs", "120", "--seed", "3", "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert "ensemble_ellipsoid_medium.csv" in names
    assert "coverage_ellipsoid_medium.json" in names
    assert "histogram_ellipsoid_medium_theta20.csv" in names
    cov = json.loads((out / "coverage_ellipsoid_medium.json").read_text())
    assert cov["runs"] == 120 and cov["seed"] == 3 and len(cov["per_k"]) == 19


def test_montecarlo_byte_identical(tmp_path, small_config):
    for d in ("a", "b"):
        assert main(["montecarlo", "--config", small_config, "--runs", "40", "--seed", "9",
                     "--out", str(tmp_path / d)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_gradcheck_exit_zero(capsys):
    assert main(["gradcheck", "--model", "ellipsoid", "--samples", "50", "--seed", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_gradcheck_exit_one(monkeypatch, capsys):
    import pdsense.scenario as sc
    monkeypatch.setattr(sc, "d_snr_d_sigma", lambda radar, r: 1.01 * radar.c_r / (sc_k() * r ** 4))
    assert main(["gradcheck", "--samples", "20"]) == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


def sc_k():
    from pdsense.detection import BOLTZMANN
    return BOLTZMANN


@pytest.mark.parametrize("argv", [
    ["eval", "--config", "/nonexistent/file.cfg"],
    ["eval", "--theta-r", "400"],
    ["eval", "--level", "custom"],
    ["gradcheck", "--samples", "0"],
    ["montecarlo", "--runs", "0", "--out", "/tmp/unused"],
])
def test_config_errors_exit_two(argv, capsys):
    assert main(argv) == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_file_exit_two(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("radar.gain = 1\n")
    assert main(["eval", "--config", str(p)]) == 2
    assert "radar.gain" in capsys.readouterr().err


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "pdsense.cli", "eval", "--theta-r", "90"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["theta_r_deg"] == 90.0
