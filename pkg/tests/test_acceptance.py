"""End-to-end acceptance checks at the reference scenario (1000 runs, seed 0).

Each test prints one ``criterion N PASS/FAIL`` line; the lines are also collected
into a summary section at the end of the pytest run.
"""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from pdsense.cli import main
from pdsense.detection import erfc, pd_batch
from pdsense.montecarlo import UncertaintyLevel, run_ensemble, sample_skewness
from pdsense.scenario import ScenarioConfig, gradcheck, linear_sweep, validate_sweep

KINDS = ("constant", "ellipsoid", "spikeball")
RUNS = 1000
SEED = 0
BASE = ScenarioConfig()


@pytest.fixture(scope="module")
def medium():
    """Medium-level validation for each model, with wall time."""
    out = {}
    for kind in KINDS:
        cfg = ScenarioConfig(model=BASE.with_model(kind).model, levels=(UncertaintyLevel.preset("medium"),))
        t0 = time.perf_counter()
        rep = validate_sweep(cfg, runs=RUNS, seed=SEED)
        out[kind] = (rep.levels["medium"], time.perf_counter() - t0)
    return out


@pytest.fixture(scope="module")
def high_ensembles():
    lvl = UncertaintyLevel.preset("high")
    return {kind: run_ensemble(BASE.sweep, BASE.radar, BASE.with_model(kind).model, lvl, RUNS, SEED)
            for kind in ("ellipsoid", "spikeball")}


def nominal(kind):
    return pd_batch(BASE.sweep.nominal_states(), BASE.radar, BASE.with_model(kind).model)


def test_01_gradient_oracle(acceptance_report):
    lines, ok = [], True
    t0 = time.perf_counter()
    for kind in KINDS:
        rep = gradcheck(BASE.with_model(kind), 1000, SEED)
        ok &= rep.passed and rep.checked > 0
        lines.append(f"{kind} max a_p err {rep.block_errors['a_p']:.1e} over {rep.checked}, excluded {rep.excluded}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 10.0
    acceptance_report(1, "A_P matches central differences < 1e-6", ok,
                      "; ".join(lines) + f"; {elapsed:.1f} s for all models")
    assert ok


def test_02_constant_variability(acceptance_report, medium):
    lv, elapsed = medium["constant"]
    dev, _ = lv.ensemble.max_abs_deviation()
    ok = dev < 0.002 and elapsed < 60.0
    acceptance_report(2, "constant RCS max |P_D - nominal| < 0.002", ok, f"{dev:.2e}, {elapsed:.1f} s")
    assert ok


def test_03_ellipsoid_span(acceptance_report):
    pd = nominal("ellipsoid")
    ok = pd.min() < 0.05 and 0.6 <= pd.max() <= 0.8
    acceptance_report(3, "ellipsoid nominal min < 0.05, max in [0.6, 0.8]", ok,
                      f"min {pd.min():.4f}, max {pd.max():.4f}")
    assert ok


def test_04_spikeball_span(acceptance_report):
    pd = nominal("spikeball")
    ok = 0.15 <= pd.min() <= 0.35 and 0.8 <= pd.max() <= 0.97
    acceptance_report(4, "spikeball nominal min in [0.15, 0.35], max in [0.8, 0.97]", ok,
                      f"min {pd.min():.4f}, max {pd.max():.4f}")
    assert ok


def test_05_ellipsoid_spread(acceptance_report, medium):
    dev, at = medium["ellipsoid"][0].ensemble.max_abs_deviation()
    ok = 0.03 <= dev <= 0.08
    acceptance_report(5, "ellipsoid medium max deviation in [0.03, 0.08]", ok, f"{dev:.4f} at {at:g} deg")
    assert ok


def test_06_spikeball_spread(acceptance_report, medium):
    dev, at = medium["spikeball"][0].ensemble.max_abs_deviation()
    near = min(abs(at - c) for c in (0.0, 90.0, 180.0))
    ok = 0.08 <= dev <= 0.15 and near <= 2.0
    acceptance_report(6, "spikeball medium max deviation in [0.08, 0.15] within 2 deg of 0/90/180", ok,
                      f"{dev:.4f} at {at:g} deg")
    assert ok


def test_07_coverage(acceptance_report, medium):
    fracs = {kind: medium[kind][0].coverage.aggregate for kind in KINDS}
    ok = all(f >= 0.985 for f in fracs.values())
    acceptance_report(7, "3-sigma coverage >= 0.985 for all models", ok,
                      ", ".join(f"{k} {v:.4f}" for k, v in fracs.items()))
    assert ok


def test_08_sensitivity_magnitudes(acceptance_report):
    peak = {}
    for kind in KINDS:
        lin = linear_sweep(BASE.with_model(kind))
        peak[kind] = {lv.label: 3 * float(lin.sigma_pd(lv.label).max()) for lv in BASE.levels}
    ok = (peak["ellipsoid"]["high"] > 0.1 and peak["spikeball"]["high"] > 0.2
          and all(v < 0.01 for v in peak["constant"].values()))
    acceptance_report(8, "high 3-sigma > 0.1 ellipsoid, > 0.2 spikeball; constant < 0.01", ok,
                      f"ellipsoid {peak['ellipsoid']['high']:.4f}, spikeball {peak['spikeball']['high']:.4f}, "
                      f"constant max {max(peak['constant'].values()):.2e}")
    assert ok


def test_09_skew_direction(acceptance_report, high_ensembles):
    sweep = BASE.sweep
    stats = {}
    for kind, theta in (("ellipsoid", 2.0), ("spikeball", 90.0), ("ellipsoid", 20.0), ("spikeball", 20.0)):
        ens = high_ensembles[kind]
        k = sweep.index_of(theta)
        x = ens.mc_pd[:, k]
        stats[(kind, theta)] = (sample_skewness(x), float(x.mean() - ens.nominal_pd[k]))
    biased = all(stats[key][0] < 0 and stats[key][1] < 0 for key in (("ellipsoid", 2.0), ("spikeball", 90.0)))
    symmetric = all(abs(stats[key][0]) < 0.3 for key in (("ellipsoid", 20.0), ("spikeball", 20.0)))
    ok = biased and symmetric
    acceptance_report(9, "negative skew and bias at 2 deg / 90 deg, |skew| < 0.3 at 20 deg", ok,
                      "; ".join(f"{k} {t:g} deg skew {s:+.3f} bias {b:+.2e}" for (k, t), (s, b) in stats.items()))
    assert ok


def test_10_erfc_oracle(acceptance_report):
    rows = json.loads((Path(__file__).parent / "data" / "erfc_oracle.json").read_text())["points"]
    z = np.array([r["z"] for r in rows])
    ref = np.array([float(r["erfc"]) for r in rows])
    rel = np.abs(erfc(z) - ref) / ref
    ok = len(rows) == 50 and z.min() == -6.0 and z.max() == 6.0 and rel.max() <= 1e-12
    acceptance_report(10, "erfc within 1e-12 relative on 50 points in [-6, 6]", ok, f"max rel err {rel.max():.1e}")
    assert ok


def test_11_determinism(acceptance_report, tmp_path):
    for d in ("first", "second"):
        assert main(["montecarlo", "--runs", "100", "--seed", str(SEED), "--out", str(tmp_path / d)]) == 0
    csvs = sorted(p.name for p in (tmp_path / "first").glob("*.csv"))
    same = all((tmp_path / "first" / n).read_bytes() == (tmp_path / "second" / n).read_bytes() for n in csvs)
    ok = same and "ensemble_ellipsoid_medium.csv" in csvs
    acceptance_report(11, "montecarlo CSV output byte-identical for equal seeds", ok, f"{len(csvs)} CSV files compared")
    assert ok
