import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdsense.detection import (
    BOLTZMANN,
    erfc,
    evaluate_point,
    pd_batch,
    probability_of_detection,
    snr,
)
from pdsense.errors import InvalidPfa, NadirSingularity, ZeroRange
from pdsense.geometry import AircraftState, RadarSite, aspect_angles, radar_in_body, range_to_radar
from pdsense.rcs import Constant, Ellipsoid, SimpleSpikeball, rcs_value
from pdsense.scenario import SweepSpec

ORACLE = json.loads((Path(__file__).parent / "data" / "erfc_oracle.json").read_text())["points"]
P_FA = 1.7e-4


@pytest.mark.parametrize("row", ORACLE, ids=lambda r: f"z={r['z']:.3f}")
def test_erfc_against_table(row):
    ref = float(row["erfc"])
    assert abs(erfc(row["z"]) - ref) <= 1e-12 * ref


def test_erfc_vectorized_matches_table():
    z = np.array([r["z"] for r in ORACLE])
    ref = np.array([float(r["erfc"]) for r in ORACLE])
    assert np.all(np.abs(erfc(z) - ref) <= 1e-12 * ref)


def test_erfc_special_values():
    assert erfc(0.0) == 1.0
    assert erfc(1.0) == pytest.approx(0.157299207050285, rel=1e-14)
    assert erfc(np.inf) == 0.0 and erfc(-np.inf) == 2.0
    assert math.isnan(erfc(np.nan))
    assert erfc(30.0) < 1e-300


@given(st.floats(-8, 8))
def test_erfc_reflection(z):
    assert erfc(z) == pytest.approx(2.0 - erfc(-z), abs=4e-16)


@given(st.floats(-8, 8))
def test_erfc_close_to_math(z):
    assert erfc(z) == pytest.approx(math.erfc(z), rel=1e-13, abs=1e-300)


def test_snr_table_values():
    radar = RadarSite()
    expected = 167.4 * 0.2 / (1.38e-23 * 650000.0 ** 4)
    assert snr(radar, 0.2, 650000.0) == expected
    assert snr(radar, 0.4, 650000.0) == pytest.approx(2 * expected, rel=1e-15)
    assert snr(radar, 0.2, 1300000.0) == pytest.approx(expected / 16, rel=1e-15)
    assert BOLTZMANN == 1.38e-23


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_snr_zero_range(r):
    with pytest.raises(ZeroRange):
        snr(RadarSite(), 0.2, r)


def test_pd_at_w_zero_is_half():
    s = -math.log(P_FA) - 0.5
    assert s == pytest.approx(8.1797, abs=1e-4)
    assert probability_of_detection(s, P_FA) == pytest.approx(0.5, abs=1e-15)


def test_pd_zero_snr():
    ref = 0.5 * math.erfc(math.sqrt(-math.log(P_FA)) - math.sqrt(0.5))
    assert probability_of_detection(0.0, P_FA) == pytest.approx(ref, rel=1e-13)


def test_pd_large_snr_tends_to_one():
    assert probability_of_detection(1e6, P_FA) == 1.0


@pytest.mark.parametrize("p_fa", [0.0, 1.0, -0.1, 2.0])
def test_invalid_pfa(p_fa):
    with pytest.raises(InvalidPfa):
        probability_of_detection(1.0, p_fa)


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_pd_monotone_in_snr(a, b):
    lo, hi = sorted((a, b))
    assert probability_of_detection(lo, P_FA) <= probability_of_detection(hi, P_FA)


@given(st.floats(1e3, 2e6), st.floats(1e3, 2e6))
def test_pd_monotone_in_range(a, b):
    near, far = sorted((a, b))
    radar = RadarSite()
    assert probability_of_detection(snr(radar, 0.2, near), P_FA) >= \
        probability_of_detection(snr(radar, 0.2, far), P_FA)


@given(st.floats(0, 1e8))
def test_pd_in_unit_interval(s):
    assert 0.0 <= probability_of_detection(s, P_FA) <= 1.0


@pytest.mark.parametrize("model", [Constant(), Ellipsoid(), SimpleSpikeball()], ids=lambda m: m.kind)
def test_evaluate_point_matches_hand_chain(model):
    radar = RadarSite()
    state = AircraftState(123e3, 456e3, -3000, 0.1, -0.2, 0.7)
    pt = evaluate_point(state, radar, model)
    angles = aspect_angles(radar_in_body(state, radar)) if model.uses_angles else None
    r = range_to_radar(state, radar)
    sig = rcs_value(model, angles)
    s = snr(radar, sig, r)
    assert (pt.range_m, pt.sigma_r, pt.snr) == (r, sig, s)
    assert pt.p_d == probability_of_detection(s, radar.p_fa)
    assert pt.w == math.sqrt(-math.log(radar.p_fa)) - math.sqrt(s + 0.5)


def test_evaluate_point_errors():
    radar = RadarSite()
    with pytest.raises(ZeroRange):
        evaluate_point(AircraftState(0, 0, 0), radar, Constant())
    with pytest.raises(NadirSingularity):
        evaluate_point(AircraftState(0, 0, -3000), radar, Ellipsoid())
    # constant model needs no aspect, so nadir is fine
    assert evaluate_point(AircraftState(0, 0, -3000), radar, Constant()).p_d == pytest.approx(1.0)


def test_constant_pd_flat_over_sweep():
    pd = pd_batch(SweepSpec().nominal_states(), RadarSite(), Constant())
    assert np.ptp(pd) < 1e-14


@pytest.mark.parametrize("model", [Constant(), Ellipsoid(), SimpleSpikeball()], ids=lambda m: m.kind)
def test_batch_matches_scalar(model):
    radar = RadarSite()
    states = SweepSpec(theta_r_step=15).nominal_states()
    states[:, 3:] = [0.05, -0.1, 0.3]
    batch = pd_batch(states, radar, model)
    for x, p in zip(states, batch):
        assert p == pytest.approx(evaluate_point(AircraftState.from_array(x), radar, model).p_d, rel=1e-13)
