"""Signal-to-noise ratio and single-pulse probability of detection.

``P_D = 0.5 * erfc(sqrt(-ln P_fa) - sqrt(S + 0.5))`` (North's approximation)
with ``S = c_r * sigma_r / (k R^4)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPfa, NadirSingularity, ZeroRange
from .geometry import (
    EPS_NADIR,
    AircraftState,
    AspectAngles,
    RadarSite,
    aspect_angles,
    aspect_from_body,
    body_vectors,
    radar_in_body,
    range_to_radar,
    ranges,
)
from .rcs import RcsModel, rcs_value

BOLTZMANN = 1.38e-23  # J/K, the rounded value used throughout the radar model

_SQRT_PI = math.sqrt(math.pi)
_ERFC_SPLIT = 1.5
_SERIES_TERMS = 60
_CF_DEPTH = 100


def erfc(z):
    """Complementary error function, float64, accepting scalars or arrays.

    |z| < 1.5 uses the positive-term Maclaurin series

        erf(z) = 2/sqrt(pi) * exp(-z^2) * sum_n (2 z^2)^n z / (1*3*...*(2n+1))

    truncated at 60 terms (remainder < 1e-25 at |z| = 1.5), then ``1 - erf``.
    |z| >= 1.5 uses the Laplace continued fraction

        erfc(z) = exp(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))

    evaluated bottom-up from a fixed depth of 100, with ``erfc(-z) = 2 - erfc(z)``
    for negative arguments. Both branches run a fixed number of steps so results
    do not depend on data-dependent stopping rules. Relative error is below
    1e-14 on [-6, 6] against a 40-digit reference.
    """
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    out = np.empty_like(z)

    small = az < _ERFC_SPLIT
    if np.any(small):
        x = z[small]
        two_x2 = 2.0 * x * x
        term = x.copy()
        total = x.copy()
        for n in range(1, _SERIES_TERMS):
            term = term * two_x2 / (2 * n + 1)
            total = total + term
        out[small] = 1.0 - (2.0 / _SQRT_PI) * np.exp(-x * x) * total

    large = ~small & np.isfinite(z)
    if np.any(large):
        x = az[large]
        f = x.copy()
        for m in range(_CF_DEPTH, 0, -1):
            f = x + (0.5 * m) / f
        tail = np.exp(-x * x) / (_SQRT_PI * f)
        out[large] = np.where(z[large] > 0, tail, 2.0 - tail)

    out[np.isposinf(z)] = 0.0
    out[np.isneginf(z)] = 2.0
    out[np.isnan(z)] = np.nan
    return out if out.ndim else float(out)


def _w(snr, p_fa):
    return np.sqrt(-np.log(p_fa)) - np.sqrt(np.asarray(snr, dtype=float) + 0.5)


def snr(radar: RadarSite, sigma_r, range_m):
    """``c_r * sigma_r / (k R^4)``; accepts arrays for ``sigma_r`` and ``range_m``."""
    r = np.asarray(range_m, dtype=float)
    if np.any(r <= 0):
        raise ZeroRange(f"range must be positive, got {range_m}")
    out = radar.c_r * np.asarray(sigma_r, dtype=float) / (BOLTZMANN * r ** 4)
    return out if out.ndim else float(out)


def probability_of_detection(snr, p_fa):
    if not 0 < p_fa < 1:
        raise InvalidPfa(f"p_fa must lie in (0, 1), got {p_fa}")
    out = 0.5 * erfc(_w(snr, p_fa))
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class DetectionPoint:
    range_m: float
    sigma_r: float
    snr: float
    w: float
    p_d: float
    angles: AspectAngles | None = None


def evaluate_point(state: AircraftState, radar: RadarSite, model: RcsModel) -> DetectionPoint:
    """Nonlinear detection chain at a single pose.

    Aspect angles are only formed for angle-dependent models, so the constant
    model stays defined when the radar sits straight below the aircraft.
    """
    r = range_to_radar(state, radar)
    if r <= 0:
        raise ZeroRange("aircraft is at the radar position")
    angles = aspect_angles(radar_in_body(state, radar)) if model.uses_angles else None
    sigma_r = rcs_value(model, angles)
    s = snr(radar, sigma_r, r)
    return DetectionPoint(
        range_m=r,
        sigma_r=sigma_r,
        snr=s,
        w=float(_w(s, radar.p_fa)),
        p_d=probability_of_detection(s, radar.p_fa),
        angles=angles,
    )


def nadir_mask(states, radar: RadarSite) -> np.ndarray:
    """True where the body-frame horizontal distance to the radar is below the nadir guard."""
    b = body_vectors(states, radar.position)
    return b[..., 0] ** 2 + b[..., 1] ** 2 < EPS_NADIR ** 2


def pd_batch(states, radar: RadarSite, model: RcsModel) -> np.ndarray:
    """P_D for a stack of 6-vector states ``(..., 6)``.

    Raises NadirSingularity if any pose needs an undefined aspect angle.
    """
    states = np.asarray(states, dtype=float)
    r = ranges(states, radar.position)
    if model.uses_angles:
        b = body_vectors(states, radar.position)
        if np.any(b[..., 0] ** 2 + b[..., 1] ** 2 < EPS_NADIR ** 2):
            raise NadirSingularity("batch contains a pose at the nadir singularity")
        lam, phi = aspect_from_body(b)
        sigma_r = model.sigma(lam, phi)
    else:
        sigma_r = np.full(r.shape, float(model.c_c))
    return np.asarray(probability_of_detection(snr(radar, sigma_r, r), radar.p_fa))
