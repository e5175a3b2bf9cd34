"""Frames, the NED to body rotation, body-frame radar vector, aspect angles and range.

State vectors are ordered ``(p_an, p_ae, p_ad, phi_a, theta_a, psi_a)``: NED
position in metres followed by ZYX (yaw-pitch-roll) Euler angles in radians.
The array kernels here broadcast over leading axes so the Monte Carlo and
finite-difference code can push whole batches of poses through them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NadirSingularity, ValidationError

EPS_NADIR = 1e-9  # m, horizontal body-frame distance below which lambda is undefined


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(a, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def _check_finite(name: str, *values: float) -> None:
    if not all(math.isfinite(v) for v in values):
        raise ValidationError(name, f"entries must be finite, got {values}")


@dataclass(frozen=True)
class AircraftState:
    p_an: float
    p_ae: float
    p_ad: float
    phi_a: float = 0.0
    theta_a: float = 0.0
    psi_a: float = 0.0

    def __post_init__(self):
        vals = tuple(float(v) for v in (self.p_an, self.p_ae, self.p_ad,
                                         self.phi_a, self.theta_a, self.psi_a))
        _check_finite("AircraftState", *vals)
        names = ("p_an", "p_ae", "p_ad", "phi_a", "theta_a", "psi_a")
        for i, (name, v) in enumerate(zip(names, vals)):
            object.__setattr__(self, name, wrap_angle(v) if i >= 3 else v)

    @classmethod
    def from_array(cls, x) -> "AircraftState":
        x = np.asarray(x, dtype=float)
        if x.shape != (6,):
            raise ValidationError("AircraftState", f"expected 6 entries, got shape {x.shape}")
        return cls(*x.tolist())

    @property
    def position(self) -> np.ndarray:
        return np.array([self.p_an, self.p_ae, self.p_ad])

    @property
    def angles(self) -> np.ndarray:
        return np.array([self.phi_a, self.theta_a, self.psi_a])

    def as_array(self) -> np.ndarray:
        return np.array([self.p_an, self.p_ae, self.p_ad, self.phi_a, self.theta_a, self.psi_a])

    def perturbed(self, delta) -> "AircraftState":
        """Return ``self + delta`` for a 6-vector perturbation."""
        return AircraftState.from_array(self.as_array() + np.asarray(delta, dtype=float))


@dataclass(frozen=True)
class RadarSite:
    p_rn: float = 0.0
    p_re: float = 0.0
    p_rd: float = 0.0
    c_r: float = 167.4
    p_fa: float = 1.7e-4

    def __post_init__(self):
        _check_finite("RadarSite", self.p_rn, self.p_re, self.p_rd, self.c_r, self.p_fa)
        if not self.c_r > 0:
            raise ValidationError("radar.c_r", f"must be > 0, got {self.c_r}")
        if not 0 < self.p_fa < 1:
            raise ValidationError("radar.p_fa", f"must lie in (0, 1), got {self.p_fa}")

    @property
    def position(self) -> np.ndarray:
        return np.array([self.p_rn, self.p_re, self.p_rd], dtype=float)


@dataclass(frozen=True)
class BodyVector:
    p_rx: float
    p_ry: float
    p_rz: float

    def __post_init__(self):
        _check_finite("BodyVector", self.p_rx, self.p_ry, self.p_rz)

    def as_array(self) -> np.ndarray:
        return np.array([self.p_rx, self.p_ry, self.p_rz])


@dataclass(frozen=True)
class AspectAngles:
    lam: float
    phi: float

    def __post_init__(self):
        _check_finite("AspectAngles", self.lam, self.phi)
        if not -math.pi < self.lam <= math.pi:
            raise ValidationError("AspectAngles.lam", f"{self.lam} outside (-pi, pi]")
        if not -math.pi / 2 <= self.phi <= math.pi / 2:
            raise ValidationError("AspectAngles.phi", f"{self.phi} outside [-pi/2, pi/2]")


# --- array kernels ---------------------------------------------------------

def dcm_body_to_ned(angles) -> np.ndarray:
    """ZYX body-to-NED rotation for Euler angles ``(..., 3) = (roll, pitch, yaw)``."""
    angles = np.asarray(angles, dtype=float)
    cf, sf = np.cos(angles[..., 0]), np.sin(angles[..., 0])
    ct, st = np.cos(angles[..., 1]), np.sin(angles[..., 1])
    cp, sp = np.cos(angles[..., 2]), np.sin(angles[..., 2])
    rows = (
        (cp * ct, -cf * sp + cp * sf * st, sf * sp + cf * cp * st),
        (ct * sp, cf * cp + sf * sp * st, -cp * sf + cf * sp * st),
        (-st, ct * sf, cf * ct),
    )
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def dcm_from_euler(angles) -> np.ndarray:
    """NED-to-body rotation, the transpose of :func:`dcm_body_to_ned`."""
    return np.swapaxes(dcm_body_to_ned(angles), -1, -2)


def body_vectors(states, radar_pos) -> np.ndarray:
    """Radar position in the body frame for states of shape ``(..., 6)``."""
    states = np.asarray(states, dtype=float)
    delta = np.asarray(radar_pos, dtype=float) - states[..., :3]
    return np.einsum("...ij,...j->...i", dcm_from_euler(states[..., 3:]), delta)


def aspect_from_body(b):
    """Aspect angles ``(lam, phi)`` of body vectors ``(..., 3)``; no nadir guard."""
    b = np.asarray(b, dtype=float)
    horiz = np.hypot(b[..., 0], b[..., 1])
    lam = np.arctan2(b[..., 1], b[..., 0])
    # atan2 returns -pi for (negative x, -0.0 y); keep the (-pi, pi] convention
    lam = np.where(lam == -np.pi, np.pi, lam)
    phi = np.arctan2(b[..., 2], horiz)
    return lam, phi


def ranges(states, radar_pos) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    return np.linalg.norm(states[..., :3] - np.asarray(radar_pos, dtype=float), axis=-1)


# --- value-level operations -------------------------------------------------

def dcm_ned_to_body(state: AircraftState) -> np.ndarray:
    return dcm_from_euler(state.angles)


def radar_in_body(state: AircraftState, radar: RadarSite) -> BodyVector:
    return BodyVector(*body_vectors(state.as_array(), radar.position).tolist())


def aspect_angles(b: BodyVector) -> AspectAngles:
    if b.p_rx ** 2 + b.p_ry ** 2 < EPS_NADIR ** 2:
        raise NadirSingularity(f"radar on the body z axis: {b}")
    lam, phi = aspect_from_body(b.as_array())
    return AspectAngles(float(lam), float(phi))


def range_to_radar(state: AircraftState, radar: RadarSite) -> float:
    return float(ranges(state.as_array(), radar.position))

