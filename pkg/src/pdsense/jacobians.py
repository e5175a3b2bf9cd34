"""Analytic partial derivatives of P_D with respect to the aircraft pose.

The row Jacobian is assembled as the chain

    A_P = dP/dS * (dS/dR * dR/dx + dS/dsigma * dsigma/d(lam, phi) * d(lam, phi)/dp_b * dp_b/dx)

and propagated to a P_D variance with ``C_PD = A_P C_xx A_P^T``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import BOLTZMANN, _w
from .errors import InvalidCovariance, NadirSingularity, ZeroRange
from .geometry import (
    EPS_NADIR,
    AircraftState,
    AspectAngles,
    BodyVector,
    RadarSite,
    aspect_angles,
    dcm_ned_to_body,
    radar_in_body,
    range_to_radar,
)
from .rcs import Constant, Ellipsoid, RcsModel, SimpleSpikeball

EPS_CORNER = 1e-9
GIMBAL_COS = 1e-6
NEAR_NADIR_RATIO = 1e-6  # horizontal / slant body distance that raises the near-nadir flag

STATE_LABELS = ("p_an", "p_ae", "p_ad", "phi_a", "theta_a", "psi_a")


@dataclass(frozen=True)
class PoseCovariance:
    """6x6 pose covariance, ordered like the state vector."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (6, 6) or not np.all(np.isfinite(m)):
            raise InvalidCovariance(f"expected a finite 6x6 matrix, got shape {m.shape}")
        scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise InvalidCovariance("covariance is not symmetric")
        sym = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(sym)[0] < -1e-10 * max(np.trace(sym), 0.0):
            raise InvalidCovariance("covariance is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def block_diagonal(cls, sigma_pa: float, sigma_ang: float) -> "PoseCovariance":
        """``sigma_pa^2 I_3`` on position and ``sigma_ang^2 I_3`` (rad^2) on attitude."""
        return cls(np.diag([sigma_pa ** 2] * 3 + [sigma_ang ** 2] * 3))


@dataclass(frozen=True)
class PdJacobian:
    row: np.ndarray
    near_nadir: bool = False
    near_gimbal_lock: bool = False
    near_rcs_corner: bool = False

    @property
    def valid(self) -> bool:
        return not (self.near_nadir or self.near_gimbal_lock or self.near_rcs_corner)

    def delta_pd(self, delta_x) -> float:
        """First-order P_D change for a pose perturbation."""
        return float(self.row @ np.asarray(delta_x, dtype=float))


@dataclass(frozen=True)
class PdVariance:
    c_pd: float
    sigma_pd: float


def d_pd_d_snr(snr: float, p_fa: float) -> float:
    w = _w(snr, p_fa)
    return float(np.exp(-w * w) / (2.0 * math.sqrt(math.pi) * math.sqrt(snr + 0.5)))


def d_snr_d_range(radar: RadarSite, sigma_r: float, range_m: float) -> float:
    if range_m <= 0:
        raise ZeroRange(f"range must be positive, got {range_m}")
    return -radar.c_r * 4.0 * sigma_r / (BOLTZMANN * range_m ** 5)


def d_range_d_state(state: AircraftState, radar: RadarSite) -> np.ndarray:
    diff = state.position - radar.position
    r = float(np.linalg.norm(diff))
    if r <= 0:
        raise ZeroRange("aircraft is at the radar position")
    return np.concatenate([diff / r, np.zeros(3)])


def d_snr_d_sigma(radar: RadarSite, range_m: float) -> float:
    if range_m <= 0:
        raise ZeroRange(f"range must be positive, got {range_m}")
    return radar.c_r / (BOLTZMANN * range_m ** 4)


def _dcm_body_to_ned_partials(angles: np.ndarray) -> np.ndarray:
    """d(body-to-NED DCM)/d(roll, pitch, yaw), shape (3, 3, 3)."""
    cf, sf = math.cos(angles[0]), math.sin(angles[0])
    ct, st = math.cos(angles[1]), math.sin(angles[1])
    cp, sp = math.cos(angles[2]), math.sin(angles[2])
    d_roll = [[0.0, sf * sp + cf * cp * st, cf * sp - sf * cp * st],
              [0.0, -sf * cp + cf * sp * st, -cf * cp - sf * sp * st],
              [0.0, cf * ct, -sf * ct]]
    d_pitch = [[-cp * st, cp * sf * ct, cf * cp * ct],
               [-sp * st, sf * sp * ct, cf * sp * ct],
               [-ct, -sf * st, -cf * st]]
    d_yaw = [[-sp * ct, -cf * cp - sf * sp * st, sf * cp - cf * sp * st],
             [cp * ct, -cf * sp + sf * cp * st, sf * sp + cf * cp * st],
             [0.0, 0.0, 0.0]]
    return np.array([d_roll, d_pitch, d_yaw])


def d_body_d_state(state: AircraftState, radar: RadarSite) -> np.ndarray:
    """3x6 Jacobian of the body-frame radar vector.

    Position block is ``-R_n^b``. Since ``R_n^b`` is the transpose of the
    body-to-NED DCM ``M``, the attitude column for angle j is
    ``(dM/dangle_j)^T (p_r - p_a)``. Roll is the last rotation applied, so the
    (x, roll) entry of the attitude block is identically 0.
    """
    p_delta = radar.position - state.position
    dm = _dcm_body_to_ned_partials(state.angles)
    attitude = np.einsum("jki,k->ij", dm, p_delta)
    return np.hstack([-dcm_ned_to_body(state), attitude])


def d_angles_d_body(b: BodyVector) -> np.ndarray:
    """2x3 Jacobian of ``(lam, phi)`` with respect to the body-frame radar vector."""
    x, y, z = b.p_rx, b.p_ry, b.p_rz
    h2 = x * x + y * y
    if h2 < EPS_NADIR ** 2:
        raise NadirSingularity(f"radar on the body z axis: {b}")
    h = math.sqrt(h2)
    r2 = h2 + z * z
    alpha = r2 * h
    return np.array([
        [-y / h2, x / h2, 0.0],
        [-x * z / alpha, -y * z / alpha, h / r2],
    ])


def d_rcs_d_angles(model: RcsModel, angles: AspectAngles) -> tuple[float, float, bool]:
    """``(dsigma/dlam, dsigma/dphi, at_corner)`` for the given model.

    ``at_corner`` is set only for the spikeball when ``|sin(n lam / 2)|`` falls
    below EPS_CORNER, where the derivative does not exist; sign(0) = 0 there.
    """
    lam, phi = angles.lam, angles.phi
    if isinstance(model, Constant):
        return 0.0, 0.0, False
    if isinstance(model, Ellipsoid):
        a, b, c = model.a, model.b, model.c
        d = float(model.denominator(lam, phi))
        num = 2.0 * math.pi * (a * b * c) ** 2
        # kappa carries -c^2: dD/dlam = sin(2 lam) (a^2 cos^2 phi + b^2 sin^2 phi - c^2)
        kappa = a * a * math.cos(phi) ** 2 + b * b * math.sin(phi) ** 2 - c * c
        d_lam = -num * math.sin(2.0 * lam) * kappa / d ** 3
        d_phi = -num * (b * b - a * a) * math.sin(lam) ** 2 * math.sin(2.0 * phi) / d ** 3
        return d_lam, d_phi, False
    if isinstance(model, SimpleSpikeball):
        half = 0.5 * model.n * lam
        s = model.a_s * math.sin(half)
        corner = abs(math.sin(half)) < EPS_CORNER
        sign = 0.0 if corner else math.copysign(1.0, s)
        return 0.5 * model.n * model.a_s * math.cos(half) * sign, 0.0, corner
    raise TypeError(f"unknown RCS model {model!r}")


def assemble_a_p(state: AircraftState, radar: RadarSite, model: RcsModel) -> PdJacobian:
    r = range_to_radar(state, radar)
    if r <= 0:
        raise ZeroRange("aircraft is at the radar position")
    near_gimbal = abs(math.cos(state.theta_a)) < GIMBAL_COS
    near_nadir = False
    corner = False
    if model.uses_angles:
        b = radar_in_body(state, radar)
        angles = aspect_angles(b)
        d_lam, d_phi, corner = d_rcs_d_angles(model, angles)
        near_nadir = math.hypot(b.p_rx, b.p_ry) < NEAR_NADIR_RATIO * float(np.linalg.norm(b.as_array()))
        sigma_r = float(model.sigma(angles.lam, angles.phi))
        d_sigma_d_x = np.array([d_lam, d_phi]) @ d_angles_d_body(b) @ d_body_d_state(state, radar)
    else:
        sigma_r = float(model.c_c)
        d_sigma_d_x = np.zeros(6)
    s = radar.c_r * sigma_r / (BOLTZMANN * r ** 4)
    row = d_pd_d_snr(s, radar.p_fa) * (
        d_snr_d_range(radar, sigma_r, r) * d_range_d_state(state, radar)
        + d_snr_d_sigma(radar, r) * d_sigma_d_x
    )
    return PdJacobian(row=row, near_nadir=near_nadir, near_gimbal_lock=near_gimbal,
                      near_rcs_corner=corner)


def propagate_variance(a_p: PdJacobian, c_xx: PoseCovariance) -> PdVariance:
    row = np.asarray(a_p.row, dtype=float)
    c = float(row @ c_xx.matrix @ row)
    if c < 0:
        if c < -1e-18:
            raise RuntimeError(f"negative P_D variance {c} from a validated covariance")
        c = 0.0
    return PdVariance(c_pd=c, sigma_pd=math.sqrt(c))
