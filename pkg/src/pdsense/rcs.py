"""Radar cross section models as functions of the body-frame aspect angles."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateModel, ValidationError
from .geometry import AspectAngles


@dataclass(frozen=True)
class Constant:
    """Aspect-independent RCS ``c_c`` (m^2)."""

    c_c: float = 0.2

    kind = "constant"
    uses_angles = False

    def __post_init__(self):
        if not (math.isfinite(self.c_c) and self.c_c > 0):
            raise ValidationError("model.c_c", f"must be > 0, got {self.c_c}")

    def sigma(self, lam, phi):
        return np.full(np.broadcast(lam, phi).shape, float(self.c_c))


@dataclass(frozen=True)
class Ellipsoid:
    """Ellipsoid RCS with axis lengths ``a`` (forward), ``b`` (side), ``c`` (up), in metres."""

    a: float = 0.25
    b: float = 0.15
    c: float = 0.17

    kind = "ellipsoid"
    uses_angles = True

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"model.{name}", f"must be > 0, got {v}")

    def denominator(self, lam, phi):
        sl, cl = np.sin(lam), np.cos(lam)
        sp, cp = np.sin(phi), np.cos(phi)
        return (self.a * sl * cp) ** 2 + (self.b * sl * sp) ** 2 + (self.c * cl) ** 2

    def sigma(self, lam, phi):
        d = self.denominator(lam, phi)
        if np.any(d <= 0):
            raise DegenerateModel("ellipsoid denominator vanished")
        return math.pi * (self.a * self.b * self.c) ** 2 / d ** 2


@dataclass(frozen=True)
class SimpleSpikeball:
    """Lobed RCS ``|a_s sin(n lam / 2)| + b_s``; independent of elevation."""

    a_s: float = 0.2
    b_s: float = 0.15
    n: int = 4

    kind = "spikeball"
    uses_angles = True

    def __post_init__(self):
        if not (math.isfinite(self.a_s) and self.a_s >= 0):
            raise ValidationError("model.a_s", f"must be >= 0, got {self.a_s}")
        if not (math.isfinite(self.b_s) and self.b_s > 0):
            raise ValidationError("model.b_s", f"must be > 0, got {self.b_s}")
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError("model.n", f"must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if self.n % 2:
            warnings.warn(f"spikeball with odd lobe count n={self.n} is discontinuous at lambda = pi",
                          stacklevel=3)

    def sigma(self, lam, phi):
        lam = np.asarray(lam, dtype=float)
        out = np.abs(self.a_s * np.sin(0.5 * self.n * lam)) + self.b_s
        return np.broadcast_to(out, np.broadcast(lam, phi).shape).copy()


RcsModel = Union[Constant, Ellipsoid, SimpleSpikeball]

MODEL_KINDS = {"constant": Constant, "ellipsoid": Ellipsoid, "spikeball": SimpleSpikeball}


def rcs_value(model: RcsModel, angles: AspectAngles | None) -> float:
    """RCS in m^2 at the given aspect; ``angles`` may be None for the constant model."""
    if not model.uses_angles:
        return float(model.c_c)
    return float(model.sigma(angles.lam, angles.phi))
