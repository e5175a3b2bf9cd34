"""Monte Carlo ensembles of the nonlinear P_D under Gaussian pose perturbations.

Random numbers
--------------
Each run ``i`` draws from its own PCG64 stream seeded by
``numpy.random.SeedSequence([seed, i])``. Uniform doubles come from
``Generator.random`` (53-bit, top bits of a 64-bit PCG64 output) and are turned
into standard normals with the Box-Muller transform

    r = sqrt(-2 ln(1 - u1)),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)

consuming uniforms in pairs ``(u1, u2)`` and emitting ``z0, z1`` in that order.
Runs are therefore independent and can be evaluated in any order; the
result is always assembled in run-index order.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .detection import nadir_mask, pd_batch
from .errors import DimensionMismatch, ValidationError
from .geometry import AircraftState, RadarSite
from .jacobians import PoseCovariance
from .rcs import RcsModel

MAX_RESAMPLE_ROUNDS = 1000


@dataclass(frozen=True)
class UncertaintyLevel:
    sigma_pa: float
    sigma_ang: float  # rad
    label: str = "custom"

    def __post_init__(self):
        if not (self.sigma_pa >= 0 and self.sigma_ang >= 0):
            raise ValidationError("uncertainty", f"std devs must be >= 0, got {self}")
        if self.label not in ("low", "medium", "high", "custom"):
            raise ValidationError("uncertainty.label", f"unknown label {self.label!r}")

    @classmethod
    def preset(cls, label: str) -> "UncertaintyLevel":
        try:
            sigma_pa, sigma_ang_deg = PRESETS[label]
        except KeyError:
            raise ValidationError("uncertainty.levels", f"unknown level {label!r}") from None
        return cls(sigma_pa, math.radians(sigma_ang_deg), label)

    @property
    def std(self) -> np.ndarray:
        return np.array([self.sigma_pa] * 3 + [self.sigma_ang] * 3)

    def covariance(self) -> PoseCovariance:
        return PoseCovariance.block_diagonal(self.sigma_pa, self.sigma_ang)


# label -> (position std dev in m, angle std dev in degrees)
PRESETS = {"low": (0.1, 0.1), "medium": (10.0, 1.0), "high": (100.0, 2.0)}


def run_generator(seed: int, run_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, run_index])))


def box_muller(rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` standard normals from pairs of uniforms, see the module docstring."""
    pairs = (count + 1) // 2
    u = rng.random(2 * pairs).reshape(pairs, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)]).ravel()[:count]


def sample_perturbed_state(nominal: AircraftState, level: UncertaintyLevel,
                           rng_state: np.random.Generator) -> AircraftState:
    return nominal.perturbed(box_muller(rng_state, 6) * level.std)


@dataclass
class EnsembleResult:
    theta_r_deg: np.ndarray
    nominal_pd: np.ndarray
    mc_pd: np.ndarray  # (runs, sweep points)
    run_count: int
    rng_seed: int
    resampled: int = 0
    mean: np.ndarray = field(init=False)
    std: np.ndarray = field(init=False)
    min: np.ndarray = field(init=False)
    max: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.mc_pd.shape != (self.run_count, self.theta_r_deg.size):
            raise DimensionMismatch(f"mc_pd shape {self.mc_pd.shape} does not match "
                                    f"{self.run_count} runs x {self.theta_r_deg.size} points")
        self.mean = self.mc_pd.mean(axis=0)
        self.std = self.mc_pd.std(axis=0, ddof=1) if self.run_count > 1 else np.zeros_like(self.mean)
        self.min = self.mc_pd.min(axis=0)
        self.max = self.mc_pd.max(axis=0)

    @property
    def deviations(self) -> np.ndarray:
        return self.mc_pd - self.nominal_pd

    def max_abs_deviation(self) -> tuple[float, float]:
        """Largest ``|P_D - nominal|`` over the ensemble and the theta_r (deg) where it occurs."""
        dev = np.abs(self.deviations)
        _, k = np.unravel_index(np.argmax(dev), dev.shape)
        return float(dev.max()), float(self.theta_r_deg[k])

    def to_csv(self) -> str:
        """Raw ensemble as CSV text with columns ``run, theta_r_deg, p_d``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run", "theta_r_deg", "p_d"])
        thetas = [repr(float(t)) for t in self.theta_r_deg]
        for i, row in enumerate(self.mc_pd):
            for t, p in zip(thetas, row.tolist()):
                w.writerow([i, t, repr(p)])
        return buf.getvalue()


def _draw_run(nominal_states: np.ndarray, radar: RadarSite, model: RcsModel,
              level: UncertaintyLevel, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    k = nominal_states.shape[0]
    states = nominal_states + box_muller(rng, 6 * k).reshape(k, 6) * level.std
    resampled = 0
    if model.uses_angles:
        for _ in range(MAX_RESAMPLE_ROUNDS):
            bad = np.flatnonzero(nadir_mask(states, radar))
            if bad.size == 0:
                break
            resampled += bad.size
            states[bad] = nominal_states[bad] + box_muller(rng, 6 * bad.size).reshape(-1, 6) * level.std
        else:
            raise RuntimeError("could not draw perturbations away from the nadir singularity")
    return pd_batch(states, radar, model), resampled


def run_ensemble(sweep, radar: RadarSite, model: RcsModel, level: UncertaintyLevel,
                 runs: int, seed: int) -> EnsembleResult:
    """Perturb every sweep point independently in each run and evaluate P_D."""
    if runs < 1:
        raise ValidationError("montecarlo.runs", f"must be >= 1, got {runs}")
    if seed < 0:
        raise ValidationError("montecarlo.seed", f"must be >= 0, got {seed}")
    nominal_states = sweep.nominal_states()
    nominal_pd = pd_batch(nominal_states, radar, model)
    mc = np.empty((runs, nominal_states.shape[0]))
    resampled = 0
    for i in range(runs):
        mc[i], n_bad = _draw_run(nominal_states, radar, model, level, run_generator(seed, i))
        resampled += n_bad
    return EnsembleResult(theta_r_deg=sweep.theta_r_deg(), nominal_pd=nominal_pd, mc_pd=mc,
                          run_count=runs, rng_seed=seed, resampled=resampled)


@dataclass(frozen=True)
class CoverageReport:
    per_k: np.ndarray
    aggregate: float
    worst_k: int
    worst_fraction: float


def coverage_check(result: EnsembleResult, sigma_pd_per_k) -> CoverageReport:
    """Fraction of runs with ``|P_D - nominal| <= 3 sigma_pd`` at each sweep point."""
    sigma = np.asarray(sigma_pd_per_k, dtype=float)
    if sigma.shape != result.nominal_pd.shape:
        raise DimensionMismatch(f"sigma_pd has shape {sigma.shape}, "
                                f"expected {result.nominal_pd.shape}")
    inside = np.abs(result.deviations) <= 3.0 * sigma
    per_k = inside.mean(axis=0)
    worst = int(np.argmin(per_k))
    return CoverageReport(per_k=per_k, aggregate=float(inside.mean()), worst_k=worst,
                          worst_fraction=float(per_k[worst]))


def sample_skewness(x) -> float:
    """Adjusted Fisher-Pearson skewness G1; 0 for a constant sample."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        raise ValueError("skewness needs at least 3 samples")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        return 0.0
    g1 = np.mean(d ** 3) / m2 ** 1.5
    return float(g1 * math.sqrt(n * (n - 1)) / (n - 2))


@dataclass(frozen=True)
class HistogramComparison:
    theta_r_deg: float
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    gaussian_density: np.ndarray
    nominal_pd: float
    sigma_pd: float
    skewness: float
    mean_bias: float  # ensemble mean - nominal


def histogram_vs_gaussian(result: EnsembleResult, k_index: int, sigma_pd: float) -> HistogramComparison:
    """Freedman-Diaconis histogram of the ensemble at one sweep point beside N(nominal, sigma_pd^2)."""
    x = result.mc_pd[:, k_index]
    if x.size < 100:
        raise ValueError(f"histogram comparison needs >= 100 samples, got {x.size}")
    lo, hi = max(0.0, float(x.min())), min(1.0, float(x.max()))
    if hi > lo:
        edges = np.histogram_bin_edges(x, bins="fd", range=(lo, hi))
    else:
        edges = np.array([lo - 0.5e-12, hi + 0.5e-12])
    counts, _ = np.histogram(x, bins=edges)
    widths = np.diff(edges)
    density = counts / (x.size * widths)
    centers = 0.5 * (edges[:-1] + edges[1:])
    mu = float(result.nominal_pd[k_index])
    if sigma_pd > 0:
        gauss = np.exp(-0.5 * ((centers - mu) / sigma_pd) ** 2) / (sigma_pd * math.sqrt(2 * math.pi))
    else:
        gauss = np.full(centers.shape, np.nan)
    return HistogramComparison(
        theta_r_deg=float(result.theta_r_deg[k_index]), edges=edges, counts=counts,
        density=density, gaussian_density=gauss, nominal_pd=mu, sigma_pd=float(sigma_pd),
        skewness=sample_skewness(x), mean_bias=float(x.mean() - mu),
    )
