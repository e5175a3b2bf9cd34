"""Scenario configuration, theta_r sweeps, linearized sensitivity and validation runs.

Config files are flat ``key = value`` text with dotted names, ``#`` comments and
comma-separated lists. Angles are given in degrees and converted to radians
here; every other quantity is SI. Omitted keys take the reference-scenario defaults:

    radar.p_rn = 0            radar.p_re = 0           radar.p_rd = 0
    radar.c_r = 167.4         radar.p_fa = 1.7e-4
    model.kind = ellipsoid    # constant | ellipsoid | spikeball
    model.c_c = 0.2           model.a = 0.25  model.b = 0.15  model.c = 0.17
    model.a_s = 0.2           model.b_s = 0.15  model.n = 4
    sweep.theta_r_start_deg = 0   sweep.theta_r_end_deg = 180   sweep.theta_r_step_deg = 0.5
    sweep.range_m = 650000    sweep.down_m = -3000     sweep.heading_deg = 0
    uncertainty.levels = low, medium, high
    uncertainty.custom.sigma_pa = 0       uncertainty.custom.sigma_ang_deg = 0
    montecarlo.runs = 1000    montecarlo.seed = 0
    histogram.theta_r_deg = 2, 20
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .detection import evaluate_point, pd_batch, probability_of_detection, snr
from .errors import IndexOutOfRange, ParseError, ValidationError
from .geometry import (
    AircraftState,
    AspectAngles,
    BodyVector,
    RadarSite,
    aspect_from_body,
    body_vectors,
    ranges,
)
from .jacobians import (
    PdJacobian,
    PoseCovariance,
    assemble_a_p,
    d_angles_d_body,
    d_body_d_state,
    d_pd_d_snr,
    d_range_d_state,
    d_rcs_d_angles,
    d_snr_d_range,
    d_snr_d_sigma,
    propagate_variance,
)
from .montecarlo import (
    CoverageReport,
    EnsembleResult,
    UncertaintyLevel,
    coverage_check,
    histogram_vs_gaussian,
    run_ensemble,
)
from .rcs import MODEL_KINDS, Constant, Ellipsoid, RcsModel, SimpleSpikeball


@dataclass(frozen=True)
class SweepSpec:
    theta_r_start: float = 0.0  # deg
    theta_r_end: float = 180.0  # deg
    theta_r_step: float = 0.5  # deg
    nominal_range: float = 650e3  # m, horizontal
    nominal_down: float = -3000.0  # m
    nominal_heading: float = 0.0  # rad

    def __post_init__(self):
        if not self.theta_r_step > 0:
            raise ValidationError("sweep.theta_r_step_deg", f"must be > 0, got {self.theta_r_step}")
        if not self.nominal_range > 0:
            raise ValidationError("sweep.range_m", f"must be > 0, got {self.nominal_range}")
        if self.theta_r_end < self.theta_r_start:
            raise ValidationError("sweep.theta_r_end_deg", "must not be below theta_r_start_deg")

    def __len__(self) -> int:
        return int(math.floor((self.theta_r_end - self.theta_r_start) / self.theta_r_step + 1e-9)) + 1

    def theta_r_deg(self) -> np.ndarray:
        return self.theta_r_start + self.theta_r_step * np.arange(len(self))

    def nominal_states(self) -> np.ndarray:
        th = np.radians(self.theta_r_deg())
        k = th.size
        return np.column_stack([
            self.nominal_range * np.sin(th),
            self.nominal_range * np.cos(th),
            np.full(k, self.nominal_down),
            np.zeros(k), np.zeros(k), np.full(k, self.nominal_heading),
        ])

    def index_of(self, theta_r_deg: float) -> int:
        """Sweep index closest to ``theta_r_deg``."""
        k = int(round((theta_r_deg - self.theta_r_start) / self.theta_r_step))
        if not 0 <= k < len(self):
            raise IndexOutOfRange(f"theta_r = {theta_r_deg} deg lies outside the sweep")
        return k


def nominal_state_at(sweep: SweepSpec, k: int) -> AircraftState:
    if not 0 <= k < len(sweep):
        raise IndexOutOfRange(f"sweep index {k} outside [0, {len(sweep)})")
    return AircraftState.from_array(sweep.nominal_states()[k])


DEFAULT_LEVELS = ("low", "medium", "high")


@dataclass(frozen=True)
class ScenarioConfig:
    radar: RadarSite = field(default_factory=RadarSite)
    model: RcsModel = field(default_factory=Ellipsoid)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    levels: tuple = field(default_factory=lambda: tuple(UncertaintyLevel.preset(l) for l in DEFAULT_LEVELS))
    mc_runs: int = 1000
    seed: int = 0
    histogram_theta_r_deg: tuple = (2.0, 20.0)

    def __post_init__(self):
        if not self.levels:
            raise ValidationError("uncertainty.levels", "at least one level is required")
        if self.mc_runs < 1:
            raise ValidationError("montecarlo.runs", f"must be >= 1, got {self.mc_runs}")
        if self.seed < 0:
            raise ValidationError("montecarlo.seed", f"must be >= 0, got {self.seed}")

    def with_model(self, kind: str) -> "ScenarioConfig":
        return replace(self, model=MODEL_KINDS[kind]())

    def level(self, label: str) -> UncertaintyLevel:
        for lv in self.levels:
            if lv.label == label:
                return lv
        raise ValidationError("uncertainty.levels", f"level {label!r} is not configured")


# --- config parsing ---------------------------------------------------------

_FLOAT_KEYS = {
    "radar.p_rn", "radar.p_re", "radar.p_rd", "radar.c_r", "radar.p_fa",
    "model.c_c", "model.a", "model.b", "model.c", "model.a_s", "model.b_s",
    "sweep.theta_r_start_deg", "sweep.theta_r_end_deg", "sweep.theta_r_step_deg",
    "sweep.range_m", "sweep.down_m", "sweep.heading_deg",
    "uncertainty.custom.sigma_pa", "uncertainty.custom.sigma_ang_deg",
}
_INT_KEYS = {"model.n", "montecarlo.runs", "montecarlo.seed"}
_STR_KEYS = {"model.kind"}
_LIST_KEYS = {"uncertainty.levels": str, "histogram.theta_r_deg": float}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | set(_LIST_KEYS)


def _unquote(s: str) -> str:
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "\"'":
        return s[1:-1]
    return s


def _convert(key: str, raw: str, line: int):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            v = float(raw)
            if v != int(v):
                raise ValueError(raw)
            return int(v)
        if key in _STR_KEYS:
            return _unquote(raw)
        kind = _LIST_KEYS[key]
        items = [_unquote(p.strip()) for p in raw.strip("[]").split(",") if p.strip()]
        return [kind(p) for p in items]
    except ValueError:
        raise ParseError(f"bad value {raw!r} for {key}", line=line, key=key) from None


def parse_config_text(text: str) -> dict:
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw_line.strip()!r}", line=lineno)
        key, raw = (p.strip() for p in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ParseError(f"unknown key {key!r}", line=lineno, key=key)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno, key=key)
        if not raw:
            raise ParseError(f"missing value for {key}", line=lineno, key=key)
        values[key] = _convert(key, raw, lineno)
    return values


def config_from_values(values: dict) -> ScenarioConfig:
    g = values.get
    radar = RadarSite(g("radar.p_rn", 0.0), g("radar.p_re", 0.0), g("radar.p_rd", 0.0),
                      g("radar.c_r", 167.4), g("radar.p_fa", 1.7e-4))
    kind = g("model.kind", "ellipsoid")
    if kind == "constant":
        model = Constant(g("model.c_c", 0.2))
    elif kind == "ellipsoid":
        model = Ellipsoid(g("model.a", 0.25), g("model.b", 0.15), g("model.c", 0.17))
    elif kind == "spikeball":
        n = g("model.n", 4)
        if n < 2 or n % 2:
            raise ValidationError("model.n", f"lobe count must be an even integer >= 2, got {n}")
        model = SimpleSpikeball(g("model.a_s", 0.2), g("model.b_s", 0.15), n)
    else:
        raise ValidationError("model.kind", f"expected one of {sorted(MODEL_KINDS)}, got {kind!r}")
    sweep = SweepSpec(g("sweep.theta_r_start_deg", 0.0), g("sweep.theta_r_end_deg", 180.0),
                      g("sweep.theta_r_step_deg", 0.5), g("sweep.range_m", 650e3),
                      g("sweep.down_m", -3000.0), math.radians(g("sweep.heading_deg", 0.0)))
    levels = []
    for label in g("uncertainty.levels", list(DEFAULT_LEVELS)):
        if label == "custom":
            levels.append(UncertaintyLevel(g("uncertainty.custom.sigma_pa", 0.0),
                                           math.radians(g("uncertainty.custom.sigma_ang_deg", 0.0)),
                                           "custom"))
        else:
            levels.append(UncertaintyLevel.preset(label))
    if len({lv.label for lv in levels}) != len(levels):
        raise ValidationError("uncertainty.levels", "levels must be distinct")
    return ScenarioConfig(radar=radar, model=model, sweep=sweep, levels=tuple(levels),
                          mc_runs=g("montecarlo.runs", 1000), seed=g("montecarlo.seed", 0),
                          histogram_theta_r_deg=tuple(g("histogram.theta_r_deg", [2.0, 20.0])))


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    return config_from_values(parse_config_text(text))


# --- linearized analysis ----------------------------------------------------

@dataclass(frozen=True)
class DetectionAnalysis:
    state: AircraftState
    range_m: float
    lam: float | None
    phi: float | None
    sigma_r: float
    snr: float
    p_d: float
    a_p: PdJacobian
    c_pd: float
    sigma_pd: float

    def to_record(self) -> dict:
        rec = {
            "range_m": self.range_m, "lambda_rad": self.lam, "phi_rad": self.phi,
            "sigma_r": self.sigma_r, "snr": self.snr, "p_d": self.p_d,
        }
        for name, v in zip(("a_pn", "a_pe", "a_pd", "a_phi", "a_theta", "a_psi"), self.a_p.row.tolist()):
            rec[name] = v
        rec.update(c_pd=self.c_pd, sigma_pd=self.sigma_pd, three_sigma_pd=3.0 * self.sigma_pd,
                   near_nadir=self.a_p.near_nadir, near_gimbal_lock=self.a_p.near_gimbal_lock,
                   near_rcs_corner=self.a_p.near_rcs_corner)
        return rec


def analyze(state: AircraftState, radar: RadarSite, model: RcsModel,
            c_xx: PoseCovariance, a_p: PdJacobian | None = None) -> DetectionAnalysis:
    point = evaluate_point(state, radar, model)
    a_p = assemble_a_p(state, radar, model) if a_p is None else a_p
    var = propagate_variance(a_p, c_xx)
    return DetectionAnalysis(
        state=state, range_m=point.range_m,
        lam=point.angles.lam if point.angles else None,
        phi=point.angles.phi if point.angles else None,
        sigma_r=point.sigma_r, snr=point.snr, p_d=point.p_d, a_p=a_p,
        c_pd=var.c_pd, sigma_pd=var.sigma_pd,
    )


@dataclass
class LinearSweep:
    theta_r_deg: np.ndarray
    model_kind: str
    analyses: dict  # level label -> list[DetectionAnalysis]

    def sigma_pd(self, label: str) -> np.ndarray:
        return np.array([a.sigma_pd for a in self.analyses[label]])

    def nominal_pd(self) -> np.ndarray:
        first = next(iter(self.analyses.values()))
        return np.array([a.p_d for a in first])

    def records(self, label: str) -> list[dict]:
        return [{"theta_r_deg": float(t), **a.to_record()}
                for t, a in zip(self.theta_r_deg, self.analyses[label])]


def linear_sweep(config: ScenarioConfig) -> LinearSweep:
    states = config.sweep.nominal_states()
    covs = {lv.label: lv.covariance() for lv in config.levels}
    out = {label: [] for label in covs}
    for x in states:
        state = AircraftState.from_array(x)
        a_p = assemble_a_p(state, config.radar, config.model)
        for label, cov in covs.items():
            out[label].append(analyze(state, config.radar, config.model, cov, a_p=a_p))
    return LinearSweep(config.sweep.theta_r_deg(), config.model.kind, out)


@dataclass
class LevelValidation:
    level: UncertaintyLevel
    ensemble: EnsembleResult
    sigma_pd: np.ndarray
    coverage: CoverageReport
    histograms: list  # list[HistogramComparison]


@dataclass
class ValidationReport:
    model_kind: str
    sweep: LinearSweep
    levels: dict  # label -> LevelValidation


def validate_sweep(config: ScenarioConfig, runs: int | None = None,
                   seed: int | None = None) -> ValidationReport:
    runs = config.mc_runs if runs is None else runs
    seed = config.seed if seed is None else seed
    lin = linear_sweep(config)
    levels = {}
    for lv in config.levels:
        ens = run_ensemble(config.sweep, config.radar, config.model, lv, runs, seed)
        sig = lin.sigma_pd(lv.label)
        hists = []
        if runs >= 100:
            for theta in config.histogram_theta_r_deg:
                try:
                    k = config.sweep.index_of(theta)
                except IndexOutOfRange:
                    continue
                if abs(lin.theta_r_deg[k] - theta) > 1e-9:  # not on the grid
                    continue
                hists.append(histogram_vs_gaussian(ens, k, float(sig[k])))
        levels[lv.label] = LevelValidation(lv, ens, sig, coverage_check(ens, sig), hists)
    return ValidationReport(config.model.kind, lin, levels)


# --- finite-difference gradient check ---------------------------------------

STEP_POSITION = 1e-2  # m
STEP_ANGLE = 1e-6  # rad
STEP_RELATIVE = 1e-6  # for S, sigma_r and R
GRAD_RTOL = 1e-6
GRAD_ATOL = 1e-8
CORNER_NEIGHBORHOOD = 1e-4  # |sin(n lam / 2)| below this is excluded for the spikeball
NADIR_NEIGHBORHOOD = 1e-3  # horizontal / slant body distance
GIMBAL_NEIGHBORHOOD = 1e-3  # |cos(pitch)|

_STATE_STEPS = np.array([STEP_POSITION] * 3 + [STEP_ANGLE] * 3)


def _relative_error(analytic, fd) -> np.ndarray:
    """Per-entry error scaled by the column's FD magnitude, floored at atol / rtol.

    An entry passes when the result is below GRAD_RTOL, i.e. when
    ``|a - f| < max(rtol * column_scale, atol)``.
    """
    analytic = np.atleast_2d(np.asarray(analytic, dtype=float))
    fd = np.atleast_2d(np.asarray(fd, dtype=float))
    scale = np.maximum(np.max(np.abs(fd), axis=0, keepdims=True), GRAD_ATOL / GRAD_RTOL)
    return np.abs(analytic - fd) / scale


def _central(f, x, steps) -> np.ndarray:
    """Central differences of a batch-capable function; returns (len(f(x)), len(x)).

    ``f`` maps a stack ``(m, len(x))`` to ``(m, k)``. Each difference is divided by
    the step actually realised in floating point, ``(x + h) - (x - h)``.
    """
    x = np.asarray(x, dtype=float)
    offsets = np.diag(np.asarray(steps, dtype=float))
    plus, minus = x + offsets, x - offsets
    values = np.asarray(f(np.vstack([plus, minus]))).reshape(2 * x.size, -1)
    realised = np.diag(plus - minus)
    return ((values[:x.size] - values[x.size:]) / realised[:, None]).T


def random_pose(rng: np.random.Generator, radar: RadarSite) -> np.ndarray:
    """Range 10-1000 km, elevation and roll/pitch within +-60 deg, any azimuth and yaw."""
    r = rng.uniform(10e3, 1000e3)
    az = rng.uniform(-math.pi, math.pi)
    el = rng.uniform(-math.pi / 3, math.pi / 3)
    pos = radar.position + r * np.array([math.cos(el) * math.cos(az),
                                         math.cos(el) * math.sin(az),
                                         -math.sin(el)])
    ang = np.array([rng.uniform(-math.pi / 3, math.pi / 3),
                    rng.uniform(-math.pi / 3, math.pi / 3),
                    rng.uniform(-math.pi, math.pi)])
    return np.concatenate([pos, ang])


BLOCKS = ("d_pd_d_snr", "d_snr_d_range", "d_snr_d_sigma", "d_range_d_state",
          "d_body_d_state", "d_angles_d_body", "d_rcs_d_angles", "a_p")


@dataclass
class GradReport:
    model_kind: str
    samples: int
    checked: int
    excluded: dict
    block_errors: dict
    a_p_column_errors: np.ndarray
    tolerance: float = GRAD_RTOL

    @property
    def passed(self) -> bool:
        return all(err < self.tolerance for err in self.block_errors.values())

    def to_record(self) -> dict:
        return {
            "model": self.model_kind, "samples": self.samples, "checked": self.checked,
            "excluded": dict(self.excluded), "tolerance": self.tolerance,
            "block_errors": dict(self.block_errors),
            "a_p_column_errors": self.a_p_column_errors.tolist(), "passed": self.passed,
        }


def _exclusion_reason(x: np.ndarray, radar: RadarSite, model: RcsModel) -> str | None:
    if abs(math.cos(x[4])) < GIMBAL_NEIGHBORHOOD:
        return "gimbal"
    if model.uses_angles:
        b = body_vectors(x, radar.position)
        if math.hypot(b[0], b[1]) < NADIR_NEIGHBORHOOD * float(np.linalg.norm(b)):
            return "nadir"
        if isinstance(model, SimpleSpikeball):
            lam, _ = aspect_from_body(b)
            if abs(math.sin(0.5 * model.n * float(lam))) < CORNER_NEIGHBORHOOD:
                return "corner"
    return None


def gradcheck(config: ScenarioConfig, samples: int, seed: int) -> GradReport:
    """Compare every analytic partial and the assembled A_P with central differences."""
    if samples < 1:
        raise ValidationError("samples", f"must be >= 1, got {samples}")
    radar, model = config.radar, config.model
    rng = np.random.default_rng(seed)
    errors = {name: 0.0 for name in BLOCKS}
    a_p_cols = np.zeros(6)
    excluded = {"corner": 0, "nadir": 0, "gimbal": 0}
    checked = 0
    for _ in range(samples):
        x = random_pose(rng, radar)
        reason = _exclusion_reason(x, radar, model)
        if reason:
            excluded[reason] += 1
            continue
        checked += 1
        state = AircraftState.from_array(x)
        point = evaluate_point(state, radar, model)
        r, sig, s = point.range_m, point.sigma_r, point.snr

        def upd(name, analytic, fd):
            errors[name] = max(errors[name], float(np.max(_relative_error(analytic, fd))))

        hs = STEP_RELATIVE * s
        upd("d_pd_d_snr", d_pd_d_snr(s, radar.p_fa),
            (probability_of_detection(s + hs, radar.p_fa)
             - probability_of_detection(s - hs, radar.p_fa)) / (2 * hs))
        hr = STEP_RELATIVE * r
        upd("d_snr_d_range", d_snr_d_range(radar, sig, r),
            (snr(radar, sig, r + hr) - snr(radar, sig, r - hr)) / (2 * hr))
        hsig = STEP_RELATIVE * sig
        upd("d_snr_d_sigma", d_snr_d_sigma(radar, r),
            (snr(radar, sig + hsig, r) - snr(radar, sig - hsig, r)) / (2 * hsig))
        upd("d_range_d_state", d_range_d_state(state, radar),
            _central(lambda y: ranges(y, radar.position), x, _STATE_STEPS))
        upd("d_body_d_state", d_body_d_state(state, radar),
            _central(lambda y: body_vectors(y, radar.position), x, _STATE_STEPS))
        if model.uses_angles:
            b = body_vectors(x, radar.position)
            upd("d_angles_d_body", d_angles_d_body(BodyVector(*b.tolist())),
                _central(lambda y: np.column_stack(aspect_from_body(y)), b, [STEP_POSITION] * 3))
            lam, phi = (float(v) for v in aspect_from_body(b))
            d_lam, d_phi, _ = d_rcs_d_angles(model, AspectAngles(lam, phi))
            upd("d_rcs_d_angles", [d_lam, d_phi],
                _central(lambda y: model.sigma(y[:, 0], y[:, 1]), np.array([lam, phi]),
                         [STEP_ANGLE] * 2))
        a_p = assemble_a_p(state, radar, model).row
        fd = _central(lambda y: pd_batch(y, radar, model), x, _STATE_STEPS)
        col_err = _relative_error(a_p, fd)[0]
        a_p_cols = np.maximum(a_p_cols, col_err)
        errors["a_p"] = max(errors["a_p"], float(col_err.max()))
    return GradReport(model.kind, samples, checked, excluded, errors, a_p_cols)
