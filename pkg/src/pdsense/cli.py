"""Command line entry point: ``pdsense {eval,sweep,montecarlo,gradcheck}``.

Exit status is 0 on success, 1 when a gradient check fails and 2 for
configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, IndexOutOfRange
from .scenario import (
    ScenarioConfig,
    analyze,
    gradcheck,
    linear_sweep,
    load_config,
    nominal_state_at,
    validate_sweep,
)

FIGURE_NOTES = """\
# Output files

sweep_<model>_<level>.csv / .json
    Linearized sweep over theta_r. Plot three_sigma_pd against theta_r_deg
    for the sensitivity curves, one line per level.

summary_<model>_<level>.csv / .json
    Nominal P_D with the linearized 3-sigma band (p_d_nominal +- three_sigma_pd)
    and ensemble statistics per theta_r.

ensemble_<model>_<level>.csv
    Raw Monte Carlo P_D, columns run, theta_r_deg, p_d. One hair line per run;
    subtract p_d_nominal from the summary file for the error plots.

histogram_<model>_<level>_theta<deg>.csv
    Freedman-Diaconis histogram of the ensemble at one theta_r with the
    linearized Gaussian density evaluated at bin centres.

coverage_<model>_<level>.json
    Fraction of samples inside the 3-sigma band, aggregate and per theta_r.
"""


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def write_records(path: Path, records: list[dict]) -> None:
    """Write records as CSV plus a JSON mirror with the same rows."""
    with open(path.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(records[0].keys())
        for rec in records:
            w.writerow([_fmt(v) for v in rec.values()])
    path.with_suffix(".json").write_text(json.dumps(records, indent=1) + "\n")


def _config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    if args.model:
        cfg = cfg.with_model(args.model)
    return cfg


def cmd_eval(args) -> int:
    cfg = _config(args)
    theta = cfg.sweep.theta_r_start if args.theta_r is None else args.theta_r
    state = nominal_state_at(cfg.sweep, cfg.sweep.index_of(theta))
    level = cfg.level(args.level) if args.level else cfg.levels[0]
    result = analyze(state, cfg.radar, cfg.model, level.covariance())
    out = {"model": cfg.model.kind, "level": level.label, "theta_r_deg": theta,
           "state": state.as_array().tolist(), **result.to_record()}
    print(json.dumps(out, indent=1))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lin = linear_sweep(cfg)
    for lv in cfg.levels:
        write_records(out / f"sweep_{cfg.model.kind}_{lv.label}", lin.records(lv.label))
    (out / "FIGURES.md").write_text(FIGURE_NOTES)
    return 0


def cmd_montecarlo(args) -> int:
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = validate_sweep(cfg, runs=args.runs, seed=args.seed)
    kind = cfg.model.kind
    for label, lv in report.levels.items():
        ens, cov = lv.ensemble, lv.coverage
        (out / f"ensemble_{kind}_{label}.csv").write_text(ens.to_csv())
        rows = []
        for k, theta in enumerate(ens.theta_r_deg.tolist()):
            rows.append({
                "theta_r_deg": theta, "p_d_nominal": float(ens.nominal_pd[k]),
                "sigma_pd": float(lv.sigma_pd[k]), "three_sigma_pd": 3.0 * float(lv.sigma_pd[k]),
                "mc_mean": float(ens.mean[k]), "mc_std": float(ens.std[k]),
                "mc_min": float(ens.min[k]), "mc_max": float(ens.max[k]),
                "coverage": float(cov.per_k[k]),
            })
        write_records(out / f"summary_{kind}_{label}", rows)
        max_dev, at = ens.max_abs_deviation()
        (out / f"coverage_{kind}_{label}.json").write_text(json.dumps({
            "model": kind, "level": label, "runs": ens.run_count, "seed": ens.rng_seed,
            "aggregate": cov.aggregate, "worst_theta_r_deg": float(ens.theta_r_deg[cov.worst_k]),
            "worst_fraction": cov.worst_fraction, "max_abs_deviation": max_dev,
            "max_abs_deviation_theta_r_deg": at, "resampled": ens.resampled,
            "per_k": cov.per_k.tolist(),
        }, indent=1) + "\n")
        for h in lv.histograms:
            hist_rows = [{"bin_left": float(h.edges[i]), "bin_right": float(h.edges[i + 1]),
                          "count": int(h.counts[i]), "density": float(h.density[i]),
                          "gaussian_density": float(h.gaussian_density[i])}
                         for i in range(h.counts.size)]
            name = f"histogram_{kind}_{label}_theta{h.theta_r_deg:g}.csv"
            with open(out / name, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(hist_rows[0].keys())
                for rec in hist_rows:
                    w.writerow([_fmt(v) for v in rec.values()])
        print(f"{kind} {label}: coverage {cov.aggregate:.4f}, max |dP_D| {max_dev:.4f} at {at:g} deg")
    (out / "FIGURES.md").write_text(FIGURE_NOTES)
    return 0


def cmd_gradcheck(args) -> int:
    cfg = _config(args)
    report = gradcheck(cfg, args.samples, args.seed)
    print(json.dumps(report.to_record(), indent=1))
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario file (defaults to the reference scenario)")
        p.add_argument("--model", choices=("constant", "ellipsoid", "spikeball"),
                       help="override model.kind from the config")

    p = sub.add_parser("eval", help="detection analysis at one sweep point, as JSON")
    common(p)
    p.add_argument("--theta-r", type=float, dest="theta_r", help="radar azimuth in degrees")
    p.add_argument("--level", help="uncertainty level label (default: first configured)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="linearized 3-sigma sweep CSVs")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("montecarlo", help="Monte Carlo validation of the linearization")
    common(p)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("gradcheck", help="finite-difference check of all partials")
    common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IndexOutOfRange, OSError) as exc:
        print(f"pdsense: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
