"""Command-line front end: config parsing, orchestration, report emission.

Exit codes: 0 success, 1 malformed config, 2 validation failure,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys

import numpy as np

from . import orthopoly, predictor, report
from .errors import (
    InvariantError,
    NonConvergenceError,
    QuadratureError,
    WeightError,
)
from .geometry import (
    BernsteinSzegoWeight,
    IntervalSystem,
    PolynomialFactorization,
    WeightSpec,
    validate,
)
from .greens import green_phi_inf
from .surface import normalize_differentials, period_matrix

SCHEMA_VERSION = 1
COMMANDS = ("geometry", "measures", "periods", "ortho", "predict", "verify",
            "experiment")


class ConfigError(Exception):
    """Malformed configuration; the message names the offending field."""


def _require(cfg, field, types):
    if field not in cfg:
        raise ConfigError(f"missing field '{field}'")
    val = cfg[field]
    if not isinstance(val, types):
        raise ConfigError(f"field '{field}' has the wrong type")
    return val


def load_config(path) -> WeightSpec:
    """Parse a JSON run configuration into a WeightSpec."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("top level must be an object")
    version = _require(cfg, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema_version': unsupported value {version}")
    endpoints = _require(cfg, "endpoints", list)
    try:
        sys = IntervalSystem(endpoints)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field 'endpoints': {exc}") from exc
    r_roots = cfg.get("R_roots", [])
    if not isinstance(r_roots, list):
        raise ConfigError("field 'R_roots' must be a list")
    try:
        fac = PolynomialFactorization(sys, r_roots)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field 'R_roots': {exc}") from exc
    wcfg = cfg.get("weight", {"kind": "constant"})
    if not isinstance(wcfg, dict):
        raise ConfigError("field 'weight' must be an object")
    kind = wcfg.get("kind", "constant")
    if kind == "constant":
        weight = BernsteinSzegoWeight((), float(wcfg.get("scale", 1.0)))
    elif kind == "bernstein_szego":
        raw = wcfg.get("roots", [])
        if not isinstance(raw, list):
            raise ConfigError("field 'weight.roots' must be a list")
        roots = []
        for i, item in enumerate(raw):
            if not isinstance(item, list) or len(item) != 4:
                raise ConfigError(
                    f"field 'weight.roots[{i}]' must be [re, im, mult, sign]"
                )
            re, im, mult, sign = item
            roots.append((complex(float(re), float(im)), int(mult), int(sign)))
        try:
            weight = BernsteinSzegoWeight(tuple(roots),
                                          float(wcfg.get("scale", 1.0)))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"field 'weight.roots': {exc}") from exc
    else:
        raise ConfigError(f"field 'weight.kind': unknown kind '{kind}'")
    try:
        return WeightSpec(fac, weight)
    except WeightError as exc:
        raise ConfigError(f"field 'weight': {exc}") from exc


def _out_path(args, name):
    report.ensure_dir(args.out)
    return os.path.join(args.out, name)


def cmd_geometry(spec, args):
    rep = validate(spec)
    record = {
        "passed": rep.passed,
        "first_failure": rep.first_failure,
        "message": rep.message,
        "samples_per_band": rep.samples_per_band,
    }
    report.write_json(record, _out_path(args, "geometry.json"))
    print("geometry: " + ("ok" if rep.passed else f"FAIL ({rep.message})"))
    return 0 if rep.passed else 2


def cmd_measures(spec, args):
    sys = spec.system
    basis = normalize_differentials(sys)
    period = period_matrix(sys, basis)
    record = {"omega": [float(w) for w in period.omega]}
    report.write_json(record, _out_path(args, "measures.json"))
    print("omega = (" + ", ".join(report.fmt(w) for w in period.omega) + ")")
    return 0


def cmd_periods(spec, args):
    sys = spec.system
    basis = normalize_differentials(sys)
    period = period_matrix(sys, basis)
    record = period.to_report()
    record["phi_inf_cap"] = report.fmt(
        abs(green_phi_inf(sys, sys.endpoints[-1] + sys.span))
    )
    report.write_json(record, _out_path(args, "periods.json"))
    print(f"periods: genus {sys.l - 1}, omega sum "
          + report.fmt(float(np.sum(period.omega))))
    return 0


def _n_range(args):
    if args.n_max < args.n_min:
        raise ConfigError("field 'n_max': must be >= n_min")
    return range(args.n_min, args.n_max + 1)


def cmd_ortho(spec, args):
    sys = spec.system
    ns = list(_n_range(args))
    meas = orthopoly.discretize(spec, max(8 * max(ns) + 32, 256))
    rec = orthopoly.stieltjes_recurrence(meas, max(ns) + 1)
    records = []
    rows = []
    for n in ns:
        rep = orthopoly.count_zeros(sys, orthopoly.polynomial_zeros(rec, n))
        records.append(rep.to_record())
        for j, c in enumerate(rep.band_counts):
            rows.append((n, j + 1, c))
    report.write_json({"reports": records}, _out_path(args, "ortho.json"))
    report.write_csv(("n", "j", "count"), rows, _out_path(args, "ortho.csv"))
    print(f"ortho: {len(ns)} zero reports written")
    return 0


def _threshold_excluded(spec, ns, threshold):
    """n values where |p_n| at a zero of S drops below threshold*max on E."""
    sys = spec.system
    s_roots = spec.factorization.S_roots
    if not s_roots or threshold <= 0:
        return []
    meas = orthopoly.discretize(spec, max(8 * max(ns) + 32, 256))
    rec = orthopoly.stieltjes_recurrence(meas, max(ns) + 1)
    grid = np.concatenate(
        [np.linspace(lo, hi, 200) for lo, hi in sys.bands]
    )
    out = []
    for n in ns:
        at_s = np.min(np.abs(
            orthopoly.orthonormal_eval_array(rec, n, np.array(s_roots))
        ))
        cap = np.max(np.abs(orthopoly.orthonormal_eval_array(rec, n, grid)))
        if at_s < threshold * cap:
            out.append(n)
    return out


def cmd_predict(spec, args):
    ns = list(_n_range(args))
    table = predictor.compare(spec, ns, epsilon=args.epsilon)
    report.write_comparison_csv(table, _out_path(args, "predict.csv"))
    record = report.comparison_record(table)
    excluded = _threshold_excluded(spec, ns, args.threshold)
    record["summary"]["threshold_excluded"] = excluded
    record["summary"]["max_defect_thresholded"] = max(
        (r.defect for r in table.rows if r.n not in set(excluded)), default=0
    )
    report.write_json(record, _out_path(args, "predict.json"))
    if args.plot:
        report.plot_comparison(table, _out_path(args, "predict.png"))
    print(f"predict: max defect {table.max_defect}, "
          f"flagged exact {table.flagged_exact}, "
          f"occupancy match rate {table.occupancy_match_rate:.4f}")
    return 0


def cmd_verify(spec, args):
    sys = spec.system
    if not spec.is_bernstein_szego:
        raise ConfigError("field 'weight': verify requires a polynomial weight")
    basis = normalize_differentials(sys)
    period = period_matrix(sys, basis)
    phi_w = predictor.weight_transform(sys, basis, spec, period) \
        if sys.l > 1 else None
    records = []
    worst_defect = 0.0
    worst_residual = 0.0
    for n in _n_range(args):
        pell = orthopoly.pell_data(spec, n)
        cong = predictor.verify_congruence(sys, basis, period, spec, n, pell,
                                        phi_w=phi_w)
        worst_defect = max(worst_defect, cong.defect)
        worst_residual = max(worst_residual, pell.residual)
        records.append({
            "n": n,
            "pell_residual": float(pell.residual),
            "congruence_defect": float(cong.defect),
            "gap_points": [float(x) for x in pell.gap_points],
            "gap_signs": list(pell.gap_signs),
        })
    record = {
        "rows": records,
        "summary": {
            "max_pell_residual": float(worst_residual),
            "max_congruence_defect": float(worst_defect),
            "tolerance": float(args.tolerance),
            "passed": bool(worst_defect <= args.tolerance
                           and worst_residual <= args.tolerance),
        },
    }
    report.write_json(record, _out_path(args, "verify.json"))
    ok = record["summary"]["passed"]
    print(f"verify: max Pell residual {worst_residual:.3g}, "
          f"max congruence defect {worst_defect:.3g} "
          + ("(pass)" if ok else "(FAIL)"))
    return 0 if ok else 2


def cmd_experiment(spec, args):
    sys = spec.system
    acc = predictor.accumulation_experiment(spec, args.n_max)
    report.write_histogram_csv(acc, sys.gaps, _out_path(args, "experiment.csv"))
    record = {
        "n_max": acc.n_max,
        "largest_unvisited": [float(u) for u in acc.largest_unvisited],
        "distinct_points": list(acc.distinct_points),
    }
    report.write_json(record, _out_path(args, "experiment.json"))
    if args.plot:
        report.plot_histogram(acc, sys.gaps, _out_path(args, "experiment.png"))
    print("experiment: largest unvisited "
          + ", ".join(report.fmt(u) for u in acc.largest_unvisited))
    return 0


_HANDLERS = {
    "geometry": cmd_geometry,
    "measures": cmd_measures,
    "periods": cmd_periods,
    "ortho": cmd_ortho,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="bandzeros",
        description="Predict and verify zero distributions of polynomials "
                    "orthogonal on several real intervals.",
    )
    p.add_argument("--config", required=True, help="path to a JSON run config")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--n-min", type=int, default=20)
    p.add_argument("--n-max", type=int, default=60)
    p.add_argument("--epsilon", type=float, default=0.02,
                   help="interior-flag margin in cell coordinates")
    p.add_argument("--threshold", type=float, default=1e-3,
                   help="relative size floor for |p_n| at the zeros of S")
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="pass/fail tolerance for the verify command")
    p.add_argument("--plot", action="store_true",
                   help="also render figures next to the CSV/JSON output")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_config(args.config)
        return _HANDLERS[args.command](spec, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 1
    except (WeightError, InvariantError) as exc:
        print(f"validation failure: {exc}", file=_sys.stderr)
        return 2
    except (NonConvergenceError, QuadratureError) as exc:
        print(f"numerical non-convergence: {exc}", file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
