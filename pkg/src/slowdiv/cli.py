"""Command-line interface: subcommand dispatch and CSV/JSON emission.

Every subcommand writes one or more CSV data files plus a JSON run summary
(`run-<subcommand>.json`) into the output directory, which defaults to the
SLOWDIV_OUTDIR environment variable and then to the working directory.
All numbers are written with repr precision so a run is reproducible from
its artifacts alone.  Exit codes: 0 success, 2 validation error (including
bad flags and malformed model files), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import platform
import sys
import time

import numpy as np

from .canard import (
    generate_orbit,
    sdi_I,
    setup_from_model,
    slow_relation_G,
    slow_relation_G_inverse,
)
from .errors import NumericalError, ValidationError
from .fractal import dim_sequence
from .models import builtin_names, load_model
from .regularizers import regularizer_by_name
from .sdi import sdi_regular_segment, sdi_split_sum, sdi_to_two_fold
from .simulate import (
    flow_regularized,
    return_map,
    saddle_node_sweep,
)
from .system import classify_boundary_point

ENV_OUTDIR = "SLOWDIV_OUTDIR"
RUN_SCHEMA = "slowdiv-run/1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(v) -> str:
    # normalize numpy scalars: repr(np.float64(x)) is not parseable
    if isinstance(v, float):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _outdir(args) -> str:
    out = args.out or os.environ.get(ENV_OUTDIR) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_csv(outdir: str, name: str, header, rows) -> str:
    path = os.path.join(outdir, name)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return name


def _versions() -> dict:
    import scipy

    from . import __version__

    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "slowdiv": __version__,
    }


def _json_default(o):
    # run documents may carry library dataclasses and numpy scalars
    if dataclasses.is_dataclass(o) and not isinstance(o, type):
        return dataclasses.asdict(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _write_summary(outdir, subcommand, params, outputs, results, t0) -> None:
    doc = {
        "schema": RUN_SCHEMA,
        "subcommand": subcommand,
        "parameters": params,
        "results": results,
        "outputs": outputs,
        "versions": _versions(),
        "wall_seconds": round(time.perf_counter() - t0, 6),
        "units": "all model quantities are dimensionless; t is integration time",
    }
    path = os.path.join(outdir, f"run-{subcommand}.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _load(args):
    loaded = load_model(args.model)
    regname = args.reg or loaded.regularizer
    return loaded, regularizer_by_name(regname), regname


def _effective(args, *names) -> dict:
    out = {"model": args.model}
    if getattr(args, "reg", None) is not None:
        out["reg"] = args.reg
    for n in names:
        out[n] = getattr(args, n.replace("-", "_"))
    return out


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_classify(args) -> None:
    t0 = time.perf_counter()
    loaded, _, regname = _load(args)
    outdir = _outdir(args)
    if not args.xmin < args.xmax:
        raise ValidationError(f"need xmin < xmax, got [{args.xmin}, {args.xmax}]")
    rows = []
    for x in np.linspace(args.xmin, args.xmax, args.n):
        cls = classify_boundary_point(loaded.system, (float(x), 0.0))
        side = vis = ""
        if cls.tangency is not None:
            side = cls.tangency.side
            parts = []
            if cls.tangency.visibility_plus:
                parts.append(cls.tangency.visibility_plus)
            if cls.tangency.visibility_minus:
                parts.append(cls.tangency.visibility_minus)
            vis = ";".join(parts)
        rows.append((float(x), cls.tag.value, side, vis))
    name = _write_csv(outdir, "classify.csv", ("x", "tag", "side", "visibility"), rows)
    tags = sorted({r[1] for r in rows})
    _write_summary(
        outdir, "classify",
        dict(_effective(args, "xmin", "xmax", "n"), regularizer=regname),
        [name], {"points": len(rows), "tags_seen": tags}, t0,
    )


def _cmd_sdi(args) -> None:
    t0 = time.perf_counter()
    loaded, reg, regname = _load(args)
    outdir = _outdir(args)
    a, b = args.lower, args.upper
    if not a < b:
        raise ValidationError(f"need --from < --to, got [{a}, {b}]")
    if a < 0.0 < b:
        res = sdi_split_sum(loaded.system, reg, a, b, tol=args.tol)
    elif a == 0.0 or b == 0.0:
        x1 = b if a == 0.0 else a
        res = sdi_to_two_fold(loaded.system, reg, x1, tol=args.tol)
    else:
        res = sdi_regular_segment(loaded.system, reg, (a, b), tol=args.tol)
    status = "converged" if res.converged else "unconverged"
    name = _write_csv(
        outdir, "sdi.csv",
        ("lower_x", "upper_x", "value", "error_estimate", "status", "evaluations"),
        [(a, b, res.value, res.abs_error, status, res.subdivisions)],
    )
    _write_summary(
        outdir, "sdi",
        dict(_effective(args, "tol"), lower=a, upper=b, regularizer=regname),
        [name], {"value": res.value, "error_estimate": res.abs_error,
                 "converged": res.converged}, t0,
    )


def _cmd_slow_relation(args) -> None:
    t0 = time.perf_counter()
    loaded, reg, regname = _load(args)
    outdir = _outdir(args)
    setup = setup_from_model(loaded, reg)
    s_min = args.s_min if args.s_min is not None else 0.1 * setup.sbar
    s_max = args.s_max if args.s_max is not None else 0.9 * setup.sbar
    if not 0.0 < s_min < s_max <= setup.sbar:
        raise ValidationError(
            f"need 0 < s-min < s-max <= sbar = {setup.sbar:g}, "
            f"got [{s_min}, {s_max}]"
        )
    rows = []
    for s in np.linspace(s_min, s_max, args.n):
        s = float(s)
        i_s = sdi_I(setup, s)
        g = slow_relation_G(setup, s)
        back = slow_relation_G_inverse(setup, g)
        rows.append((s, i_s, g, abs(back - s)))
    name = _write_csv(
        outdir, "sdi_curve.csv", ("s", "I_s", "G_s", "residual"), rows
    )
    worst = max(r[3] for r in rows)
    _write_summary(
        outdir, "slow-relation",
        dict(_effective(args, "n"), s_min=s_min, s_max=s_max,
             regularizer=regname, sbar=setup.sbar, p0=setup.p0),
        [name], {"rows": len(rows), "worst_roundtrip_residual": worst}, t0,
    )


def _cmd_orbit(args) -> None:
    t0 = time.perf_counter()
    loaded, reg, regname = _load(args)
    outdir = _outdir(args)
    setup = setup_from_model(loaded, reg)
    orbit = generate_orbit(setup, args.s0, floor=args.floor, max_iter=args.max_iter)
    rows = [(n, s) for n, s in enumerate(orbit.terms)]
    name = _write_csv(outdir, "orbit.csv", ("n", "s_n"), rows)
    _write_summary(
        outdir, "orbit",
        dict(_effective(args, "s0", "floor", "max_iter"), regularizer=regname),
        [name],
        {"terms": len(orbit), "direction": orbit.direction,
         "stop_reason": orbit.stop_reason, "last": orbit.terms[-1]}, t0,
    )


def _read_sequence_csv(path: str) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except FileNotFoundError:
        raise ValidationError(f"sequence file not found: {path}") from None
    if not rows:
        raise ValidationError(f"{path}: empty sequence file")
    header, body = rows[0], rows[1:]
    col = len(header) - 1
    if "s_n" in header:
        col = header.index("s_n")
    try:
        vals = [float(r[col]) for r in body if r]
    except (ValueError, IndexError) as err:
        raise ValidationError(f"{path}: bad sequence data ({err})") from None
    if not vals:
        raise ValidationError(f"{path}: no data rows")
    return np.asarray(vals)


def _cmd_dimension(args) -> None:
    t0 = time.perf_counter()
    outdir = _outdir(args)
    params = {"sequence": args.sequence, "delta_min": args.delta_min,
              "delta_max": args.delta_max}
    if args.sequence:
        pts = _read_sequence_csv(args.sequence)
    else:
        if args.model is None or args.s0 is None:
            raise ValidationError("dimension needs --sequence or --model with --s0")
        loaded, reg, regname = _load(args)
        setup = setup_from_model(loaded, reg)
        orbit = generate_orbit(setup, args.s0)
        pts = orbit.as_array()
        params.update(model=args.model, s0=args.s0, regularizer=regname)
    fit = dim_sequence(pts, delta_min=args.delta_min, delta_max=args.delta_max)
    name = _write_csv(
        outdir, "dimension.csv", ("delta", "measure"),
        list(zip(fit.deltas, fit.measures)),
    )
    _write_summary(
        outdir, "dimension", params, [name],
        {"d": fit.d, "slope": fit.slope, "fit_kind": fit.fit_kind,
         "fit_quality": fit.fit_quality, "d_tail": fit.d_tail,
         "n_points": fit.n_points, "notes": list(fit.notes)}, t0,
    )


def _cmd_simulate(args) -> None:
    t0 = time.perf_counter()
    loaded, reg, regname = _load(args)
    outdir = _outdir(args)
    setup = setup_from_model(loaded, reg)
    z0 = (0.0, setup.y_base + args.s0)
    traj = flow_regularized(
        setup, args.eps, args.lamt, z0, t_max=args.t_max, rtol=args.rtol
    )
    outputs = [
        _write_csv(outdir, "trajectory.csv", ("t", "x", "y"),
                   [(t, z[0], z[1]) for t, z in zip(traj.t, traj.z)]),
        _write_csv(outdir, "crossings.csv", ("t", "x", "y", "s"),
                   [(c.t, c.x, c.y, c.s) for c in traj.crossings]),
    ]
    results = {"crossings": len(traj.crossings), "diagnostics": traj.diagnostics}
    if args.returns:
        rows = []
        s = args.s0
        for _ in range(args.returns):
            p = return_map(setup, args.eps, args.lamt, s, rtol=args.rtol)
            rows.append((s, p, p - s))
            s = p
        outputs.append(
            _write_csv(outdir, "returns.csv", ("s", "P_s", "gap"), rows)
        )
        results["returns"] = len(rows)
    _write_summary(
        outdir, "simulate",
        dict(_effective(args, "eps", "lamt", "s0", "t_max", "rtol", "returns"),
             regularizer=regname),
        outputs, results, t0,
    )


def _cmd_sweep(args) -> None:
    t0 = time.perf_counter()
    loaded, reg, regname = _load(args)
    outdir = _outdir(args)
    setup = setup_from_model(loaded, reg)
    result = saddle_node_sweep(
        setup, args.eps, (args.lamt_lo, args.lamt_hi),
        bracket_tol=args.bracket_tol, rtol=args.rtol,
    )
    rows = [(lamt, count, "", "", "") for lamt, count in result.history]
    if result.near_double is not None:
        nd = result.near_double
        rows.append((result.lamt_star, "", nd.s_star, nd.multiplier,
                     nd.classification))
    name = _write_csv(
        outdir, "sweep.csv",
        ("lamt", "count", "s_star", "multiplier", "classification"), rows,
    )
    nd = result.near_double
    _write_summary(
        outdir, "sweep",
        dict(_effective(args, "eps", "lamt_lo", "lamt_hi", "bracket_tol", "rtol"),
             regularizer=regname),
        [name],
        {"lamt_star": result.lamt_star, "bracket": list(result.bracket),
         "evaluations": len(result.history),
         "near_double": None if nd is None else
         {"s_star": nd.s_star, "multiplier": nd.multiplier,
          "classification": nd.classification},
         "diagnostics": result.diagnostics}, t0,
    )


def _cmd_report(args) -> None:
    t0 = time.perf_counter()
    outdir = _outdir(args)
    entries = []
    for fname in sorted(os.listdir(outdir)):
        path = os.path.join(outdir, fname)
        if fname.endswith(".csv"):
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                rows = list(reader)
            entries.append({
                "file": fname,
                "columns": rows[0] if rows else [],
                "rows": max(0, len(rows) - 1),
            })
        elif fname.startswith("run-") and fname.endswith(".json"):
            with open(path) as fh:
                doc = json.load(fh)
            entries.append({
                "file": fname,
                "subcommand": doc.get("subcommand"),
                "wall_seconds": doc.get("wall_seconds"),
            })
    doc = {
        "schema": "slowdiv-report/1",
        "directory": os.path.abspath(outdir),
        "artifacts": entries,
        "versions": _versions(),
        "wall_seconds": round(time.perf_counter() - t0, 6),
    }
    path = os.path.join(outdir, "report.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(path)


# ---------------------------------------------------------------------------
# parser


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--model", required=True,
        help="model reference: a JSON file path or builtin:<name> "
             f"({', '.join(builtin_names())})",
    )
    p.add_argument("--reg", choices=("tanh", "arctan"), default=None,
                   help="override the model's regularizer")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slowdiv",
        description="Slow divergence integral toolkit for regularized "
                    "piecewise-smooth planar systems",
    )
    parser.add_argument(
        "--out", default=None,
        help=f"output directory (default: ${ENV_OUTDIR} or the working directory)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("classify", help="classify boundary points on a grid")
    _add_model_flags(p)
    p.add_argument("--xmin", type=float, default=-0.5)
    p.add_argument("--xmax", type=float, default=0.5)
    p.add_argument("--n", type=int, default=41)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("sdi", help="slow divergence integral over a segment")
    _add_model_flags(p)
    p.add_argument("--from", dest="lower", type=float, required=True,
                   help="lower endpoint on the x axis")
    p.add_argument("--to", dest="upper", type=float, required=True,
                   help="upper endpoint on the x axis")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_sdi)

    p = sub.add_parser("slow-relation",
                       help="tabulate I(s) and the slow relation G(s)")
    _add_model_flags(p)
    p.add_argument("--s-min", type=float, default=None)
    p.add_argument("--s-max", type=float, default=None)
    p.add_argument("--n", type=int, default=25)
    p.set_defaults(func=_cmd_slow_relation)

    p = sub.add_parser("orbit", help="entry-exit orbit of the slow relation")
    _add_model_flags(p)
    p.add_argument("--s0", type=float, required=True)
    p.add_argument("--floor", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=100000)
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("dimension",
                       help="Minkowski dimension of an orbit sequence")
    p.add_argument("--sequence", default=None,
                   help="CSV file with the sequence (s_n column or last column)")
    p.add_argument("--model", default=None)
    p.add_argument("--reg", choices=("tanh", "arctan"), default=None)
    p.add_argument("--s0", type=float, default=None)
    p.add_argument("--delta-min", type=float, default=None)
    p.add_argument("--delta-max", type=float, default=None)
    p.set_defaults(func=_cmd_dimension)

    p = sub.add_parser("simulate", help="integrate the regularized flow")
    _add_model_flags(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lamt", type=float, required=True,
                   help="unfolding parameter (lambda = eps * lamt)")
    p.add_argument("--s0", type=float, required=True,
                   help="starting section offset")
    p.add_argument("--t-max", type=float, default=50.0)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--returns", type=int, default=0,
                   help="also tabulate this many return-map iterates")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep",
                       help="bisect the unfolding parameter on cycle count")
    _add_model_flags(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lamt-lo", type=float, required=True)
    p.add_argument("--lamt-hi", type=float, required=True)
    p.add_argument("--bracket-tol", type=float, default=1e-6)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="summarize artifacts in the output directory")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help
        return int(exc.code) if exc.code else EXIT_OK
    try:
        args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
