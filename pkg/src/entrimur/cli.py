"""Command-line front end: writes CSV or JSON records for every computed artifact.

Every output begins with a header record (version, seed, tolerances).  CSV
files carry it as a leading ``#`` comment line; JSON files as a ``header``
key.  Floats are printed with 9 significant digits; +inf is written as the
string ``"inf"`` in JSON since the format has no infinity literal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import bounds_reports as br
from . import finite_field_mub as ffm
from . import gallery
from . import spin_models as sm
from .minimax_solver import SolverConfig, icomp_multi, iad, with_overrides
from .quantum_objects import ObjectError, Observable, from_json_obj, marginal

EXIT_OK, EXIT_PARSE, EXIT_SATURATED = 0, 2, 3


class InputError(Exception):
    pass


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return float(f"{v:.9g}")
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def _csv_cell(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _header(cfg: SolverConfig, command: str) -> dict:
    return {"tool": "entrimur", "version": __version__, "command": command, "seed": cfg.seed,
            "outer_tol": cfg.outer_tol, "inner_tol": cfg.inner_tol, "restarts": cfg.restarts}


def _flatten(rec, prefix=""):
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = ";".join(_csv_cell(_num(x)) for x in v)
        else:
            out[key] = v
    return out


def render(header: dict, rows, fmt: str) -> str:
    """``rows`` is a list of flat records (tables) or a single dict (reports)."""
    if fmt == "json":
        return json.dumps({"header": _num(header), "data": _num(rows)}, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# " + " ".join(f"{k}={_csv_cell(v)}" for k, v in header.items()) + "\n")
    table = rows if isinstance(rows, list) else [_flatten(rows)]
    if table:
        fields = list(table[0].keys())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in table:
            w.writerow([_csv_cell(_num(r[f])) for f in fields])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# input


def load_observables(paths) -> list:
    obs = []
    for path in paths:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from exc
        items = data if isinstance(data, list) else [data]
        for k, item in enumerate(items):
            try:
                o = from_json_obj(item)
            except (ObjectError, ValueError, TypeError, KeyError) as exc:
                where = f"{path}[{k}]" if isinstance(data, list) else path
                raise InputError(f"{where}: {exc}") from exc
            if not isinstance(o, Observable):
                raise InputError(f"{path}: expected observables, got {type(o).__name__}")
            obs.append(o)
    return obs


def _bracket_record(b) -> dict:
    return {"lower": b.lower, "upper": b.upper, "gap": b.gap, "rounds": b.rounds_used,
            "saturated": b.saturated}


# ---------------------------------------------------------------------------
# commands; each returns (rows, saturated)


def cmd_spin_table(args, cfg):
    alpha = args.alpha if args.alpha is not None else math.pi / 4
    pts = sm.comparison_points(alpha, cfg)
    lb_g, lb_v = pts["lb"]
    cols = {"LB": (lb_g, math.pi / 4 - alpha / 2, lb_v)}
    for key, name in (("icomp", "Icomp"), ("blw", "BLW"), ("nv", "NV")):
        g, v, phi = pts[key]
        cols[name] = (g, phi, v)
    rows = [{"row": name, **{c: cols[c][i] for c in cols}}
            for i, name in enumerate(("gamma", "phi", "value"))]
    return rows, False


def cmd_spin_scan(args, cfg):
    if args.grid < 2:
        raise InputError("--grid must be at least 2")
    alphas = np.linspace(0.0, math.pi / 2, args.grid)
    rows = [dict(zip(("alpha", "lb", "icomp_value", "gamma_star", "phi_star"), r))
            for r in sm.spin_scan(alphas, cfg)]
    return rows, False


def cmd_mub(args, cfg):
    try:
        f = ffm.field_construct(args.p, args.n)
    except ffm.FieldError as exc:
        raise InputError(str(exc)) from exc
    _, lam = ffm.optimal_mub_measurement(f)
    lower, value, upper = ffm.mub_bound_sandwich(f, cfg)
    return [{"d": f.size, "p": f.p, "n": f.n, "lambda0": lam,
             "lower": lower, "value": value, "upper": upper}], False


def cmd_three_spin(args, cfg):
    r = sm.three_spin_suite(cfg)
    lam = 1 / math.sqrt(3)
    errs = []
    for m in (r["m0"], r["m1"]):
        for i in range(1, 4):
            target = sm.spin_observable(lam * np.eye(3)[i - 1])
            errs.append(float(np.abs(marginal(m, i).effects - target.effects).max()))
    return {"icomp": r["icomp"], "c_star": r["c_star"], "pauli_value": r["pauli_value"],
            "scan_value": r["scan_value"], "marginal_error": max(errs)}, False


def cmd_icomp(args, cfg):
    obs = load_observables(args.files)
    if len(obs) < 2:
        raise InputError("icomp needs at least two observables")
    b = icomp_multi(obs, cfg)
    return _bracket_record(b), b.saturated


def cmd_iad(args, cfg):
    obs = load_observables(args.files)
    if len(obs) != 2:
        raise InputError("iad needs exactly two observables")
    b = iad(obs[0], obs[1], cfg)
    return _bracket_record(b), b.saturated


def cmd_bounds(args, cfg):
    obs = load_observables(args.files)
    if len(obs) < 2:
        raise InputError("bounds needs at least two observables")
    rep = br.bound_report(obs[0], obs[1], obs[2:], cfg)
    return {k: v["value"] for k, v in rep.to_dict().items()}, False


def cmd_appendix(args, cfg):
    out, sat = {}, False
    for case in (gallery.hw_example_1(), gallery.hw_example_2()):
        a, b = case.targets
        bc = icomp_multi([a, b], cfg)
        bi = iad(a, b, cfg)
        bj = iad(b, a, cfg)
        sat = sat or bc.saturated or bi.saturated or bj.saturated
        out[case.name] = {"marginal_error": case.marginal_error(), "icomp": _bracket_record(bc),
                          "iad_ab": _bracket_record(bi), "iad_ba": _bracket_record(bj)}
    return out, sat


COMMANDS = {
    "spin-table": (cmd_spin_table, "csv"),
    "spin-scan": (cmd_spin_scan, "csv"),
    "mub": (cmd_mub, "csv"),
    "three-spin": (cmd_three_spin, "json"),
    "icomp": (cmd_icomp, "json"),
    "iad": (cmd_iad, "json"),
    "bounds": (cmd_bounds, "json"),
    "appendix": (cmd_appendix, "json"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entrimur",
                                 description="Entropic measurement uncertainty computations.")
    ap.add_argument("--version", action="version", version=f"entrimur {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--outer-tol", type=float)
    common.add_argument("--inner-tol", type=float)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"))
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("spin-table", parents=[common], help="comparison table at one angle")
    p.add_argument("--alpha", type=float)
    p = sub.add_parser("spin-scan", parents=[common], help="LB and Icomp over an angle grid")
    p.add_argument("--grid", type=int, default=100)
    p = sub.add_parser("mub", parents=[common], help="bound sandwich for the field MUB pair")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--n", type=int, default=1)
    sub.add_parser("three-spin", parents=[common], help="three orthogonal spin components")
    for name in ("icomp", "iad", "bounds"):
        p = sub.add_parser(name, parents=[common], help=f"{name} for observables in JSON files")
        p.add_argument("files", nargs="+")
    sub.add_parser("appendix", parents=[common], help="verify the gallery cases")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = with_overrides(SolverConfig(), seed=args.seed, restarts=args.restarts,
                             outer_tol=args.outer_tol, inner_tol=args.inner_tol)
    except ValueError as exc:
        print(f"entrimur: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    fn, default_fmt = COMMANDS[args.command]
    try:
        rows, saturated = fn(args, cfg)
    except InputError as exc:
        print(f"entrimur: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    text = render(_header(cfg, args.command), rows, args.format or default_fmt)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    if saturated:
        print("entrimur: warning: exchange loop hit the round limit; bracket still open",
              file=sys.stderr)
        return EXIT_SATURATED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
