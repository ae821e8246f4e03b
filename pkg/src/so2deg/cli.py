"""Command-line front end.

    so2deg spectrum --domain disc --max 5
    so2deg index problem.json
    so2deg check problem.json
    so2deg bif problem.json
    so2deg solve problem.json [--seed-mode M] [--eps E]
    so2deg continue problem.json --from A --to B --step S --output branch.csv

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass
from typing import Any, Sequence

import jsonschema
import numpy as np

from . import __version__
from .checker import (
    ConsistencyError,
    Family,
    MultipleCrossings,
    ProblemSpec,
    Verdict,
    Zero,
    bif_index,
    check_all,
    check_bif_meets,
    problem_index,
)
from .degree import INFINITY, IndexReport, ResonantSlope
from .euler_ring import PartialEulerElement
from .exprlang import (
    EvalError,
    ExprSyntaxError,
    check_slope_at_infinity,
    diff_u,
    evaluate,
    find_zeros,
    parse,
)
from .galerkin import (
    NoConvergence,
    SingularJacobian,
    StepUnderflow,
    UnsupportedDomain,
    angular_content,
    build_basis,
    continue_branch,
    detect_blowup,
    find_nonconstant,
    newton_solve,
)
from .reps import SO2Rep
from .spectra import Custom, Cylinder, Disc, Interval, SpectralLine, spectrum

__all__ = ["main", "run", "load_problem", "PROBLEM_SCHEMA", "InputError"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_NUMBER = {"type": "number"}

PROBLEM_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "domain": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"type": {"const": "interval"}, "length": {"type": "number", "exclusiveMinimum": 0}},
                    "required": ["type"],
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"type": {"enum": ["disc", "cylinder"]}},
                    "required": ["type"],
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "custom"},
                        "lines": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "properties": {
                                    "eigenvalue": {"type": "number", "minimum": 0},
                                    "rep": {
                                        "type": "object",
                                        "propertyNames": {"pattern": "^[0-9]+$"},
                                        "additionalProperties": {"type": "integer", "minimum": 0},
                                    },
                                },
                                "required": ["eigenvalue", "rep"],
                            },
                        },
                    },
                    "required": ["type", "lines"],
                },
            ]
        },
        "expr": {"type": "string"},
        "slope_at_infinity": _NUMBER,
        "slope_at_infinity_expr": {"type": "string"},
        "zeros": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {"value": _NUMBER, "slope": _NUMBER},
                "required": ["value"],
            },
        },
        "zero_search_radius": {"type": "number", "exclusiveMinimum": 0},
        "bif": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lambda_minus": _NUMBER,
                "lambda_plus": _NUMBER,
                "lambda0": _NUMBER,
                "samples": {"type": "integer", "minimum": 2},
            },
            "required": ["lambda_minus", "lambda_plus"],
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "modes": {"type": "integer", "minimum": 1},
                "quad_order": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "k_max": {"type": "integer", "minimum": 0},
                "n_max": {"type": "integer", "minimum": 0},
                "lambda_max": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
    "required": ["domain"],
    "oneOf": [
        {"required": ["slope_at_infinity"], "not": {"required": ["slope_at_infinity_expr"]}},
        {"required": ["slope_at_infinity_expr"], "not": {"required": ["slope_at_infinity"]}},
    ],
    "anyOf": [{"required": ["expr"]}, {"required": ["zeros"]}],
}


class InputError(ValueError):
    """Invalid problem file or arguments (exit status 2)."""


@dataclass
class LoadedProblem:
    spec: ProblemSpec
    raw: dict
    notes: list[str]


def _domain(d: dict):
    kind = d["type"]
    if kind == "interval":
        return Interval(float(d.get("length", 1.0)))
    if kind == "disc":
        return Disc()
    if kind == "cylinder":
        return Cylinder()
    lines = [SpectralLine(float(ln["eigenvalue"]), SO2Rep({int(k): v for k, v in ln["rep"].items()})) for ln in d["lines"]]
    try:
        return Custom(tuple(lines))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def load_problem(source: str | dict) -> LoadedProblem:
    """Read, validate and interpret a problem file (path or parsed JSON)."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(raw, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"problem file invalid at {where}: {exc.message}") from exc
    domain = _domain(raw["domain"])
    notes: list[str] = []
    expr = raw.get("expr")
    fexpr = _parse_field(expr, "expr") if expr is not None else None
    inf_expr = raw.get("slope_at_infinity_expr")
    slope_fn = None
    if inf_expr is not None:
        ie = _parse_field(inf_expr, "slope_at_infinity_expr")
        slope_fn = lambda lam, _e=ie: float(evaluate(_e, 0.0, lam))  # noqa: E731
        slope_inf = slope_fn(0.0)
    else:
        slope_inf = float(raw["slope_at_infinity"])
    if fexpr is not None:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            check_slope_at_infinity(fexpr, slope_inf)
        notes += [str(w.message) for w in caught]
    zeros = []
    if "zeros" in raw:
        for z in raw["zeros"]:
            value = float(z["value"])
            if "slope" in z:
                slope = float(z["slope"])
            elif fexpr is not None:
                slope = float(evaluate(diff_u(fexpr), value, 0.0))
            else:
                raise InputError(f"zero {value} has no slope and there is no expression")
            if fexpr is not None and abs(evaluate(fexpr, value, 0.0)) >= 1e-6:
                notes.append(f"supplied zero {value:g} has |f| = {abs(evaluate(fexpr, value, 0.0)):.3g}")
            zeros.append(Zero(value, slope))
    else:
        radius = float(raw.get("zero_search_radius", 100.0))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            found = find_zeros(fexpr, radius, 0.0)
        notes += [str(w.message) for w in caught]
        zeros = [Zero(v, s) for v, s in found]
    family = None
    if "bif" in raw:
        b = raw["bif"]
        lm, lp = float(b["lambda_minus"]), float(b["lambda_plus"])
        if not lp > lm:
            raise InputError("bif.lambda_plus must exceed bif.lambda_minus")
        if slope_fn is None:
            raise InputError("bif requires slope_at_infinity_expr")
        family = Family(lm, lp, slope_fn(lm), slope_fn(lp), slope_fn, b.get("lambda0"), int(b.get("samples", 1001)))
    spec = ProblemSpec(domain, tuple(zeros), slope_inf, family, expr)
    return LoadedProblem(spec, raw, notes)


def _parse_field(text: str, name: str):
    try:
        return parse(text)
    except ExprSyntaxError as exc:
        raise InputError(f"{name}: {exc}\n  {text}\n  {' ' * exc.offset}^") from exc


# --------------------------------------------------------------------------
# rendering helpers


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _partial_json(p: PartialEulerElement) -> dict:
    coords = sorted(p.listed() | {0})
    return {
        "coordinates": [
            {"subgroup": "SO(2)" if c == 0 else f"Z_{c}", "status": "unknown" if p.get(c) is None else "known", "value": p.get(c)}
            for c in coords
        ],
        "others": "known 0" if p.tail_known_zero else "unknown",
        "text": str(p),
    }


def _key(k) -> str:
    return "inf" if k is INFINITY else str(k)


def _report_json(r: IndexReport, zeros: Sequence[Zero]) -> dict:
    return {
        "ls_at_infinity": r.ls_at_infinity,
        "ls_locals": {_fmt(zeros[k].value): v for k, v in r.ls_locals.items()},
        "ls_total": r.ls_total,
        "grad_at_infinity": _partial_json(r.grad_at_infinity),
        "grad_locals": {_fmt(zeros[k].value): _partial_json(v) for k, v in r.grad_locals.items()},
        "grad_total": _partial_json(r.grad_total),
        "notes": list(r.notes),
    }


def _report_table(r: IndexReport, zeros: Sequence[Zero]) -> str:
    rows = [("point", "slope", "LS index", "gradient index")]
    for k, z in enumerate(zeros):
        ls = r.ls_locals[k]
        rows.append((f"z={_fmt(z.value)}", _fmt(z.slope), "?" if ls is None else str(ls), str(r.grad_locals[k])))
    rows.append(("infinity", "", "?" if r.ls_at_infinity is None else str(r.ls_at_infinity), str(r.grad_at_infinity)))
    rows.append(("total", "", "?" if r.ls_total is None else str(r.ls_total), str(r.grad_total)))
    return _table(rows)


def _table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _verdict_json(v: Verdict) -> dict:
    return {
        "theorem": v.theorem_id,
        "applies": v.applies,
        "witness": _jsonable(v.witness),
        "index_crosscheck": v.index_crosscheck.value,
        "notes": list(v.notes),
    }


def _witness_text(w: dict) -> str:
    parts = []
    for k, v in w.items():
        if isinstance(v, float):
            v = _fmt(v)
        parts.append(f"{k}={v}")
    return ", ".join(parts)


# --------------------------------------------------------------------------
# subcommands


def _cmd_spectrum(args, out) -> int:
    if args.domain == "interval":
        dom = Interval(args.length)
    elif args.domain == "disc":
        dom = Disc()
    else:
        dom = Cylinder()
    if not args.max > 0:
        raise InputError("--max must be positive")
    lines = spectrum(dom, args.max)
    if args.format == "json":
        json.dump(
            [
                {"eigenvalue": ln.eigenvalue, "dimension": ln.dimension, "rep": str(ln.rep), "labels": [list(lb) for lb in ln.labels]}
                for ln in lines
            ],
            out,
            indent=2,
        )
        out.write("\n")
    elif args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["eigenvalue", "dimension", "rep", "labels"])
        for ln in lines:
            w.writerow([repr(ln.eigenvalue), ln.dimension, str(ln.rep), " ".join(",".join(map(str, lb)) for lb in ln.labels)])
    else:
        rows = [("eigenvalue", "dim", "rep", "labels")]
        for ln in lines:
            rows.append((_fmt(ln.eigenvalue), str(ln.dimension), str(ln.rep), " ".join("(" + ",".join(map(str, lb)) + ")" for lb in ln.labels)))
        out.write(_table(rows) + "\n")
    return EXIT_OK


def _cmd_index(args, out) -> int:
    lp = load_problem(args.file)
    report = problem_index(lp.spec)
    if args.format == "json":
        json.dump(_report_json(report, lp.spec.zeros), out, indent=2)
        out.write("\n")
    else:
        out.write(_report_table(report, lp.spec.zeros) + "\n")
        for n in list(report.notes) + lp.notes:
            out.write(f"note: {n}\n")
    return EXIT_OK


def _cmd_check(args, out) -> int:
    lp = load_problem(args.file)
    verdicts = check_all(lp.spec)
    report = problem_index(lp.spec)
    if args.format == "json":
        json.dump(
            {"verdicts": [_verdict_json(v) for v in verdicts], "index": _report_json(report, lp.spec.zeros), "notes": lp.notes},
            out,
            indent=2,
        )
        out.write("\n")
        return EXIT_OK
    applying = [v for v in verdicts if v.applies]
    if not applying:
        out.write("no theorem applies\n")
    for v in applying:
        total = "grad_total" if v.theorem_id != "LS-existence" else "ls_total"
        cross = {"yes": "!= 0", "no": "= 0", "undetermined": "undetermined"}[v.index_crosscheck.value]
        if v.theorem_id.startswith("bif"):
            total, cross = "BIF", {"yes": "!= Theta", "no": "= Theta", "undetermined": "undetermined"}[v.index_crosscheck.value]
        elif total == "grad_total":
            cross = cross.replace("0", "Theta")
        out.write(f"Theorem {v.theorem_id} applies; witness {_witness_text(v.witness)}; {total} {cross}\n")
    out.write("\n" + _report_table(report, lp.spec.zeros) + "\n")
    for v in verdicts:
        if not v.applies:
            reason = "; ".join(v.notes) if v.notes else "hypotheses not satisfied"
            out.write(f"  {v.theorem_id}: does not apply ({reason})\n")
    for n in lp.notes:
        out.write(f"note: {n}\n")
    return EXIT_OK


def _cmd_bif(args, out) -> int:
    lp = load_problem(args.file)
    if lp.spec.family is None:
        raise InputError("problem file has no 'bif' section")
    element, nonzero, trace = bif_index(lp.spec)
    meets = None
    try:
        meets = check_bif_meets(lp.spec)
    except MultipleCrossings as exc:
        meets_note = str(exc)
    else:
        meets_note = None
    if args.format == "json":
        doc = {"bif": str(element), "nonzero": nonzero, "criterion": _jsonable(trace)}
        doc["meets"] = _verdict_json(meets) if meets is not None else {"error": meets_note}
        json.dump(doc, out, indent=2)
        out.write("\n")
        return EXIT_OK
    fam = lp.spec.family
    out.write(f"f'(inf, {_fmt(fam.lambda_minus)}) = {_fmt(fam.slope_minus)}, f'(inf, {_fmt(fam.lambda_plus)}) = {_fmt(fam.slope_plus)}\n")
    out.write(f"BIF = {element} ({'nontrivial' if nonzero else 'trivial'})\n")
    out.write(f"eigenspaces between the slopes: {trace['rep_between']} (dimension {trace['dimension_between']})\n")
    out.write(f"  nontrivial line: {trace['nontrivial_line']}; odd dimension: {trace['odd_dimension']}\n")
    if meets is not None:
        state = "applies" if meets.applies else "does not apply"
        out.write(f"bif-meets {state}; {_witness_text(meets.witness)}\n")
    else:
        out.write(f"bif-meets not evaluated: {meets_note}\n")
    return EXIT_OK


def _basis_for(lp: LoadedProblem):
    s = lp.raw.get("solver", {})
    dom = lp.spec.domain
    if isinstance(dom, Interval):
        return build_basis(dom, s.get("modes", 64), s.get("quad_order"))
    if "k_max" in s or "n_max" in s:
        return build_basis(dom, k_max=s.get("k_max"), n_max=s.get("n_max"), quad_order=s.get("quad_order"))
    if "lambda_max" in s:
        return build_basis(dom, lambda_max=s["lambda_max"], quad_order=s.get("quad_order"))
    return build_basis(dom, s.get("modes", 60), s.get("quad_order"))


def _require_expr(lp: LoadedProblem):
    if lp.spec.expr is None:
        raise InputError("this subcommand needs 'expr' in the problem file")


def _cmd_solve(args, out) -> int:
    lp = load_problem(args.file)
    _require_expr(lp)
    basis = _basis_for(lp)
    tol = lp.raw.get("solver", {}).get("tol", 1e-10)
    eps = (args.eps,) if args.eps is not None else (0.1, 0.02, 0.5)
    seeds = None
    if args.seed_mode is not None:
        if not 0 <= args.seed_mode < basis.size:
            raise InputError(f"--seed-mode must be below {basis.size}")
        seeds = [(i, args.seed_mode) for i in range(len(lp.spec.zeros))]
    sols = find_nonconstant(basis, lp.spec, seeds=seeds, eps=eps, tol=tol)
    if args.format == "json":
        doc = []
        for s in sols:
            d = {"l2_norm": s.l2_norm, "h1_norm": s.h1_norm, "residual_inf": s.residual_inf, "newton_iters": s.newton_iters}
            if isinstance(basis.domain, Disc):
                d["angular_content"] = {str(k): v for k, v in angular_content(basis, s.coeffs).items()}
            doc.append(d)
        json.dump(doc, out, indent=2)
        out.write("\n")
    else:
        if not sols:
            out.write("no nonconstant solution found (certificate unverified numerically)\n")
        rows = [("#", "l2_norm", "h1_norm", "residual_inf", "iters")]
        for i, s in enumerate(sols):
            rows.append((str(i), _fmt(s.l2_norm), _fmt(s.h1_norm), f"{s.residual_inf:.2e}", str(s.newton_iters)))
        if sols:
            out.write(_table(rows) + "\n")
    return EXIT_OK


def _branch_csv(branch, with_coeffs: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["lambda", "l2_norm", "h1_norm", "residual_inf", "newton_iters"]
    if with_coeffs and branch:
        head += [f"c{i}" for i in range(branch[0].coeffs.size)]
    w.writerow(head)
    for p in branch:
        row = [repr(p.lam), repr(p.l2_norm), repr(p.h1_norm), repr(p.residual_inf), p.newton_iters]
        if with_coeffs:
            row += [repr(float(c)) for c in p.coeffs]
        w.writerow(row)
    return buf.getvalue()


def _cmd_continue(args, out) -> int:
    lp = load_problem(args.file)
    _require_expr(lp)
    basis = _basis_for(lp)
    if not args.step > 0:
        raise InputError("--step must be positive")
    tol = lp.raw.get("solver", {}).get("tol", 1e-10)
    if not 0 <= args.seed_mode < basis.size:
        raise InputError(f"--seed-mode must be below {basis.size}")
    c0 = np.zeros(basis.size)
    c0[args.seed_mode] = args.amplitude
    start = newton_solve(basis, c0, args.lam_from, lp.spec.expr, tol=tol, max_iters=50)
    branch = continue_branch(
        basis,
        lp.spec.expr,
        start,
        (args.lam_from, args.lam_to),
        args.step,
        tol=tol,
        relative_tol=True,
        norm_cap=args.norm_cap,
    )
    text = _branch_csv(branch, args.coeffs)
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    hat = detect_blowup(branch, args.norm_cap)
    summary = f"{len(branch)} points, stopped: {branch.termination}"
    if hat is not None:
        summary += f"; blow-up extrapolated at lambda = {_fmt(hat)}"
    sys.stderr.write(summary + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="so2deg", description="Degree-theoretic existence checks for Neumann problems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="Neumann spectrum with eigenspace representations")
    sp.add_argument("--domain", choices=["interval", "disc", "cylinder"], required=True)
    sp.add_argument("--length", type=float, default=1.0, help="interval length")
    sp.add_argument("--max", type=float, required=True, help="eigenvalue cutoff")
    sp.add_argument("--format", choices=["table", "json", "csv"], default="table")
    sp.set_defaults(func=_cmd_spectrum)

    for name, fn, helptext in (
        ("index", _cmd_index, "local and total degree indices"),
        ("check", _cmd_check, "which theorems apply"),
        ("bif", _cmd_bif, "bifurcation index at infinity"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("file")
        p.add_argument("--format", choices=["table", "json"], default="table")
        p.set_defaults(func=fn)

    p = sub.add_parser("solve", help="search for nonconstant solutions")
    p.add_argument("file")
    p.add_argument("--seed-mode", type=int, default=None, help="basis index to perturb along")
    p.add_argument("--eps", type=float, default=None, help="perturbation size")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("continue", help="pseudo-arclength continuation in lambda")
    p.add_argument("file")
    p.add_argument("--from", dest="lam_from", type=float, required=True)
    p.add_argument("--to", dest="lam_to", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--output", default="-")
    p.add_argument("--seed-mode", type=int, default=1)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--norm-cap", type=float, default=1e3)
    p.add_argument("--coeffs", action="store_true", help="append basis coefficients to each row")
    p.set_defaults(func=_cmd_continue)
    return ap


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (InputError, ExprSyntaxError, ResonantSlope, UnsupportedDomain) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (NoConvergence, SingularJacobian, StepUnderflow, EvalError, ConsistencyError, MultipleCrossings) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
