"""Command-line interface.

Exit codes: 0 when every checked identity holds, 1 when one is violated,
2 for usage and input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import catalog, documents
from .documents import DocumentError, StructureDocument
from .errors import Poisson3DError, PreconditionError, StepRejectedError
from .expr import evaluate, evaluate_array, parse, simplify, sum_exprs, to_string
from .family import (
    case1_family,
    case3_family,
    classify_case,
    integrate_characteristics,
    lambda_of,
    lambda_report,
    quadrature_K3,
)
from .poisson import is_casimir
from .verify import SamplingConfig, check_jacobi, conservation_report

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _config(args) -> SamplingConfig:
    try:
        return SamplingConfig(n_points=args.points, seed=args.seed, tol=args.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _read_document(path: str) -> StructureDocument:
    if path == "-":
        return documents.loads(sys.stdin.read())
    return documents.load(path)


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{path}: invalid JSON: {exc}") from None


def _exit_for(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_VIOLATION


# -- verify -------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = _config(args)
    doc = _read_document(args.file)
    S = doc.structure
    out = {"structure": S.name, "entries": str(S), "jacobi": check_jacobi(S, cfg).to_dict()}
    reports = [out["jacobi"]]
    if doc.casimir is not None:
        out["casimir"] = is_casimir(doc.casimir, S, cfg).to_dict()
        reports.append(out["casimir"])
    ok = all(r["verdict"] == "Zero" for r in reports)
    out["verdict"] = "Zero" if ok else "NonZero"
    _emit(out)
    return _exit_for(ok)


# -- lambda -------------------------------------------------------------------

def cmd_lambda(args) -> int:
    cfg = _config(args)
    S = _read_document(args.file).structure
    report = lambda_report(S, cfg)
    _emit({
        "structure": S.name,
        "lambda": to_string(simplify(lambda_of(S))),
        "case": str(classify_case(S, cfg)),
        "report": report.to_dict(),
    })
    return EXIT_OK


# -- generate -----------------------------------------------------------------

def _target_block(args, doc: StructureDocument):
    if args.target is None:
        return doc.target, doc.target_casimir
    data = _read_json(args.target)
    block = data.get("target", data)
    # reuse the document reader so the target gets the same validation
    holder = documents.from_dict({
        "u": "0", "v": "0", "w": "0",
        "parameters": documents.to_dict(doc).get("parameters"),
        "domain": doc.structure.domain.to_dict(),
        "diffeomorphism": doc.diffeomorphism.to_dict() if doc.diffeomorphism else None,
        "target": block,
    })
    return holder.target, holder.target_casimir


def _diffeo_block(args, doc: StructureDocument):
    if args.diffeo is None:
        return doc.diffeomorphism
    data = _read_json(args.diffeo)
    block = data.get("diffeomorphism", data)
    holder = documents.from_dict({
        "u": "0", "v": "0", "w": "0",
        "parameters": documents.to_dict(doc).get("parameters"),
        "diffeomorphism": block,
    })
    return holder.diffeomorphism


def cmd_generate(args) -> int:
    cfg = _config(args)
    doc = _read_document(args.file)
    S = doc.structure
    declared = set(S.params) | set(S.param_ranges)
    if args.psi is not None:
        psi = parse(args.psi, parameters=declared)
    else:
        psi = doc.psi if doc.psi is not None else parse("k1")

    if args.case == "1":
        if doc.casimir is None:
            raise InputError("case 1 needs a 'casimir' field in the document")
        family = case1_family(S, doc.casimir, psi, cfg, verify_result=False)
    else:
        phi = _diffeo_block(args, doc)
        target, casimir_y = _target_block(args, doc)
        if phi is None or target is None or casimir_y is None:
            raise InputError("case 3 needs a diffeomorphism and a target with a casimir (document or --diffeo/--target)")
        family = case3_family(S, phi, target, casimir_y, psi, cfg, verify_result=False)

    try:
        member = family.materialize()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = check_jacobi(member, cfg)
    out = documents.to_dict(StructureDocument(member.with_entries(*member.entries, name=f"{S.name}_family")))
    out["family"] = {
        "base": S.name,
        "case": args.case,
        "psi": to_string(psi),
        "K1": to_string(family.K1),
        "K2": to_string(family.K2),
        "multipliers": [to_string(m) for m in family.multipliers],
    }
    out["report"] = report.to_dict()
    _emit(out)
    return _exit_for(report.ok)


# -- characteristics ----------------------------------------------------------

def _point(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise InputError(f"--from expects three comma-separated numbers, got {text!r}") from None
    if len(values) != 3:
        raise InputError(f"--from expects three comma-separated numbers, got {text!r}")
    return values


def _k3_column(doc: StructureDocument, x0, traj, cfg) -> Optional[np.ndarray]:
    S = doc.structure
    if traj.xi is None or doc.elimination is None or doc.casimir is None:
        return None
    e = doc.elimination
    K1 = sum_exprs(parse(v) for v in S.variables)
    anchor = x0[list(S.variables).index(e.pivot)]
    q = quadrature_K3(S, K1, doc.casimir, e.pivot, e.alpha, e.beta, anchor=anchor, cfg=cfg)
    return np.array([q.k3(p, xi) for p, xi in zip(traj.points, traj.xi)])


def cmd_characteristics(args) -> int:
    cfg = _config(args)
    doc = _read_document(args.file)
    S = doc.structure
    x0 = _point(args.start)
    xi0 = None
    if args.carry_xi is not None:
        values = dict(S.params)
        values.update(zip(S.variables, x0))
        xi0 = evaluate(parse(args.carry_xi, parameters=set(S.params)), values)
    if args.every < 1:
        raise InputError("--every must be at least 1")
    try:
        traj = integrate_characteristics(S, x0, args.t_end, args.step, xi0=xi0)
    except (StepRejectedError, ValueError) as exc:
        raise InputError(str(exc)) from None

    quantities = {"K1": sum_exprs(parse(v) for v in S.variables)}
    if doc.casimir is not None:
        quantities["C"] = doc.casimir
    report = conservation_report(traj, quantities)
    env = {v: traj.points[:, i] for i, v in enumerate(S.variables)}
    env.update(S.params)
    columns = {name: evaluate_array(q, env)[0] for name, q in quantities.items()}
    k3 = _k3_column(doc, x0, traj, cfg)
    if k3 is not None:
        relative = bool(abs(k3[0]) >= 1e-8)
        report.series["K3"] = np.abs(k3 - k3[0]) / (abs(k3[0]) if relative else 1.0)
        report.drifts["K3"] = float(np.max(report.series["K3"]))
        report.relative["K3"] = relative
        columns["K3"] = k3

    header = ["t", *S.variables] + (["xi"] if traj.xi is not None else [])
    header += list(columns) + [f"drift_{name}" for name in columns]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    rows = list(range(0, len(traj), args.every))
    if rows[-1] != len(traj) - 1:
        rows.append(len(traj) - 1)
    for i in rows:
        row = [traj.t[i], *traj.points[i]]
        if traj.xi is not None:
            row.append(traj.xi[i])
        row += [columns[name][i] for name in columns]
        row += [report.series[name][i] for name in columns]
        writer.writerow([repr(float(v)) for v in row])

    limits = {name: args.max_drift for name in columns}
    if "K3" in limits:
        limits["K3"] = args.max_k3_drift
    ok = all(report.drifts[name] < limits[name] for name in columns)
    summary = {
        "structure": S.name,
        "start": list(x0),
        "t_end": float(traj.t[-1]),
        "step": args.step,
        "samples": len(traj),
        "halted": traj.halted,
        "halt_reason": traj.halt_reason,
        "max_error_estimate": traj.max_error_estimate,
        "drift": {name: {"max_drift": report.drifts[name], "relative": report.relative[name], "limit": limits[name]}
                  for name in columns},
        "verdict": "Zero" if ok else "NonZero",
    }
    if traj.xi is not None:
        summary["xi0"] = xi0
        summary["xi_small"] = traj.xi_small
    text = json.dumps(summary, indent=2)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)
    return _exit_for(ok)


# -- catalog ------------------------------------------------------------------

def cmd_catalog(args) -> int:
    if args.list:
        for name, description in catalog.list_entries():
            print(f"{name}\t{description}")
        return EXIT_OK
    entry = catalog.get(args.export)
    print(documents.dumps(documents.from_entry(entry)))
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def _sampling_flags(parser: argparse.ArgumentParser, defaults: bool) -> None:
    kw = (lambda value: {"default": value}) if defaults else (lambda value: {"default": argparse.SUPPRESS})
    parser.add_argument("--seed", type=int, help="sampling seed (default 42)", **kw(42))
    parser.add_argument("--points", type=int, help="sample points per identity (default 1000)", **kw(1000))
    parser.add_argument("--tol", type=float, help="absolute residual tolerance (default 1e-9)", **kw(1e-9))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson3d",
        description="Verify 3D Poisson structures and build families of new ones.",
    )
    _sampling_flags(parser, defaults=True)
    common = argparse.ArgumentParser(add_help=False)
    _sampling_flags(common, defaults=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check the Jacobi identity (and the Casimir, if given)")
    p.add_argument("file", help="structure document, or - for standard input")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lambda", parents=[common], help="print lambda and the case classification")
    p.add_argument("file")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("generate", parents=[common], help="materialise a family member and verify it")
    p.add_argument("file")
    p.add_argument("--psi", help="generator formula in k1, k2 (default: document psi, else k1)")
    p.add_argument("--case", choices=("1", "3"), default="1")
    p.add_argument("--target", help="JSON file with the target structure block (case 3)")
    p.add_argument("--diffeo", help="JSON file with the diffeomorphism block (case 3)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("characteristics", parents=[common], help="integrate the characteristic system to CSV")
    p.add_argument("file")
    p.add_argument("--from", dest="start", required=True, help="start point, e.g. 1,2,3")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--carry-xi", help="formula for the initial xi, evaluated at the start point")
    p.add_argument("--every", type=int, default=10, help="write every n-th sample (default 10)")
    p.add_argument("--max-drift", type=float, default=1e-6, help="drift limit for K1 and C")
    p.add_argument("--max-k3-drift", type=float, default=1e-5, help="drift limit for K3")
    p.add_argument("--report", help="write the JSON report here instead of standard error")
    p.set_defaults(func=cmd_characteristics)

    p = sub.add_parser("catalog", help="list or export built-in structures")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--list", action="store_true")
    group.add_argument("--export", metavar="NAME")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, DocumentError, PreconditionError, catalog.UnknownEntryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Poisson3DError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
