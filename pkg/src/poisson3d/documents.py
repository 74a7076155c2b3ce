"""JSON structure documents: the file format read and written by the CLI.

A document is a JSON object::

    {
      "name": "kermack_mckendrick",
      "variables": ["x1", "x2", "x3"],
      "parameters": {"r": {"value": 1.0, "range": [0.5, 2.0]}, "a": 1.0},
      "u": "-r*x1*x2", "v": "0", "w": "-a*x2",
      "casimir": "x3 + (a/r)*ln(x1)",
      "domain": {"lower": [0.001, 0.001, 0.001], "upper": [10, 10, 10],
                 "positive": [true, true, true]},
      "diffeomorphism": {"forward": [...], "inverse": [...],
                         "source_variables": [...], "target_variables": [...]},
      "target": {"u": "...", "v": "...", "w": "...", "casimir": "...",
                 "domain": {...}},
      "elimination": {"pivot": "x3", "alpha": "...", "beta": "..."},
      "psi": "k1*k2"
    }

Only ``u``, ``v`` and ``w`` are required.  A parameter is either a bare
number or an object with ``value`` and an optional ``range``; a parameter
with a range and no value is sampled during verification.  Every identifier
in a formula must be a variable, a reserved symbol or a declared parameter.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from .catalog import CatalogEntry, Case3Recipe, Elimination
from .expr import RESERVED, VARIABLES, TRANSFORMED, Domain, Expr, parse, to_string
from .poisson import StructureMatrix
from .transform import Diffeomorphism

_KNOWN_KEYS = {
    "name", "variables", "parameters", "u", "v", "w", "casimir", "domain",
    "diffeomorphism", "target", "elimination", "psi", "report",
}


class DocumentError(ValueError):
    """A structure document is malformed."""


@dataclass
class StructureDocument:
    structure: StructureMatrix
    casimir: Optional[Expr] = None
    diffeomorphism: Optional[Diffeomorphism] = None
    target: Optional[StructureMatrix] = None
    target_casimir: Optional[Expr] = None
    elimination: Optional[Elimination] = None
    psi: Optional[Expr] = None
    extra: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.structure.name


def _formula(text: Any, where: str, declared) -> Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(text)
    if not isinstance(text, str):
        raise DocumentError(f"{where}: expected a formula string, got {type(text).__name__}")
    return parse(text, parameters=declared)


def _parameters(block: Any) -> tuple[dict, dict]:
    if block is None:
        return {}, {}
    if not isinstance(block, dict):
        raise DocumentError("parameters: expected an object")
    values, ranges = {}, {}
    for name, spec in block.items():
        if name in RESERVED:
            raise DocumentError(f"parameters: {name!r} is a reserved symbol")
        if isinstance(spec, (int, float)) and not isinstance(spec, bool):
            values[name] = float(spec)
            continue
        if not isinstance(spec, dict) or not ({"value", "range"} & spec.keys()):
            raise DocumentError(f"parameters.{name}: expected a number or an object with value/range")
        if "value" in spec:
            values[name] = float(spec["value"])
        if "range" in spec:
            lo, hi = (float(x) for x in spec["range"])
            if not lo < hi:
                raise DocumentError(f"parameters.{name}: empty range [{lo}, {hi}]")
            ranges[name] = (lo, hi)
    return values, ranges


def _domain(block: Any, where: str) -> Optional[Domain]:
    if block is None:
        return None
    try:
        return Domain.from_dict(block)
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: malformed domain block ({exc})") from None


def _triple(block: dict, key: str, where: str) -> list:
    items = block.get(key)
    if not isinstance(items, list) or len(items) != 3:
        raise DocumentError(f"{where}.{key}: expected a list of three formulas")
    return items


def from_dict(data: dict) -> StructureDocument:
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    for key in ("u", "v", "w"):
        if key not in data:
            raise DocumentError(f"missing required field {key!r}")
    variables = tuple(data.get("variables", VARIABLES))
    if variables != VARIABLES:
        raise DocumentError(f"variables must be {list(VARIABLES)}")
    values, ranges = _parameters(data.get("parameters"))
    declared = set(values) | set(ranges)
    domain = _domain(data.get("domain"), "domain") or Domain.box(-1.0, 1.0)
    u, v, w = (_formula(data[k], k, declared) for k in ("u", "v", "w"))
    structure = StructureMatrix(u, v, w, domain=domain, params=values, param_ranges=ranges,
                                name=str(data.get("name", "")))
    doc = StructureDocument(structure)
    if data.get("casimir") is not None:
        doc.casimir = _formula(data["casimir"], "casimir", declared)
    if data.get("psi") is not None:
        doc.psi = _formula(data["psi"], "psi", declared)

    block = data.get("diffeomorphism")
    if block is not None:
        source = tuple(block.get("source_variables", VARIABLES))
        target = tuple(block.get("target_variables", TRANSFORMED))
        forward = [_formula(t, "diffeomorphism.forward", declared) for t in _triple(block, "forward", "diffeomorphism")]
        inverse = [_formula(t, "diffeomorphism.inverse", declared) for t in _triple(block, "inverse", "diffeomorphism")]
        doc.diffeomorphism = Diffeomorphism(
            tuple(forward), tuple(inverse), _domain(block.get("domain"), "diffeomorphism.domain"), source, target,
            str(block.get("name", "")),
        )

    block = data.get("target")
    if block is not None:
        for key in ("u", "v", "w"):
            if key not in block:
                raise DocumentError(f"target: missing field {key!r}")
        tvars = doc.diffeomorphism.target if doc.diffeomorphism else TRANSFORMED
        doc.target = StructureMatrix(
            *(_formula(block[k], f"target.{k}", declared) for k in ("u", "v", "w")),
            domain=_domain(block.get("domain"), "target.domain") or domain,
            params=values, param_ranges=ranges, variables=tvars, name=f"{structure.name}_target",
        )
        if block.get("casimir") is not None:
            doc.target_casimir = _formula(block["casimir"], "target.casimir", declared)

    block = data.get("elimination")
    if block is not None:
        try:
            doc.elimination = Elimination(
                block["pivot"],
                _formula(block["alpha"], "elimination.alpha", declared),
                _formula(block["beta"], "elimination.beta", declared),
            )
        except KeyError as exc:
            raise DocumentError(f"elimination: missing field {exc}") from None
        if doc.elimination.pivot not in VARIABLES:
            raise DocumentError(f"elimination.pivot must be one of {list(VARIABLES)}")

    doc.extra = {k: v for k, v in data.items() if k not in _KNOWN_KEYS}
    return doc


def loads(text: str) -> StructureDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    return from_dict(data)


def load(path) -> StructureDocument:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _parameters_block(S: StructureMatrix) -> dict:
    out = {}
    for name in sorted(set(S.params) | set(S.param_ranges)):
        if name in S.param_ranges:
            spec = {"range": list(S.param_ranges[name])}
            if name in S.params:
                spec["value"] = S.params[name]
            out[name] = spec
        else:
            out[name] = S.params[name]
    return out


def to_dict(doc: StructureDocument) -> dict:
    S = doc.structure
    out: dict = {"name": S.name, "variables": list(S.variables)}
    if S.params or S.param_ranges:
        out["parameters"] = _parameters_block(S)
    out["u"], out["v"], out["w"] = (to_string(e) for e in S.entries)
    if doc.casimir is not None:
        out["casimir"] = to_string(doc.casimir)
    out["domain"] = S.domain.to_dict()
    if doc.diffeomorphism is not None:
        out["diffeomorphism"] = doc.diffeomorphism.to_dict()
    if doc.target is not None:
        block = {k: to_string(e) for k, e in zip(("u", "v", "w"), doc.target.entries)}
        if doc.target_casimir is not None:
            block["casimir"] = to_string(doc.target_casimir)
        block["domain"] = doc.target.domain.to_dict()
        out["target"] = block
    if doc.elimination is not None:
        e = doc.elimination
        out["elimination"] = {"pivot": e.pivot, "alpha": to_string(e.alpha), "beta": to_string(e.beta)}
    if doc.psi is not None:
        out["psi"] = to_string(doc.psi)
    out.update(doc.extra)
    return out


def dumps(doc: StructureDocument) -> str:
    return json.dumps(to_dict(doc), indent=2)


def from_entry(entry: CatalogEntry) -> StructureDocument:
    recipe: Optional[Case3Recipe] = entry.case3
    return StructureDocument(
        structure=entry.structure,
        casimir=entry.casimir,
        diffeomorphism=recipe.diffeomorphism if recipe else None,
        target=recipe.target if recipe else None,
        target_casimir=recipe.casimir_y if recipe else None,
        elimination=entry.elimination,
        extra={"description": entry.description},
    )
