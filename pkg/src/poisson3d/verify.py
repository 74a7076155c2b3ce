"""Sampling-based verification of identities and conservation laws.

Every "is this expression identically zero" question in the package is
answered here, by evaluating at seeded random points of a box.  Points are
drawn in fixed-size batches whose generator is keyed by ``(seed, batch
index)``, so the first ``n`` accepted points do not depend on how many are
requested: a larger sample always contains the smaller one.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import SamplingError
from .expr import VARIABLES, Domain, Expr, as_expr, evaluate_array


class Verdict(str, enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SamplingConfig:
    n_points: int = 1000
    seed: int = 42
    tol: float = 1e-9
    guard: float = 1e6
    max_retries: Optional[int] = None
    batch_size: int = 256

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def retry_budget(self) -> int:
        return 100 * self.n_points if self.max_retries is None else self.max_retries

    def replace(self, **changes) -> "SamplingConfig":
        values = {**self.__dict__, **changes}
        return SamplingConfig(**values)


DEFAULT_CONFIG = SamplingConfig()


@dataclass(frozen=True)
class VerificationReport:
    verdict: Verdict
    max_abs_residual: float
    mean_abs_residual: float
    n_samples: int
    seed: int
    witness: Optional[dict] = None
    skipped: int = 0
    label: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.ZERO

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        out = {
            "verdict": str(self.verdict),
            "max_abs_residual": self.max_abs_residual,
            "mean_abs_residual": self.mean_abs_residual,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "witness": self.witness,
            "skipped": self.skipped,
        }
        if self.label:
            out["label"] = self.label
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def summary(self) -> str:
        text = f"{self.verdict}: max |r| = {self.max_abs_residual:.3e} over {self.n_samples} points"
        if self.witness is not None:
            coords = ", ".join(f"{k}={v:.6g}" for k, v in self.witness.items() if k != "residual")
            text += f"; witness ({coords})"
        return text


def _draw(domain: Domain, param_ranges: Mapping[str, tuple[float, float]], seed: int, index: int, size: int):
    rng = np.random.default_rng([seed, index])
    points = domain.sample(rng, size)
    sampled = {}
    for name in sorted(param_ranges):
        lo, hi = param_ranges[name]
        sampled[name] = lo + rng.random(size) * (hi - lo)
    return points, sampled


def check_identities(
    exprs: Union[Expr, Sequence[Expr]],
    domain: Domain,
    cfg: SamplingConfig = DEFAULT_CONFIG,
    variables: Sequence[str] = VARIABLES,
    params: Optional[Mapping[str, float]] = None,
    param_ranges: Optional[Mapping[str, tuple[float, float]]] = None,
    label: str = "",
) -> VerificationReport:
    """Test that every expression vanishes on ``domain``.

    The residual at a point is the largest absolute value among ``exprs``.
    Points where some subexpression is undefined or exceeds ``cfg.guard`` are
    skipped and replaced.  Parameters listed in ``param_ranges`` but not bound
    in ``params`` are sampled alongside the coordinates.
    """
    if isinstance(exprs, Expr):
        exprs = [exprs]
    exprs = [as_expr(e) for e in exprs]
    params = dict(params or {})
    ranges = {k: v for k, v in (param_ranges or {}).items() if k not in params}

    accepted_pts: list[np.ndarray] = []
    accepted_res: list[np.ndarray] = []
    accepted_par: list[dict] = []
    n_accepted = 0
    skipped = 0
    index = 0
    while n_accepted < cfg.n_points:
        points, sampled = _draw(domain, ranges, cfg.seed, index, cfg.batch_size)
        index += 1
        env = {v: points[:, i] for i, v in enumerate(variables)}
        env.update(params)
        env.update(sampled)
        residual = np.zeros(cfg.batch_size)
        valid = np.ones(cfg.batch_size, dtype=bool)
        for e in exprs:
            vals, ok = evaluate_array(e, env, guard=cfg.guard)
            valid &= ok
            residual = np.maximum(residual, np.abs(np.where(ok, vals, 0.0)))
        need = cfg.n_points - n_accepted
        positions = np.flatnonzero(valid)
        if len(positions) > need:
            # skipped counts only rejections before the last accepted point
            cut = positions[need - 1] + 1
            skipped += int(cut - need)
            positions = positions[:need]
        else:
            skipped += int(cfg.batch_size - len(positions))
        if skipped > cfg.retry_budget:
            raise SamplingError(
                f"{skipped} sampled points rejected (undefined or above guard {cfg.guard:g}); "
                f"domain {domain.describe()} is too restrictive"
            )
        accepted_pts.append(points[positions])
        accepted_res.append(residual[positions])
        accepted_par.append({k: v[positions] for k, v in sampled.items()})
        n_accepted += len(positions)

    pts = np.concatenate(accepted_pts)
    res = np.concatenate(accepted_res)
    worst = int(np.argmax(res))
    max_res = float(res[worst])
    verdict = Verdict.ZERO if max_res <= cfg.tol else Verdict.NONZERO
    witness = None
    if verdict is Verdict.NONZERO:
        witness = {v: float(pts[worst, i]) for i, v in enumerate(variables)}
        for name in ranges:
            witness[name] = float(np.concatenate([c[name] for c in accepted_par])[worst])
        witness["residual"] = max_res
    return VerificationReport(
        verdict=verdict,
        max_abs_residual=max_res,
        mean_abs_residual=float(np.mean(res)),
        n_samples=int(len(res)),
        seed=cfg.seed,
        witness=witness,
        skipped=skipped,
        label=label,
    )


def check_pointwise_equal(
    left: Sequence[Expr],
    right: Sequence[Expr],
    domain: Domain,
    cfg: SamplingConfig = DEFAULT_CONFIG,
    **kwargs,
) -> VerificationReport:
    return check_identities([a - b for a, b in zip(left, right)], domain, cfg, **kwargs)


def check_jacobi(S, cfg: SamplingConfig = DEFAULT_CONFIG) -> VerificationReport:
    """Verdict on the 3D Jacobi residual of a structure matrix over its domain."""
    from .poisson import jacobi_residual

    return check_identities(
        jacobi_residual(S),
        S.domain,
        cfg,
        variables=S.variables,
        params=S.params,
        param_ranges=S.param_ranges,
        label=f"jacobi {S.name}".strip(),
    )


@dataclass(frozen=True)
class FamilyReport:
    reports: dict
    verdict: Verdict

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.ZERO

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {
            "verdict": str(self.verdict),
            "members": {psi: r.to_dict() for psi, r in self.reports.items()},
        }


DEFAULT_PSI_SET = ("0", "1", "k1", "k2", "k1*k2", "k1^2 - k2")


def check_family(F, psis: Iterable = DEFAULT_PSI_SET, cfg: SamplingConfig = DEFAULT_CONFIG) -> FamilyReport:
    """Materialise ``F`` for each generator in ``psis`` and run check_jacobi."""
    reports = {}
    for psi in psis:
        member = F.materialize(psi)
        reports[str(psi)] = check_jacobi(member, cfg)
    ok = all(r.ok for r in reports.values())
    return FamilyReport(reports, Verdict.ZERO if ok else Verdict.NONZERO)


Quantity = Union[Expr, str, Callable[[np.ndarray, Optional[float]], float]]


@dataclass
class ConservationReport:
    drifts: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    relative: dict = field(default_factory=dict)

    def max_drift(self) -> float:
        return max(self.drifts.values(), default=0.0)

    def to_dict(self) -> dict:
        return {
            name: {"max_drift": self.drifts[name], "relative": self.relative[name]}
            for name in self.drifts
        }


def _quantity_values(q, trajectory, params) -> np.ndarray:
    if callable(q) and not isinstance(q, Expr):
        xi = trajectory.xi
        return np.array(
            [q(p, None if xi is None else xi[i]) for i, p in enumerate(trajectory.points)]
        )
    e = as_expr(q)
    env = {v: trajectory.points[:, i] for i, v in enumerate(trajectory.variables)}
    env.update(params)
    if trajectory.xi is not None:
        env["xi"] = trajectory.xi
    vals, ok = evaluate_array(e, env)
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise SamplingError(f"quantity {e} undefined along trajectory at sample {bad}")
    return vals


def conservation_report(
    trajectory,
    quantities: Union[Sequence[Quantity], Mapping[str, Quantity]],
    params: Optional[Mapping[str, float]] = None,
    floor: float = 1e-8,
) -> ConservationReport:
    """Largest drift of each quantity from its value at the first sample.

    Drift is relative to the initial value, or absolute when that value is
    smaller than ``floor`` in magnitude.
    """
    if trajectory.points.shape[0] == 0:
        raise ValueError("empty trajectory")
    if not isinstance(quantities, Mapping):
        quantities = {str(q) if not callable(q) or isinstance(q, Expr) else getattr(q, "__name__", f"q{i}"): q
                      for i, q in enumerate(quantities)}
    params = dict(params if params is not None else getattr(trajectory, "params", {}) or {})
    report = ConservationReport()
    for name, q in quantities.items():
        vals = _quantity_values(q, trajectory, params)
        ref = vals[0]
        relative = bool(abs(ref) >= floor)
        scale = abs(ref) if relative else 1.0
        drift = np.abs(vals - ref) / scale
        report.series[name] = drift
        report.drifts[name] = float(np.max(drift))
        report.relative[name] = relative
    return report


def verdict_of(reports: Iterable[VerificationReport]) -> Verdict:
    return Verdict.ZERO if all(r.ok for r in reports) else Verdict.NONZERO


def merge_reports(reports: Sequence[VerificationReport], label: str = "") -> VerificationReport:
    """Combine reports over the same sample count (max of maxima, mean of means)."""
    worst = max(reports, key=lambda r: r.max_abs_residual)
    verdict = verdict_of(reports)
    return VerificationReport(
        verdict=verdict,
        max_abs_residual=worst.max_abs_residual,
        mean_abs_residual=float(np.mean([r.mean_abs_residual for r in reports])),
        n_samples=min(r.n_samples for r in reports),
        seed=reports[0].seed,
        witness=next((r.witness for r in reports if not r.ok), None) if verdict is Verdict.NONZERO else None,
        skipped=sum(r.skipped for r in reports),
        label=label,
    )
