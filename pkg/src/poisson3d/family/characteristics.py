from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ..errors import DomainError, StepRejectedError
from ..expr import lambdify
from ..poisson import StructureMatrix
from .core import characteristic_field, lambda_of

XI_FLOOR = 1e-12


@dataclass
class Trajectory:
    t: np.ndarray
    points: np.ndarray
    xi: Optional[np.ndarray] = None
    step: float = 0.0
    order: int = 4
    method: str = "rk4, step-halving error estimate"
    variables: tuple = ("x1", "x2", "x3")
    params: dict = field(default_factory=dict)
    halted: bool = False
    halt_reason: str = ""
    max_error_estimate: float = 0.0
    xi_small: int = 0

    def __len__(self):
        return len(self.t)

    @property
    def final(self) -> np.ndarray:
        return self.points[-1]


def _make_rk4(n: int):
    """Unrolled classical RK4 step for an n-dimensional autonomous system."""
    ys = [f"y{i}" for i in range(n)]

    def stage(k, src, scale):
        args = ", ".join(f"{y} + {scale} * {src}{i}" for i, y in enumerate(ys))
        return f"    {', '.join(f'{k}{i}' for i in range(n))}, = f({args})"

    lines = [
        f"def step(f, y, h):",
        f"    {', '.join(ys)}, = y",
        "    hh = 0.5 * h",
        f"    {', '.join(f'a{i}' for i in range(n))}, = f({', '.join(ys)})",
        stage("b", "a", "hh"),
        stage("c", "b", "hh"),
        stage("d", "c", "h"),
        "    h6 = h / 6.0",
        "    return (" + " ".join(
            f"{y} + h6 * (a{i} + 2.0 * b{i} + 2.0 * c{i} + d{i})," for i, y in enumerate(ys)
        ) + ")",
    ]
    namespace: dict = {}
    exec("\n".join(lines), namespace)
    return namespace["step"]


_RK4 = {3: _make_rk4(3), 4: _make_rk4(4)}


def integrate_characteristics(
    S: StructureMatrix,
    x0: Sequence[float],
    t_end: float,
    step: float,
    xi0: Optional[float] = None,
    params: Optional[Mapping[str, float]] = None,
    error_tol: float = 1e-6,
) -> Trajectory:
    """Integrate dx/dt = (u0 - v0, w0 - u0, v0 - w0), optionally carrying
    d xi/dt = lambda * xi, with classical RK4 at fixed step.

    Each step of size ``step`` is also taken as two half steps; the half-step
    result is kept and the difference is the local error estimate.  An
    estimate above ``error_tol`` (relative to max(1, |state|)) raises
    StepRejectedError carrying the partial trajectory.  Leaving the domain
    halts integration and flags the trajectory instead.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    values = dict(S.params)
    values.update(params or {})
    if not S.domain.contains(x0):
        raise DomainError(f"initial point {tuple(x0)} is outside {S.domain.describe()}")

    field_ = list(characteristic_field(S))
    carry = xi0 is not None
    args = list(S.variables)
    if carry:
        lam = lambda_of(S)
        rhs_exprs = field_ + [lam]
        compiled = lambdify(rhs_exprs, args, values)

        def f(a, b, c, xi):
            d1, d2, d3, lam_val = compiled(a, b, c)
            return (d1, d2, d3, lam_val * xi)

        y = tuple(float(v) for v in x0) + (float(xi0),)
    else:
        f = lambdify(field_, args, values)
        y = tuple(float(v) for v in x0)

    rk4 = _RK4[len(y)]
    bounds = tuple(zip(S.domain.lower, S.domain.upper))
    n_steps = int(math.ceil(t_end / step - 1e-9)) if t_end > 0 else 0
    times = [0.0]
    states = [y]
    worst = 0.0
    xi_small = 0
    halted, reason = False, ""
    t = 0.0
    for k in range(n_steps):
        h = min(step, t_end - t)
        try:
            full = rk4(f, y, h)
            half = rk4(f, rk4(f, y, 0.5 * h), 0.5 * h)
        except DomainError as exc:
            halted, reason = True, f"evaluation failed at t={t:.6g}: {exc}"
            break
        scale = max(1.0, max(abs(v) for v in half))
        err = max(abs(a - b) for a, b in zip(full, half)) / scale
        worst = max(worst, err)
        if err > error_tol:
            partial = _pack(S, times, states, carry, step, values, True, "step rejected", worst, xi_small)
            raise StepRejectedError(
                f"local error estimate {err:.2e} exceeds {error_tol:.0e} at t={t:.6g}; reduce the step",
                partial,
            )
        if not all(lo < v < hi for v, (lo, hi) in zip(half, bounds)):
            halted, reason = True, f"left the domain at t={t + h:.6g}"
            break
        y = half
        t = (k + 1) * step if k + 1 < n_steps else t_end
        times.append(t)
        states.append(y)
        if carry and abs(y[3]) <= XI_FLOOR:
            xi_small += 1
    return _pack(S, times, states, carry, step, values, halted, reason, worst, xi_small)


def _pack(S, times, states, carry, step, values, halted, reason, worst, xi_small) -> Trajectory:
    arr = np.array(states, dtype=float)
    return Trajectory(
        t=np.array(times),
        points=arr[:, :3],
        xi=arr[:, 3] if carry else None,
        step=step,
        variables=tuple(S.variables),
        params=dict(values),
        halted=halted,
        halt_reason=reason,
        max_error_estimate=worst,
        xi_small=xi_small,
    )
