from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Domain:
    """Open box ``prod_i (lower_i, upper_i)``.

    ``positive`` flags coordinates restricted to positive values (e.g. the
    positive orthant); such a coordinate must have a non-negative lower bound.
    """

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]
    positive: tuple[bool, bool, bool] = (False, False, False)

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        positive = tuple(bool(v) for v in self.positive)
        if not (len(lower) == len(upper) == len(positive)):
            raise ValueError("domain bounds must have matching lengths")
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError(f"coordinate {i + 1}: bounds must be finite")
            if not lo < hi:
                raise ValueError(f"coordinate {i + 1}: lower bound {lo} is not below {hi}")
            if positive[i] and lo < 0:
                raise ValueError(f"coordinate {i + 1} is flagged positive but lower bound is {lo}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "positive", positive)

    @classmethod
    def box(cls, lo: float, hi: float, positive: bool = False, dim: int = 3) -> "Domain":
        return cls((lo,) * dim, (hi,) * dim, (positive,) * dim)

    @classmethod
    def positive_orthant(cls, lo: float = 0.1, hi: float = 5.0) -> "Domain":
        return cls.box(lo, hi, positive=True)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points strictly inside the box, shape ``(n, dim)``."""
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        u = rng.random((n, self.dim))
        pts = lo + u * (hi - lo)
        # rng.random is in [0, 1): keep the lower face out as well
        return np.where(pts <= lo, lo + 0.5 * (hi - lo), pts)

    def contains(self, point: Sequence[float]) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p > np.asarray(self.lower)) and np.all(p < np.asarray(self.upper)))

    def intersect(self, other: Optional["Domain"]) -> "Domain":
        if other is None:
            return self
        return Domain(
            tuple(max(a, b) for a, b in zip(self.lower, other.lower)),
            tuple(min(a, b) for a, b in zip(self.upper, other.upper)),
            tuple(a or b for a, b in zip(self.positive, other.positive)),
        )

    def to_dict(self) -> dict:
        out = {"lower": list(self.lower), "upper": list(self.upper)}
        if any(self.positive):
            out["positive"] = list(self.positive)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Domain":
        positive = data.get("positive", [False] * len(data["lower"]))
        return cls(tuple(data["lower"]), tuple(data["upper"]), tuple(positive))

    def describe(self) -> str:
        parts = [f"({lo:g}, {hi:g})" for lo, hi in zip(self.lower, self.upper)]
        text = " x ".join(parts)
        if all(self.positive):
            text += " in the open positive orthant"
        return text
