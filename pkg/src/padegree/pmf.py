"""Finite probability mass functions on a contiguous integer support."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Pmf"]

_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Pmf:
    """P(X = offset + k) = probs[k]."""

    offset: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        if p.ndim != 1 or p.size == 0:
            raise DomainError("probs must be a non-empty 1-d sequence")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite and non-negative")
        total = math.fsum(p)
        if abs(total - 1.0) > _SUM_TOL:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, offset: int, weights) -> "Pmf":
        """Normalize non-negative weights; trailing/leading zeros are trimmed."""
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w)
        if not total > 0:
            raise DomainError("weights must have positive total mass")
        nz = np.flatnonzero(w)
        lo, hi = int(nz[0]), int(nz[-1])
        return cls(offset + lo, w[lo:hi + 1] / total)

    @classmethod
    def point_mass(cls, value: int) -> "Pmf":
        return cls(value, np.array([1.0]))

    @classmethod
    def from_dict(cls, mapping: dict) -> "Pmf":
        keys = sorted(int(k) for k in mapping)
        lo, hi = keys[0], keys[-1]
        w = np.zeros(hi - lo + 1)
        for k, v in mapping.items():
            w[int(k) - lo] = float(v)
        return cls(lo, w)

    # -- basic queries -------------------------------------------------------

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.probs.size)

    def __len__(self) -> int:
        return self.probs.size

    def prob(self, value: int) -> float:
        k = int(value) - self.offset
        return float(self.probs[k]) if 0 <= k < self.probs.size else 0.0

    def to_dict(self) -> dict[int, float]:
        return {int(v): float(p) for v, p in zip(self.support, self.probs) if p > 0}

    def expect(self, fn) -> float:
        vals = np.array([fn(float(v)) for v in self.support])
        return math.fsum(vals * self.probs)

    def moment(self, r: float) -> float:
        return math.fsum(self.support.astype(float) ** r * self.probs)

    @property
    def mean(self) -> float:
        return self.moment(1)

    def cdf(self, x: float) -> float:
        """P(X <= x)."""
        k = math.floor(x) - self.offset
        if k < 0:
            return 0.0
        return min(math.fsum(self.probs[: k + 1]), 1.0)

    def cdf_values(self) -> np.ndarray:
        """P(X <= v) for each support point v."""
        return np.minimum(np.cumsum(self.probs), 1.0)

    def total_variation(self, other: "Pmf") -> float:
        lo = min(self.offset, other.offset)
        hi = max(self.offset + len(self), other.offset + len(other))
        a = np.zeros(hi - lo)
        b = np.zeros(hi - lo)
        a[self.offset - lo:self.offset - lo + len(self)] = self.probs
        b[other.offset - lo:other.offset - lo + len(other)] = other.probs
        return 0.5 * math.fsum(np.abs(a - b))

    def sample(self, rng: np.random.Generator, size=None):
        return self.offset + rng.choice(self.probs.size, size=size, p=self.probs)

    # -- serialization -------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "probability"])
        for v, p in zip(self.support, self.probs):
            w.writerow([int(v), repr(float(p))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Pmf":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls.from_dict({int(r["value"]): float(r["probability"]) for r in rows})

    def to_json(self) -> str:
        return json.dumps({"offset": self.offset, "probs": [float(p) for p in self.probs]})

    @classmethod
    def from_json(cls, text: str) -> "Pmf":
        obj = json.loads(text)
        return cls(int(obj["offset"]), np.asarray(obj["probs"], dtype=float))
