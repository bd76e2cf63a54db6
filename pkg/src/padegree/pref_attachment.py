"""Preferential-attachment graphs with one edge per new vertex.

Model 1 starts from vertices 1, 2 joined by the edge 2 -> 1.  Vertex m + 1
sends one edge to an existing vertex chosen with probability proportional
to its degree.

Model 2 starts from vertex 1 with a self-loop.  Vertex m + 1 attaches to
an existing vertex v with probability deg(v) / (2m + 1) and to itself
with probability 1 / (2m + 1); a loop adds two to the degree.

Degree-proportional choice is a uniform pick from the multiset of edge
endpoints.  The degree of a fixed vertex follows a (2,0;1,1) urn, which
``degree_law_exact`` uses.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError
from .pmf import Pmf
from .urns import UrnSpec, exact_pmf, second_moment_white

__all__ = [
    "Model",
    "GraphTrace",
    "DegreeLawQuery",
    "grow",
    "grow_many",
    "degree_law_exact",
    "scaling_b",
]


class Model(Enum):
    MODEL1 = 1
    MODEL2 = 2

    @classmethod
    def parse(cls, value) -> "Model":
        if isinstance(value, Model):
            return value
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise DomainError(f"unknown model {value!r}; expected 1 or 2") from None


@dataclass(frozen=True)
class GraphTrace:
    model: Model
    n: int
    degrees: np.ndarray  # degrees[v - 1] is the degree of vertex v
    edges: Optional[np.ndarray] = None  # rows (source, target)

    def degree(self, v: int) -> int:
        return int(self.degrees[v - 1])

    def edges_csv(self) -> str:
        if self.edges is None:
            raise ValueError("graph was grown without keeping edges")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "target"])
        w.writerows(self.edges.tolist())
        return buf.getvalue()


def _min_n(model: Model) -> int:
    return 2 if model is Model.MODEL1 else 1


def grow(model, n: int, rng: np.random.Generator, keep_edges: bool = False) -> GraphTrace:
    """Grow one graph with n vertices."""
    model = Model.parse(model)
    if n < _min_n(model):
        raise DomainError(f"{model.name} needs n >= {_min_n(model)}")
    m0 = 2 if model is Model.MODEL1 else 1
    ends = np.empty(2 * n, dtype=np.int64)
    ends[:2] = (2, 1) if model is Model.MODEL1 else (1, 1)
    edges = [(2, 1)] if model is Model.MODEL1 else [(1, 1)]
    size = 2
    for m in range(m0, n):
        new = m + 1
        if model is Model.MODEL1:
            target = int(ends[rng.integers(size)])
        else:
            slot = rng.integers(size + 1)  # size = 2m; the extra slot is the loop
            target = new if slot == size else int(ends[slot])
        ends[size] = new
        ends[size + 1] = target
        size += 2
        if keep_edges:
            edges.append((new, target))
    degrees = np.bincount(ends[:size], minlength=n + 1)[1:]
    return GraphTrace(model, n, degrees, np.array(edges, dtype=np.int64) if keep_edges else None)


def grow_many(model, n: int, replicates: int, rng: np.random.Generator) -> np.ndarray:
    """Degree arrays of independent graphs, shape (replicates, n)."""
    model = Model.parse(model)
    if n < _min_n(model):
        raise DomainError(f"{model.name} needs n >= {_min_n(model)}")
    rows = np.arange(replicates)
    ends = np.empty((replicates, 2 * n), dtype=np.int64)
    ends[:, :2] = (2, 1) if model is Model.MODEL1 else (1, 1)
    size = 2
    m0 = 2 if model is Model.MODEL1 else 1
    for m in range(m0, n):
        new = m + 1
        if model is Model.MODEL1:
            target = ends[rows, rng.integers(size, size=replicates)]
        else:
            slot = rng.integers(size + 1, size=replicates)
            target = np.where(slot == size, new, ends[rows, np.minimum(slot, size - 1)])
        ends[:, size] = new
        ends[:, size + 1] = target
        size += 2
    deg = np.zeros((replicates, n + 1), dtype=np.int64)
    np.add.at(deg, (rows[:, None], ends[:, :size]), 1)
    return deg[:, 1:]


@dataclass(frozen=True)
class DegreeLawQuery:
    """Degree of vertex i in G_n, with the equivalent (2,0;1,1)^{draws}_{urn_i,1} urn."""

    model: Model
    n: int
    i: int

    def __post_init__(self):
        model = Model.parse(self.model)
        object.__setattr__(self, "model", model)
        lo = 2 if model is Model.MODEL1 else 1
        if not lo <= self.i <= self.n:
            raise DomainError(f"{model.name} needs {lo} <= i <= n, got i={self.i}, n={self.n}")

    @property
    def urn_i(self) -> int:
        return 2 * self.i - 3 if self.model is Model.MODEL1 else 2 * self.i - 2

    @property
    def draws(self) -> int:
        return self.n - self.i if self.model is Model.MODEL1 else self.n - self.i + 1

    @property
    def limit_s(self) -> float:
        """Index of the limiting K_s law, (urn_i + 1) / 2."""
        return (self.urn_i + 1) / 2.0


def degree_law_exact(q: DegreeLawQuery) -> Pmf:
    return exact_pmf(UrnSpec.preferential(q.urn_i, 1), q.draws)


def scaling_b(q: DegreeLawQuery) -> float:
    """b = sqrt(E W_{n,i}^2)."""
    return math.sqrt(second_moment_white(q.urn_i, q.draws))
