"""Experiment configuration and seed derivation."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DomainError

__all__ = ["ExperimentConfig", "OUTPUT_DIR_ENV", "task_rng", "resolve_output"]

OUTPUT_DIR_ENV = "PADEGREE_OUTPUT_DIR"

_MODELS = ("1", "2", "urn")
_FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    seed: int = 0
    model: str = "urn"
    i_list: list[int] = field(default_factory=lambda: [1])
    n_list: list[int] = field(default_factory=lambda: [64, 128, 256, 512, 1024])
    replicates: int = 10_000
    beta_threshold: Optional[float] = None  # None means 3 / b
    output_path: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        self.model = str(self.model)
        if self.model not in _MODELS:
            raise DomainError(f"model must be one of {_MODELS}, got {self.model!r}")
        if self.format not in _FORMATS:
            raise DomainError(f"format must be one of {_FORMATS}, got {self.format!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not self.i_list or not self.n_list:
            raise DomainError("i_list and n_list must be non-empty")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise DomainError("n_list must be strictly increasing")
        if self.replicates < 1:
            raise DomainError("replicates must be >= 1")
        if self.beta_threshold is not None and self.beta_threshold < 0:
            raise DomainError("beta_threshold must be >= 0")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def task_rng(seed: int, task_index: int) -> np.random.Generator:
    """Independent stream for one task, fixed by (seed, task_index) alone."""
    return np.random.default_rng([int(seed), int(task_index)])


def resolve_output(path: Optional[str]) -> Optional[Path]:
    """Relative output paths land in $PADEGREE_OUTPUT_DIR when it is set."""
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p
