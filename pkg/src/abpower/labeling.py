"""Intended class assignments and neighborhood switching probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .streams import substream


@dataclass(frozen=True, eq=False)
class ClassLabels:
    """Labels over {A, B}; stored as a read-only boolean array, True meaning A."""

    is_a: np.ndarray

    def __post_init__(self):
        arr = np.array(self.is_a, dtype=bool).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "is_a", arr)

    @classmethod
    def from_string(cls, labels: str) -> "ClassLabels":
        """Accepts ``"ABB"``, ``"A,B,B"`` or one label per line."""
        tokens = [t for t in labels.replace(",", " ").split()]
        if len(tokens) == 1 and len(tokens[0]) > 1:
            tokens = list(tokens[0])
        bad = [t for t in tokens if t.upper() not in ("A", "B")]
        if bad:
            raise ValueError(f"labels must be A or B, got {bad[0]!r}")
        return cls(np.array([t.upper() == "A" for t in tokens], dtype=bool))

    def __len__(self) -> int:
        return int(self.is_a.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, ClassLabels) and np.array_equal(self.is_a, other.is_a)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def n_a(self) -> int:
        return int(self.is_a.sum())

    @property
    def n_b(self) -> int:
        return self.n - self.n_a

    @property
    def balanced(self) -> bool:
        return self.n_a == self.n_b

    def complement(self) -> "ClassLabels":
        return ClassLabels(~self.is_a)

    def to_string(self, sep: str = "") -> str:
        return sep.join("A" if a else "B" for a in self.is_a)

    def to_lines(self) -> str:
        return self.to_string("\n") + "\n"


def read_labels(path) -> ClassLabels:
    with open(path, encoding="utf-8") as fh:
        return ClassLabels.from_string(fh.read())


def assign_labels(n: int, p_a: float, seed: int = 0) -> ClassLabels:
    """Exactly ceil(n * p_a) A labels at uniformly random positions, the rest B."""
    if n < 2:
        raise ValueError("need at least 2 units")
    if not 0.0 <= p_a <= 1.0:
        raise ValueError("p_a must lie in [0, 1]")
    # guard ceil against 0.1 * 30 == 3.0000000000000004
    n_a = min(n, math.ceil(round(n * p_a, 9)))
    rng = substream(seed, 2)
    is_a = np.zeros(n, dtype=bool)
    is_a[rng.permutation(n)[:n_a]] = True
    return ClassLabels(is_a)


def check_switch_probs(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("switch probabilities must lie in [0, 1]")
    return p


def neighborhood_switch_probs(g: Graph, c: ClassLabels) -> np.ndarray:
    """Fraction of each node's neighbors carrying the opposite label; 0 for isolated nodes."""
    if len(c) != g.n:
        raise ValueError(f"label vector has length {len(c)}, graph has {g.n} nodes")
    indptr, indices = g.neighbor_arrays()
    deg = np.diff(indptr)
    owner = np.repeat(np.arange(g.n), deg)
    opposite = np.bincount(owner, weights=c.is_a[indices] != c.is_a[owner], minlength=g.n)
    p = np.zeros(g.n, dtype=float)
    np.divide(opposite, deg, out=p, where=deg > 0)
    return p


def write_switch_probs(path, p: np.ndarray, g: Graph | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id,p\n")
        for i, pi in enumerate(p):
            node = g.original_id(i) if g is not None else i
            fh.write(f"{node},{pi:.12g}\n")
