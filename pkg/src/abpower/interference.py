"""Bernoulli label switching: analytic moments, sampling, and the standardized gap.

Each unit ``j`` independently ends up with the opposite of its intended label
with probability ``p[j]``.  ``n_S`` counts units whose realized label equals
the intended one and ``n_D = n - n_S`` those that flipped; the power of a
misspecified test depends on the data only through ``gap = n_S - n_D``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .labeling import ClassLabels, check_switch_probs
from .streams import substream


class DegenerateSwitchingError(ValueError):
    """Raised when every switch probability is 0 or 1, so the gap has no spread."""


@dataclass(frozen=True)
class SwitchMoments:
    mu_p: float
    s_n_sq: float
    exp_nA: float
    exp_nB: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SwitchSummary:
    n_S: int
    n_D: int
    n_AA: int
    n_AB: int
    n_BA: int
    n_BB: int
    nA_tilde: int
    nB_tilde: int

    @property
    def gap(self) -> int:
        return self.n_S - self.n_D

    def to_dict(self) -> dict:
        return asdict(self)


def _check_lengths(p: np.ndarray, c: ClassLabels) -> None:
    if p.size != len(c):
        raise ValueError(f"switch probabilities have length {p.size}, labels {len(c)}")


def switch_moments(p, c: ClassLabels) -> SwitchMoments:
    p = check_switch_probs(p)
    _check_lengths(p, c)
    n = p.size
    # expected realized A's: A's that stay plus B's that flip
    exp_na = float(np.sum(1.0 - p[c.is_a]) + np.sum(p[~c.is_a]))
    return SwitchMoments(
        mu_p=float(n - 2.0 * p.sum()),
        s_n_sq=float(np.sum(p * (1.0 - p))),
        exp_nA=exp_na,
        exp_nB=float(n - exp_na),
    )


def summarize(c: ClassLabels, d: ClassLabels) -> SwitchSummary:
    if len(c) != len(d):
        raise ValueError("intended and realized labels differ in length")
    ca, da = c.is_a, d.is_a
    n_aa = int(np.sum(ca & da))
    n_ab = int(np.sum(ca & ~da))
    n_ba = int(np.sum(~ca & da))
    n_bb = int(np.sum(~ca & ~da))
    return SwitchSummary(
        n_S=n_aa + n_bb,
        n_D=n_ab + n_ba,
        n_AA=n_aa,
        n_AB=n_ab,
        n_BA=n_ba,
        n_BB=n_bb,
        nA_tilde=n_aa + n_ba,
        nB_tilde=n_bb + n_ab,
    )


def draw_flips(p: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    shape = p.shape if size is None else (size, p.size)
    return rng.random(shape) < p


def sample_switch(p, c: ClassLabels, seed: int = 0) -> tuple[ClassLabels, SwitchSummary]:
    p = check_switch_probs(p)
    _check_lengths(p, c)
    flips = draw_flips(p, substream(seed, 3))
    d = ClassLabels(c.is_a ^ flips)
    return d, summarize(c, d)


def standardized_gap(s: SwitchSummary, m: SwitchMoments) -> float:
    if m.s_n_sq <= 0:
        raise DegenerateSwitchingError("s_n^2 = 0: every switch probability is 0 or 1")
    return (s.n_S - s.n_D - m.mu_p) / (2.0 * math.sqrt(m.s_n_sq))
