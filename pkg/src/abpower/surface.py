"""Grid sweeps of estimated power (power curves and surfaces)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence, Union

from .graph import Graph
from .interference import switch_moments
from .labeling import assign_labels, neighborhood_switch_probs
from .power import UNBALANCED, BernoulliModel, NormalModel, TestConfig, power_from_gap
from .streams import derive_seed, ordered_map

AXES = ("n", "p_A", "switch_prob", "delta")


@dataclass(frozen=True)
class GraphSource:
    """Switch probabilities from neighborhoods in ``graph``, averaged over random label draws."""

    graph: Graph
    draws: int = 25


@dataclass(frozen=True)
class UniformP:
    p: float


@dataclass(frozen=True)
class FixedGap:
    """A fixed ``n_S - n_D``; ``fraction`` expresses it relative to ``n``."""

    gap: float | None = None
    fraction: float | None = None

    def resolve(self, n: int) -> float:
        if (self.gap is None) == (self.fraction is None):
            raise ValueError("give exactly one of gap or fraction")
        return self.gap if self.gap is not None else self.fraction * n


Source = Union[GraphSource, UniformP, FixedGap]


@dataclass(frozen=True)
class SurfaceRow:
    point: dict
    beta: float
    assumption_flags: tuple[str, ...]


def with_delta(cfg: TestConfig, delta: float) -> TestConfig:
    """Move ``mu_A`` so that ``mu_A - mu_B == delta``, keeping ``mu_B``."""
    m = cfg.model
    if isinstance(m, NormalModel):
        return replace(cfg, model=NormalModel(m.mu_B + delta, m.mu_B, m.sigma))
    return replace(cfg, model=BernoulliModel(m.mu_B + delta, m.mu_B))


def _class_sizes(n: int, p_a: float) -> tuple[int, int]:
    n_a = min(n, math.ceil(round(n * p_a, 9)))
    return n_a, n - n_a


def power_surface(
    grid: Mapping[str, Sequence[float]],
    base: TestConfig,
    source: Source,
    seed: int = 0,
    n: int | None = None,
    p_a: float = 0.5,
    threads: int | None = 1,
    literal: bool = False,
) -> list[SurfaceRow]:
    """Estimated power at every point of the Cartesian product of ``grid``.

    Axes are any of ``n``, ``p_A``, ``switch_prob`` and ``delta``; axes not in
    the grid take their value from ``n``, ``p_a``, the source and ``base``.
    Graph sources draw labels keyed by the ``p_A`` grid index, so points that
    differ only in ``delta`` share the same label draws.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must have at least one axis with at least one value")
    unknown = set(grid) - set(AXES)
    if unknown:
        raise ValueError(f"unknown grid axes {sorted(unknown)}; expected {AXES}")
    axes = [a for a in grid]
    if isinstance(source, GraphSource):
        for bad in ("n", "switch_prob"):
            if bad in grid:
                raise ValueError(f"axis {bad!r} cannot be swept on a graph source")
        n = source.graph.n
        if source.draws < 1:
            raise ValueError("draws must be at least 1")
    elif n is None and "n" not in grid:
        raise ValueError("n must be given for uniform-p and fixed-gap sources")
    if "switch_prob" in grid and not isinstance(source, UniformP):
        raise ValueError("axis 'switch_prob' needs a uniform-p source")

    points = [dict(zip(axes, vals)) for vals in itertools.product(*(grid[a] for a in axes))]
    for pt in points:
        pt_delta = pt.get("delta", base.delta)
        if not pt_delta > 0:
            raise ValueError("every grid point needs delta > 0")

    graph_moments = {}
    if isinstance(source, GraphSource):
        pa_values = list(grid.get("p_A", [p_a]))

        def moments_for(idx):
            g = source.graph
            out = []
            for k in range(source.draws):
                c = assign_labels(g.n, pa_values[idx], seed=derive_seed(seed, 20, idx, k))
                out.append((switch_moments(neighborhood_switch_probs(g, c), c), c.balanced))
            return out

        graph_moments = dict(enumerate(ordered_map(moments_for, range(len(pa_values)), threads)))

    rows = []
    for pt in points:
        cfg = with_delta(base, pt["delta"]) if "delta" in pt else base
        cfg.require_alternative()
        pt_n = int(pt.get("n", n))
        pt_pa = pt.get("p_A", p_a)
        if isinstance(source, GraphSource):
            idx = list(grid["p_A"]).index(pt_pa) if "p_A" in grid else 0
            draws = graph_moments[idx]
            betas = [power_from_gap(cfg, pt_n, m.mu_p, m.exp_nA, m.exp_nB, literal) for m, _ in draws]
            beta = math.fsum(betas) / len(betas)
            flags = () if all(bal for _, bal in draws) else (UNBALANCED,)
        else:
            n_a, n_b = _class_sizes(pt_n, pt_pa)
            if isinstance(source, UniformP):
                q = pt.get("switch_prob", source.p)
                if not 0.0 <= q <= 1.0:
                    raise ValueError("switch_prob must lie in [0, 1]")
                gap = pt_n * (1.0 - 2.0 * q)
                exp_na = n_a * (1.0 - q) + n_b * q
            else:
                gap = source.resolve(pt_n)
                exp_na = float(n_a)
            beta = power_from_gap(cfg, pt_n, gap, exp_na, pt_n - exp_na, literal)
            flags = () if n_a == n_b else (UNBALANCED,)
        rows.append(SurfaceRow(point=pt, beta=beta, assumption_flags=flags))
    return rows
