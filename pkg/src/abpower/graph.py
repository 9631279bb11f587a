"""Immutable interference graphs: edge-list I/O, neighborhoods, degrees, generators.

Edge-list format
----------------
One edge per line as two whitespace-separated nonnegative integers.  Lines
starting with ``#`` are comments.  For directed graphs a line ``u v`` means
"u follows v".  Serialized graphs carry two header comments::

    # n=<node count>
    # directed=<true|false>

When a node count is known (from that header or passed explicitly) the
identifiers are taken verbatim and must lie in ``[0, n)``; isolated nodes are
then allowed.  Otherwise identifiers are compacted to ``0..n-1`` in order of
first appearance and the original identifiers are kept in ``node_ids``.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .streams import substream


class GraphParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple graph on nodes ``0..n-1``.

    ``edges`` is an ``(m, 2)`` int64 array, lexicographically sorted, without
    self-loops or duplicates.  Undirected edges are stored once as
    ``(min, max)``.
    """

    n: int
    edges: np.ndarray
    directed: bool = False
    node_ids: tuple[int, ...] | None = None
    _adj: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n < 0:
            raise ValueError("node count must be nonnegative")
        if edges.size and (edges.min() < 0 or edges.max() >= self.n):
            raise ValueError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        if not self.directed:
            edges = np.sort(edges, axis=1)
        edges = np.unique(edges, axis=0) if edges.size else edges
        edges.setflags(write=False)
        if self.node_ids is not None and len(self.node_ids) != self.n:
            raise ValueError("node_ids length must equal n")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_adj", _build_adjacency(self.n, edges, self.directed))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def neighbor_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR view ``(indptr, indices)`` of every node's neighborhood."""
        return self._adj

    def degrees(self, mode: str | None = None) -> np.ndarray:
        mode = _check_mode(self, mode)
        if mode == "in":
            return np.bincount(self.edges[:, 1], minlength=self.n)
        if mode == "out":
            return np.bincount(self.edges[:, 0], minlength=self.n)
        return np.diff(self._adj[0])

    def original_id(self, i: int) -> int:
        return i if self.node_ids is None else self.node_ids[i]


def _build_adjacency(n: int, edges: np.ndarray, directed: bool) -> tuple[np.ndarray, np.ndarray]:
    # directed: out-neighbours only, an edge u->v means u follows v
    if directed:
        src, dst = edges[:, 0], edges[:, 1]
    else:
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    indices = dst[order]
    indptr.setflags(write=False)
    indices.setflags(write=False)
    return indptr, indices


def _check_mode(g: Graph, mode: str | None) -> str:
    if mode is None:
        return "out" if g.directed else "undirected"
    if mode not in ("in", "out", "undirected"):
        raise ValueError(f"unknown degree mode {mode!r}")
    if (mode == "undirected") == g.directed:
        kind = "directed" if g.directed else "undirected"
        raise ValueError(f"degree mode {mode!r} does not apply to a {kind} graph")
    return mode


_HEADER_RE = re.compile(r"^#\s*(n|directed)\s*=\s*(\S+)\s*$")


def parse_edge_list(
    text: str | TextIO, directed: bool | None = None, n: int | None = None
) -> Graph:
    """Read an edge list.

    ``directed=None`` defers to a ``# directed=`` header and otherwise means
    undirected.  ``n`` (or an ``# n=`` header) switches off id compaction.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    header: dict[str, str] = {}
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER_RE.match(line)
            if m:
                header[m.group(1)] = m.group(2).lower()
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphParseError(f"expected 2 node ids, got {len(tokens)} tokens", lineno)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError(f"non-integer node id in {line!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphParseError(f"negative node id in {line!r}", lineno)
        pairs.append((u, v))

    if "directed" in header:
        if header["directed"] not in ("true", "false"):
            raise GraphParseError(f"bad directed header {header['directed']!r}")
        declared = header["directed"] == "true"
        if directed is not None and directed != declared:
            raise GraphParseError("directedness flag conflicts with file header")
        directed = declared
    directed = bool(directed)
    if n is None and "n" in header:
        try:
            n = int(header["n"])
        except ValueError:
            raise GraphParseError(f"bad node-count header {header['n']!r}") from None

    if not pairs and not n:
        raise GraphParseError("empty edge list")

    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    arr = arr[arr[:, 0] != arr[:, 1]]
    if n is not None:
        if pairs and max(max(p) for p in pairs) >= n:
            raise GraphParseError(f"node id exceeds declared node count {n}")
        return Graph(n=n, edges=arr, directed=directed)

    # compaction preserves first-appearance order, self-loop endpoints included
    flat = np.array(pairs, dtype=np.int64).ravel()
    uniq, first = np.unique(flat, return_index=True)
    ids = uniq[np.argsort(first, kind="stable")]
    remap = {int(orig): new for new, orig in enumerate(ids)}
    compact = np.vectorize(remap.__getitem__, otypes=[np.int64])(arr) if arr.size else arr
    return Graph(n=len(ids), edges=compact, directed=directed, node_ids=tuple(int(i) for i in ids))


def read_edge_list(path, directed: bool | None = None, n: int | None = None) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, directed=directed, n=n)


def serialize_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n}", f"# directed={'true' if g.directed else 'false'}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_edge_list(g))


def neighborhood(g: Graph, i: int) -> set[int]:
    """Undirected: adjacent nodes.  Directed: the nodes ``i`` follows."""
    if not 0 <= i < g.n:
        raise IndexError(f"node {i} out of range for graph with {g.n} nodes")
    indptr, indices = g.neighbor_arrays()
    return {int(v) for v in indices[indptr[i] : indptr[i + 1]]}


@dataclass(frozen=True)
class DegreeDistribution:
    entries: tuple[tuple[int, float], ...]

    @property
    def degrees(self) -> np.ndarray:
        return np.array([d for d, _ in self.entries], dtype=np.int64)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries], dtype=float)


def degree_distribution(g: Graph, mode: str | None = None) -> DegreeDistribution:
    if g.n == 0:
        raise ValueError("degree distribution of an empty node set is undefined")
    deg = g.degrees(mode)
    values, counts = np.unique(deg, return_counts=True)
    return DegreeDistribution(
        tuple((int(d), float(c) / g.n) for d, c in zip(values, counts))
    )


def tail_slope(dist: DegreeDistribution, min_degree: int = 1) -> float:
    """Least-squares slope of log-probability against log-degree for degrees >= ``min_degree``."""
    d, p = dist.degrees, dist.probabilities
    keep = d >= max(min_degree, 1)
    if keep.sum() < 2:
        raise ValueError("need at least two distinct degrees to fit a slope")
    slope, _ = np.polyfit(np.log(d[keep]), np.log(p[keep]), 1)
    return float(slope)


def erdos_renyi(n: int, edge_prob: float, seed: int = 0) -> Graph:
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = substream(seed, 0)
    chunks = []
    for u in range(n - 1):
        hit = np.flatnonzero(rng.random(n - u - 1) < edge_prob)
        if hit.size:
            chunks.append(np.column_stack([np.full(hit.size, u), hit + u + 1]))
    edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return Graph(n=n, edges=edges, directed=False)


def preferential_attachment(n: int, m: int, seed: int = 0) -> Graph:
    """Barabasi-Albert growth from an (m+1)-clique; each new node adds m distinct edges."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 1 <= m < n:
        raise ValueError("m must satisfy 1 <= m < n")
    rng = substream(seed, 1)
    edges: list[tuple[int, int]] = [(u, v) for u in range(m + 1) for v in range(u + 1, m + 1)]
    # each node appears once per incident edge, so uniform picks are degree-proportional
    ends = [x for e in edges for x in e]
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((t, new))
            ends.extend((t, new))
    return Graph(n=n, edges=np.array(edges, dtype=np.int64), directed=False)


def generate_graph(model: str, seed: int = 0, **params) -> Graph:
    """Dispatch by model name: ``erdos_renyi(n, edge_prob)`` or ``preferential_attachment(n, m)``."""
    if model in ("erdos_renyi", "er"):
        return erdos_renyi(int(params["n"]), float(params["edge_prob"]), seed=seed)
    if model in ("preferential_attachment", "pa", "ba"):
        return preferential_attachment(int(params["n"]), int(params["m"]), seed=seed)
    raise ValueError(f"unknown graph model {model!r}")


def from_edges(n: int, edges: Iterable[tuple[int, int]], directed: bool = False) -> Graph:
    return Graph(n=n, edges=np.array(list(edges), dtype=np.int64).reshape(-1, 2), directed=directed)
