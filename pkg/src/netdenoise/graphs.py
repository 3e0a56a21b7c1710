"""Simple undirected graphs, r-neighbourhood construction and edge-list I/O."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .errors import FormatError, ParameterError
from .geometry import PointSample, distances

LABELS = ("true_graph", "observed", "filtered", "external")


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``.

    Adjacency is CSR: ``indices[indptr[v]:indptr[v+1]]`` is the sorted
    neighbour list of ``v``.
    """

    __slots__ = ("n", "indptr", "indices", "label", "_edges")

    def __init__(self, n, indptr, indices, label="external"):
        if label not in LABELS:
            raise ParameterError(f"unknown graph label {label!r}")
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False
        self.label = label
        self._edges = None

    @classmethod
    def from_edges(cls, n, edges, label="external"):
        """Build from an (m, 2) array of vertex pairs; drops self-loops and duplicates."""
        n = int(n)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise IndexError(f"edge endpoint out of range for n={n}")
        e = e[e[:, 0] != e[:, 1]]
        lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
        keys = np.unique(lo * n + hi)
        return cls.from_keys(n, keys, label)

    @classmethod
    def from_keys(cls, n, keys, label="external"):
        """Build from sorted unique ``u * n + v`` keys with ``u < v``."""
        keys = np.asarray(keys, dtype=np.int64)
        u, v = keys // n, keys % n
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        g = cls(n, indptr, dst, label)
        g._edges = np.column_stack([u, v])
        return g

    @classmethod
    def empty(cls, n, label="external"):
        return cls(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64), label)

    @classmethod
    def complete(cls, n, label="external"):
        u, v = np.triu_indices(n, 1)
        return cls.from_keys(n, u.astype(np.int64) * n + v, label)

    # -- queries ----------------------------------------------------------
    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v) -> np.ndarray:
        self._check_vertex(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u, v) -> bool:
        row = self.neighbors(u)
        self._check_vertex(v)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, sorted lexicographically."""
        if self._edges is None:
            src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
            keep = src < self.indices
            self._edges = np.column_stack([src[keep], self.indices[keep]])
        return self._edges

    def edge_keys(self) -> np.ndarray:
        e = self.edges()
        return e[:, 0] * self.n + e[:, 1]

    def with_label(self, label) -> "Graph":
        g = Graph(self.n, self.indptr, self.indices, label)
        g._edges = self._edges
        return g

    def same_edges(self, other: "Graph") -> bool:
        return self.n == other.n and np.array_equal(self.indices, other.indices) \
            and np.array_equal(self.indptr, other.indptr)

    def _check_vertex(self, v):
        if not 0 <= int(v) < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges}, label={self.label!r})"


# ---------------------------------------------------------------------------
# r-neighbourhood graphs

def build_r_graph(sample: PointSample, r: float, method: str = "grid") -> Graph:
    """Edge (u, v) iff u != v and d_X(u, v) <= r."""
    if not r > 0:
        raise ParameterError("r must be > 0")
    if method == "brute":
        pairs = _pairs_brute(sample, r)
    elif method == "grid":
        pairs = _pairs_grid(sample, r)
    else:
        raise ParameterError(f"unknown method {method!r}")
    n = sample.n
    keys = np.unique(pairs[:, 0] * n + pairs[:, 1]) if len(pairs) else np.zeros(0, dtype=np.int64)
    return Graph.from_keys(n, keys, "true_graph")


def _pairs_brute(sample, r, block=512):
    pts, space = sample.points, sample.space
    out = []
    for start in range(0, sample.n, block):
        d = distances(space, pts[start:start + block, None, :], pts[None, :, :])
        i, j = np.nonzero(d <= r)
        i = i + start
        keep = i < j
        out.append(np.column_stack([i[keep], j[keep]]))
    return np.concatenate(out).astype(np.int64)


def _pairs_grid(sample, r, block=4096):
    pts, space = sample.points, sample.space
    n, d = pts.shape
    period = space.periodic
    if period is not None:
        ncell = int(math.floor(period / r))
        if ncell < 3:
            return _pairs_brute(sample, r)
        width = period / ncell
        x = np.mod(pts, period)
        cells = np.minimum((x // width).astype(np.int64), ncell - 1)
        shape = np.array([ncell], dtype=np.int64)
    elif d <= 3:
        cells = np.floor((pts - pts.min(axis=0)) / r).astype(np.int64)
        shape = cells.max(axis=0) + 1
    else:
        # the 3^d stencil stops paying off in higher dimensions
        pairs = cKDTree(pts).query_pairs(r, output_type="ndarray").astype(np.int64)
        return _filter_pairs(sample, pairs, r)

    strides = np.cumprod(np.concatenate([[1], shape[:0:-1]]))[::-1]
    keys = cells @ strides
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    out = []
    for offset in itertools.product((-1, 0, 1), repeat=d):
        nb = cells + np.asarray(offset, dtype=np.int64)
        if period is not None:
            valid = np.ones(n, dtype=bool)
            nb = np.mod(nb, shape)
        else:
            valid = np.all((nb >= 0) & (nb < shape), axis=1)
        nb_keys = nb @ strides
        for start in range(0, n, block):
            idx = np.arange(start, min(start + block, n))
            idx = idx[valid[idx]]
            lo = np.searchsorted(sorted_keys, nb_keys[idx], side="left")
            hi = np.searchsorted(sorted_keys, nb_keys[idx], side="right")
            counts = hi - lo
            total = int(counts.sum())
            if total == 0:
                continue
            i = np.repeat(idx, counts)
            first = np.repeat(lo - (np.cumsum(counts) - counts), counts)
            j = order[np.arange(total) + first]
            keep = i < j
            cand = np.column_stack([i[keep], j[keep]])
            out.append(_filter_pairs(sample, cand, r))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.concatenate(out)


def _filter_pairs(sample, pairs, r):
    if len(pairs) == 0:
        return pairs.reshape(0, 2)
    d = distances(sample.space, sample.points[pairs[:, 0]], sample.points[pairs[:, 1]])
    return pairs[d <= r]


# ---------------------------------------------------------------------------
# neighbourhood structure

def common_neighbors(g: Graph, u, v) -> int:
    if u == v:
        raise ParameterError("common_neighbors needs two distinct vertices")
    return int(np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True).size)


def edge_common_counts(g: Graph, pairs: np.ndarray | None = None) -> np.ndarray:
    """|N(u) ∩ N(v)| for every edge of ``g`` (or for the given vertex pairs)."""
    pairs = g.edges() if pairs is None else np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return _kernels.edge_intersections(g.indptr, g.indices,
                                       np.ascontiguousarray(pairs[:, 0]), np.ascontiguousarray(pairs[:, 1]))


@dataclass(frozen=True)
class NeighborStats:
    min_degree: int
    min_common_over_edges: float  # math.inf when the graph has no edges
    degree_threshold: float
    common_threshold: float
    has_edges: bool

    @property
    def degree_ok(self) -> bool:
        return self.min_degree > self.degree_threshold

    @property
    def common_ok(self) -> bool:
        return self.min_common_over_edges > self.common_threshold


def neighbor_stats(g: Graph, s_estimate: float) -> NeighborStats:
    """Minimum degree and minimum common-neighbour count over edges, against s(n-1)/3."""
    if not 0.0 <= s_estimate <= 1.0:
        raise ParameterError("s_estimate must lie in [0, 1]")
    threshold = s_estimate * (g.n - 1) / 3.0
    min_degree = int(g.degrees().min()) if g.n else 0
    if g.num_edges:
        min_common = float(edge_common_counts(g).min())
    else:
        min_common = math.inf
    return NeighborStats(min_degree, min_common, threshold, threshold, g.num_edges > 0)


# ---------------------------------------------------------------------------
# edge-list files

def read_edge_list(path, label="external") -> Graph:
    """Read ``u v`` lines (0-based). Vertex count from a ``# n=<count>`` header or max index + 1."""
    path = Path(path)
    declared = None
    rows = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped[1:].strip().replace(" ", "")
                if body.startswith("n="):
                    try:
                        declared = int(body[2:])
                    except ValueError:
                        raise FormatError(path, f"bad vertex-count header {stripped!r}", lineno) from None
                continue
            toks = stripped.split("#", 1)[0].split()
            if len(toks) != 2:
                raise FormatError(path, f"expected 'u v', got {stripped!r}", lineno)
            try:
                u, v = int(toks[0]), int(toks[1])
            except ValueError:
                raise FormatError(path, f"non-integer vertex in {stripped!r}", lineno) from None
            if u < 0 or v < 0:
                raise FormatError(path, "negative vertex index", lineno)
            if declared is not None and max(u, v) >= declared:
                raise FormatError(path, f"vertex index exceeds declared n={declared}", lineno)
            rows.append((u, v))
    edges = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    n = declared if declared is not None else (int(edges.max()) + 1 if len(edges) else 0)
    return Graph.from_edges(n, edges, label)


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# n={g.n}\n")
        e = g.edges()
        if len(e):
            np.savetxt(fh, e, fmt="%d")
