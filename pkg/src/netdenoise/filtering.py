"""Jaccard index of edges and single-pass tau-Jaccard filtering."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .graphs import Graph, edge_common_counts

# thresholds are compared as exact rationals with a bounded denominator
TAU_MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class FilterConfig:
    tau: float

    def __post_init__(self):
        if not 0.0 <= float(self.tau) <= 1.0:
            raise ParameterError(f"tau={self.tau} outside [0, 1]")

    @property
    def ratio(self) -> Fraction:
        if isinstance(self.tau, Fraction):
            return self.tau
        return Fraction(self.tau).limit_denominator(TAU_MAX_DENOMINATOR)


def jaccard_counts(g: Graph, u, v) -> tuple[int, int]:
    """(|N(u) ∩ N(v)|, |N(u) ∪ N(v)|) for an edge; (0, 0) for a non-edge."""
    if u == v:
        raise ParameterError("Jaccard index needs two distinct vertices")
    if not g.has_edge(u, v):
        return 0, 0
    inter = int(np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True).size)
    union = len(g.neighbors(u)) + len(g.neighbors(v)) - inter
    return inter, union


def jaccard_index(g: Graph, u, v) -> float:
    inter, union = jaccard_counts(g, u, v)
    return inter / union if union else 0.0


def edge_scores(g: Graph):
    """Edges of ``g`` with their intersection and union sizes, as three arrays."""
    edges = g.edges()
    inter = edge_common_counts(g, edges)
    deg = g.degrees()
    union = deg[edges[:, 0]] + deg[edges[:, 1]] - inter
    return edges, inter, union


def tau_filter(g: Graph, cfg: FilterConfig | float) -> Graph:
    """Keep exactly the edges whose Jaccard index in ``g`` is >= tau."""
    if not isinstance(cfg, FilterConfig):
        cfg = FilterConfig(cfg)
    edges, inter, union = edge_scores(g)
    keep = _clears(inter, union, cfg.ratio)
    e = edges[keep]
    return Graph.from_keys(g.n, e[:, 0] * g.n + e[:, 1], "filtered")


def _clears(inter, union, ratio: Fraction):
    # inter / union >= num / den  <=>  inter * den >= num * union
    return inter * ratio.denominator >= ratio.numerator * union


def retention(g: Graph, tau) -> float:
    """Fraction of the edges of ``g`` that survive tau-filtering."""
    if g.num_edges == 0:
        return 1.0
    cfg = tau if isinstance(tau, FilterConfig) else FilterConfig(tau)
    _, inter, union = edge_scores(g)
    return float(np.count_nonzero(_clears(inter, union, cfg.ratio))) / g.num_edges


@dataclass(frozen=True)
class EdgeClassification:
    good: int
    realbad: int
    benign_extra: int
    realbad_pairs: np.ndarray = field(repr=False, compare=False, default=None)
    benign_pairs: np.ndarray = field(repr=False, compare=False, default=None)


def classify_extra_edges(observed: Graph, true_graph: Graph) -> EdgeClassification:
    """Split observed edges into true ones, extras with no common true neighbour, and the rest."""
    if observed.n != true_graph.n:
        raise ParameterError(f"graphs have different vertex counts ({observed.n} vs {true_graph.n})")
    n = observed.n
    obs_keys, true_keys = observed.edge_keys(), true_graph.edge_keys()
    extra = np.setdiff1d(obs_keys, true_keys, assume_unique=True)
    good = len(obs_keys) - len(extra)
    pairs = np.column_stack([extra // n, extra % n])
    common = edge_common_counts(true_graph, pairs) if len(pairs) else np.zeros(0, dtype=np.int64)
    bad = common == 0
    return EdgeClassification(good, int(bad.sum()), int((~bad).sum()), pairs[bad], pairs[~bad])


def write_scores_csv(path, g: Graph) -> None:
    edges, inter, union = edge_scores(g)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "intersection", "union", "jaccard"])
        for (u, v), a, b in zip(edges.tolist(), inter.tolist(), union.tolist()):
            w.writerow([u, v, a, b, repr(a / b if b else 0.0)])
