"""Random edge deletion / non-edge insertion applied to a true graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .graphs import Graph
from .rng import substream

REJECTION_ATTEMPT_FACTOR = 100


@dataclass(frozen=True)
class PerturbationParams:
    p: float
    q: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"deletion probability p={self.p} outside [0, 1]")
        if not 0.0 <= self.q <= 1.0:
            raise ParameterError(f"insertion probability q={self.q} outside [0, 1]")


def perturb(true_graph: Graph, params: PerturbationParams, mode: str = "fast") -> Graph:
    """Keep each edge with probability 1-p, insert each non-edge with probability q.

    Deletions and insertions draw from separate substreams of ``params.seed``,
    so for a fixed seed the deleted edges do not depend on q.

    ``mode="fast"`` draws the number of insertions from Binomial(#non-edges, q)
    and then picks that many distinct non-edges uniformly; ``mode="exact"`` flips
    one coin per vertex pair (quadratic, for reference checks).
    """
    n = true_graph.n
    keys = true_graph.edge_keys()
    del_rng = substream(params.seed, "perturb.delete")
    ins_rng = substream(params.seed, "perturb.insert")
    if mode == "fast":
        kept = keys[del_rng.random(len(keys)) >= params.p]
        inserted = _insert_fast(ins_rng, n, keys, params.q)
    elif mode == "exact":
        kept = keys[del_rng.random(len(keys)) >= params.p]
        inserted = _insert_exact(ins_rng, n, keys, params.q)
    else:
        raise ParameterError(f"unknown perturbation mode {mode!r}")
    return Graph.from_keys(n, np.union1d(kept, inserted), "observed")


def _insert_fast(rng, n, edge_keys, q):
    total_pairs = n * (n - 1) // 2
    m_non = total_pairs - len(edge_keys)
    if m_non <= 0 or q <= 0.0:
        return np.zeros(0, dtype=np.int64)
    k = int(rng.binomial(m_non, q))
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    drawn = []
    distinct = np.zeros(0, dtype=np.int64)
    attempts = 0
    while attempts <= REJECTION_ATTEMPT_FACTOR * k:
        batch = max(1024, 2 * (k - len(distinct)))
        u = rng.integers(0, n, size=batch)
        v = rng.integers(0, n, size=batch)
        attempts += batch
        ok = u != v
        lo, hi = np.minimum(u[ok], v[ok]), np.maximum(u[ok], v[ok])
        cand = lo * n + hi
        pos = np.searchsorted(edge_keys, cand)
        pos[pos == len(edge_keys)] = 0
        is_edge = (edge_keys[pos] == cand) if len(edge_keys) else np.zeros(len(cand), bool)
        drawn.append(cand[~is_edge])
        seq = np.concatenate(drawn)
        # first occurrences in draw order: sequential sampling without replacement
        uniq, first = np.unique(seq, return_index=True)
        if len(uniq) >= k:
            return np.sort(seq[np.sort(first)][:k])
        distinct = uniq
    # dense true graph: enumerate the complement explicitly
    iu, iv = np.triu_indices(n, 1)
    all_keys = iu.astype(np.int64) * n + iv
    non_edges = np.setdiff1d(all_keys, edge_keys, assume_unique=True)
    return np.sort(rng.choice(non_edges, size=k, replace=False))


def _insert_exact(rng, n, edge_keys, q):
    iu, iv = np.triu_indices(n, 1)
    all_keys = iu.astype(np.int64) * n + iv
    non_edges = np.setdiff1d(all_keys, edge_keys, assume_unique=True)
    return non_edges[rng.random(len(non_edges)) < q]


@dataclass(frozen=True)
class PerturbationStats:
    deleted: int
    inserted: int
    retained: int


def perturbation_stats(true_graph: Graph, observed: Graph) -> PerturbationStats:
    if true_graph.n != observed.n:
        raise ParameterError(f"graphs have different vertex counts ({true_graph.n} vs {observed.n})")
    t, o = true_graph.edge_keys(), observed.edge_keys()
    retained = len(np.intersect1d(t, o, assume_unique=True))
    return PerturbationStats(len(t) - retained, len(o) - retained, retained)
