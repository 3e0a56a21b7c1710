"""Compiled inner loops over CSR adjacency (indptr, indices with sorted rows)."""
import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import reverse_cuthill_mckee

HOP_INF = np.iinfo(np.uint16).max


@njit(cache=True)
def edge_intersections(indptr, indices, eu, ev):
    """|N(u) ∩ N(v)| for each pair (eu[k], ev[k]).

    Pairs are visited grouped by ``eu``; the neighbours of the current ``u`` are
    stamped once, then each ``N(v)`` is scanned against the stamps.
    """
    m = eu.shape[0]
    n = indptr.shape[0] - 1
    out = np.empty(m, dtype=np.int64)
    stamp = np.full(n, -1, dtype=np.int64)
    order = np.argsort(eu, kind="mergesort")
    current = -1
    for t in range(m):
        k = order[t]
        u = eu[k]
        if u != current:
            for e in range(indptr[u], indptr[u + 1]):
                stamp[indices[e]] = u
            current = u
        v = ev[k]
        c = 0
        for e in range(indptr[v], indptr[v + 1]):
            c += stamp[indices[e]] == u
        out[k] = c
    return out


@njit(cache=True)
def _msbfs_batch(indptr, indices, n, sources, out_rows, dist):
    """Up to 64 breadth-first searches at once, one bit per source.

    Push-style: only vertices on the current frontier of some search are
    expanded, so nearby sources sharing a batch share most of the work.
    Writes hop counts of source ``sources[i]`` into ``dist[out_rows[i], :]``;
    unreached entries keep their prior value (the caller pre-fills HOP_INF).
    """
    seen = np.zeros(n, dtype=np.uint64)
    frontier = np.zeros(n, dtype=np.uint64)
    nxt = np.zeros(n, dtype=np.uint64)
    cur_list = np.empty(n, dtype=np.int64)
    nxt_list = np.empty(n, dtype=np.int64)
    one = np.uint64(1)
    cur_len = 0
    for i in range(sources.shape[0]):
        s = sources[i]
        bit = one << np.uint64(i)
        if frontier[s] == 0:
            cur_list[cur_len] = s
            cur_len += 1
        seen[s] |= bit
        frontier[s] |= bit
        dist[out_rows[i], s] = 0
    level = 0
    cap = HOP_INF - 1
    while cur_len > 0:
        level += 1
        hop = level if level < cap else cap  # saturate rather than wrap
        nxt_len = 0
        for k in range(cur_len):
            v = cur_list[k]
            f = frontier[v]
            for e in range(indptr[v], indptr[v + 1]):
                w = indices[e]
                new = f & ~seen[w]
                if new != 0:
                    if nxt[w] == 0:
                        nxt_list[nxt_len] = w
                        nxt_len += 1
                    nxt[w] |= new
                    seen[w] |= new
        for k in range(cur_len):
            frontier[cur_list[k]] = 0
        for k in range(nxt_len):
            w = nxt_list[k]
            bits = nxt[w]
            frontier[w] = bits
            nxt[w] = 0
            i = 0
            while bits != 0:
                if bits & one:
                    dist[out_rows[i], w] = hop
                bits >>= one
                i += 1
        cur_list, nxt_list = nxt_list, cur_list
        cur_len = nxt_len


def all_pairs_hops(indptr, indices, n, sources=None):
    """Hop-count rows for ``sources`` (default: every vertex) as uint16, HOP_INF if unreachable.

    Sources are batched 64 at a time in bandwidth-reducing order so that each
    batch holds vertices that are close in the graph.
    """
    if sources is None:
        sources = np.arange(n, dtype=np.int64)
    sources = np.asarray(sources, dtype=np.int64)
    dist = np.full((sources.shape[0], n), HOP_INF, dtype=np.uint16)
    if sources.shape[0] == 0:
        return dist
    adj = csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr), shape=(n, n))
    rank = np.empty(n, dtype=np.int64)
    rank[reverse_cuthill_mckee(adj, symmetric_mode=True)] = np.arange(n)
    order = np.argsort(rank[sources], kind="stable")
    for start in range(0, order.shape[0], 64):
        rows = order[start:start + 64].astype(np.int64)
        _msbfs_batch(indptr, indices, n, sources[rows], rows, dist)
    return dist
