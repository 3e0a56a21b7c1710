"""Shortest-path hop metrics and the comparisons between two of them."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import FormatError, ParameterError
from .graphs import Graph
from .rng import substream

INF = int(_kernels.HOP_INF)
_ROW_BLOCK = 512


class HopMatrix:
    """Symmetric n x n hop counts stored as uint16; ``INF`` marks disconnected pairs."""

    __slots__ = ("n", "entries")

    def __init__(self, entries):
        entries = np.asarray(entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ParameterError("hop matrix must be square")
        if entries.dtype != np.uint16:
            entries = entries.astype(np.uint16)
        entries.flags.writeable = False
        self.entries = entries
        self.n = entries.shape[0]

    def __getitem__(self, ij):
        value = int(self.entries[ij])
        return math.inf if value == INF else value

    def finite_mask(self) -> np.ndarray:
        return self.entries != INF

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            for row in self.entries:
                w.writerow(["inf" if x == INF else int(x) for x in row])

    @classmethod
    def from_csv(cls, path) -> "HopMatrix":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                try:
                    rows.append([INF if tok.strip() == "inf" else int(tok) for tok in row])
                except ValueError:
                    raise FormatError(path, "expected integers or 'inf'", lineno) from None
        return cls(np.asarray(rows, dtype=np.uint16))


def hop_distances(g: Graph) -> HopMatrix:
    """All-pairs hop counts by breadth-first search from every vertex."""
    if g.n >= INF:
        raise ParameterError(f"full hop matrix unsupported for n={g.n}; use sampled pairs")
    return HopMatrix(_kernels.all_pairs_hops(g.indptr, g.indices, g.n))


# ---------------------------------------------------------------------------
# pair subsets for large graphs

@dataclass(frozen=True)
class PairSample:
    """A fixed set of vertex pairs (i < j), shared by every graph in a comparison."""
    n: int
    i: np.ndarray
    j: np.ndarray

    def __len__(self):
        return len(self.i)


def sample_pairs(n: int, count: int, seed: int) -> PairSample:
    """``count`` distinct pairs drawn uniformly (all pairs if count covers them)."""
    total = n * (n - 1) // 2
    if count >= total:
        i, j = np.triu_indices(n, 1)
        return PairSample(n, i.astype(np.int64), j.astype(np.int64))
    rng = substream(seed, "metrics.pairs")
    drawn = []
    while True:
        u = rng.integers(0, n, size=2 * count)
        v = rng.integers(0, n, size=2 * count)
        ok = u != v
        drawn.append(np.minimum(u[ok], v[ok]) * n + np.maximum(u[ok], v[ok]))
        seq = np.concatenate(drawn)
        uniq, first = np.unique(seq, return_index=True)
        if len(uniq) >= count:
            keys = np.sort(seq[np.sort(first)][:count])
            return PairSample(n, keys // n, keys % n)


def pair_hops(g: Graph, pairs: PairSample, block: int = 512) -> np.ndarray:
    """Hop counts of ``g`` on the sampled pairs (uint16, INF if disconnected)."""
    if pairs.n != g.n:
        raise ParameterError("pair sample and graph have different vertex counts")
    out = np.empty(len(pairs), dtype=np.uint16)
    sources = np.unique(pairs.i)
    for start in range(0, len(sources), block):
        chunk = sources[start:start + block]
        rows = _kernels.all_pairs_hops(g.indptr, g.indices, g.n, chunk)
        sel = np.nonzero((pairs.i >= chunk[0]) & (pairs.i <= chunk[-1]))[0]
        out[sel] = rows[np.searchsorted(chunk, pairs.i[sel]), pairs.j[sel]]
    return out


# ---------------------------------------------------------------------------
# comparisons

class _Tally:
    """Running sums over pairs, so full and sampled modes share one code path."""

    def __init__(self):
        self.pairs = 0
        self.two_approx = 0
        self.good = 0
        self.sq_err = 0
        self.ref_finite = 0
        self.ref_sq = 0

    def add(self, a: np.ndarray, b: np.ndarray):
        a = a.astype(np.int64)
        b = b.astype(np.int64)
        fa, fb = a != INF, b != INF
        both = fa & fb
        neither = ~fa & ~fb
        self.pairs += a.size
        # 1/2 a <= b <= 2 a, in integers
        self.two_approx += int(np.count_nonzero(both & (2 * b >= a) & (b <= 2 * a))) + int(np.count_nonzero(neither))
        self.good += int(np.count_nonzero(both)) + int(np.count_nonzero(neither))
        diff = (a - b)[both]
        self.sq_err += int(np.dot(diff, diff))
        ref = a[fa]
        self.ref_finite += ref.size
        self.ref_sq += int(np.dot(ref, ref))


def _tally_full(D: HopMatrix, D2: HopMatrix) -> _Tally:
    if D.n != D2.n:
        raise ParameterError(f"hop matrices have different sizes ({D.n} vs {D2.n})")
    if D.n < 2:
        raise ParameterError("need at least 2 vertices")
    t = _Tally()
    n = D.n
    for start in range(0, n, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, n)
        rows = np.arange(start, stop)[:, None]
        upper = np.arange(n)[None, :] > rows
        t.add(D.entries[start:stop][upper], D2.entries[start:stop][upper])
    return t


def two_approx_rate(D: HopMatrix, D2: HopMatrix) -> float:
    """Fraction of pairs i < j with D/2 <= D2 <= 2 D (two infinities agree; one does not)."""
    t = _tally_full(D, D2)
    return t.two_approx / t.pairs


@dataclass(frozen=True)
class L2Error:
    delta_rms: float
    delta_n: float
    good_index_count: int
    status: str = "ok"  # "no-good-pairs" or "no-finite-reference" when undefined

    @property
    def defined(self) -> bool:
        return self.status == "ok"


def _l2_from_tally(t: _Tally) -> L2Error:
    if t.good == 0:
        return L2Error(math.nan, math.nan, 0, "no-good-pairs")
    delta = math.sqrt(t.sq_err / t.good)
    if t.ref_finite == 0 or t.ref_sq == 0:
        return L2Error(delta, math.nan, t.good, "no-finite-reference")
    return L2Error(delta, delta / math.sqrt(t.ref_sq / t.ref_finite), t.good)


def normalized_l2_error(D: HopMatrix, D2: HopMatrix) -> L2Error:
    """RMS error over the good-index set, normalised by the RMS of finite entries of ``D``."""
    return _l2_from_tally(_tally_full(D, D2))


@dataclass(frozen=True)
class MetricComparison:
    r2approx: float
    delta_rms: float
    delta_n: float
    good_index_count: int
    status: str = "ok"
    pairs_mode: str = "all"

    HEADER = ("r2approx", "delta_rms", "delta_n", "good_index_count", "status", "pairs_mode")

    def row(self):
        return [repr(self.r2approx), repr(self.delta_rms), repr(self.delta_n),
                self.good_index_count, self.status, self.pairs_mode]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(self.HEADER)
            w.writerow(self.row())


def _comparison(t: _Tally, pairs_mode: str) -> MetricComparison:
    l2 = _l2_from_tally(t)
    return MetricComparison(t.two_approx / t.pairs, l2.delta_rms, l2.delta_n, l2.good_index_count,
                            l2.status, pairs_mode)


def compare(D: HopMatrix, D2: HopMatrix) -> MetricComparison:
    return _comparison(_tally_full(D, D2), "all")


def compare_pairs(a: np.ndarray, b: np.ndarray) -> MetricComparison:
    """Comparison restricted to a pair sample; ``a``, ``b`` come from :func:`pair_hops`."""
    if a.shape != b.shape or a.size == 0:
        raise ParameterError("pair hop vectors must be non-empty and of equal length")
    t = _Tally()
    t.add(a, b)
    return _comparison(t, f"sampled({a.size})")


# ---------------------------------------------------------------------------
# graph metric versus the metric of the hidden space

@dataclass(frozen=True)
class SupDiff:
    value: float
    disconnected_pairs: int


def metric_sup_diff(D_true: HopMatrix, r: float, d_x: np.ndarray) -> SupDiff:
    """max over connected pairs i < j of |r * hops(i, j) - d_X(i, j)|."""
    d_x = np.asarray(d_x, dtype=float)
    if d_x.shape != (D_true.n, D_true.n):
        raise ParameterError("d_X matrix does not match the hop matrix size")
    if not r > 0:
        raise ParameterError("r must be > 0")
    n = D_true.n
    best, disconnected = 0.0, 0
    for start in range(0, n, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, n)
        upper = np.arange(n)[None, :] > np.arange(start, stop)[:, None]
        hops = D_true.entries[start:stop][upper]
        dx = d_x[start:stop][upper]
        finite = hops != INF
        disconnected += int(np.count_nonzero(~finite))
        if finite.any():
            best = max(best, float(np.max(np.abs(r * hops[finite] - dx[finite]))))
    return SupDiff(best, disconnected)
