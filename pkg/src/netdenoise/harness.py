"""Experiment drivers: synthetic ground-truth sweeps and real-network runs."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import svgplot
from .errors import FormatError, ParameterError
from .filtering import retention, tau_filter
from .geometry import (SpaceSpec, estimate_ball_mass_lower, estimate_doubling_constant,
                       sample_points, suggest_radius)
from .graphs import Graph, build_r_graph, read_edge_list
from .metrics import MetricComparison, compare, compare_pairs, hop_distances, pair_hops, sample_pairs
from .perturbation import PerturbationParams, perturb
from .rng import derive_seed
from .theory import RegimeParams, assumption_r_threshold, feasibility_report

log = logging.getLogger(__name__)

TAU_GRID = (0.02, 0.05, 0.1, 0.2)
MIN_RETENTION = 0.99
LARGE_N = 20000
DEFAULT_SAMPLED_PAIRS = 10**6

REPORT_VERSION = "netdenoise-report v1"
REPORT_COLUMNS = ("q", "trial", "variant", "r2approx", "delta_n", "good_index_count", "runtime_ms")
VARIANTS = ("observed", "filtered")


@dataclass(frozen=True)
class SweepConfig:
    space: SpaceSpec
    n: int
    q_grid: tuple
    p: float = 0.0
    r: float | None = None
    knn_multiplier: float | None = None
    knn_k: int = 10
    tau: float | None = None
    trials: int = 10
    master_seed: int = 0
    pairs: int | None = None  # None: all pairs

    def __post_init__(self):
        object.__setattr__(self, "q_grid", tuple(float(q) for q in self.q_grid))
        if not self.q_grid:
            raise ParameterError("q_grid must not be empty")
        if any(not 0.0 <= q <= 1.0 for q in self.q_grid):
            raise ParameterError("q_grid values must lie in [0, 1]")
        if list(self.q_grid) != sorted(self.q_grid):
            raise ParameterError("q_grid must be ascending")
        if int(self.trials) < 1:
            raise ParameterError("trials must be >= 1")
        if int(self.n) < 2:
            raise ParameterError("n must be >= 2")
        if (self.r is None) == (self.knn_multiplier is None):
            raise ParameterError("give exactly one of r or knn_multiplier")
        if self.r is not None and not self.r > 0:
            raise ParameterError("r must be > 0")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError("p must lie in [0, 1]")
        if self.tau is not None and not 0.0 <= self.tau <= 1.0:
            raise ParameterError("tau must lie in [0, 1]")
        if self.pairs is not None and int(self.pairs) < 1:
            raise ParameterError("pairs must be a positive count")

    @property
    def pairs_mode(self) -> str:
        return "all" if self.pairs is None else f"sampled({self.pairs})"

    def echo(self) -> dict:
        d = asdict(self)
        d["space"] = {"kind": self.space.kind, **self.space.params}
        d["q_grid"] = list(self.q_grid)
        return d


@dataclass(frozen=True)
class ReportRow:
    q: float
    trial: int
    variant: str
    r2approx: float
    delta_n: float
    good_index_count: int
    runtime_ms: float

    def key(self):
        return (self.q, self.trial, self.variant)


@dataclass
class SweepReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    def sorted(self) -> "SweepReport":
        return SweepReport(sorted(self.rows, key=ReportRow.key), self.metadata)

    def without_timings(self) -> "SweepReport":
        """Copy with wall-clock fields zeroed; everything else is seed-determined."""
        return SweepReport([replace(r, runtime_ms=0.0) for r in self.rows], self.metadata)

    def summary(self, metric: str) -> dict:
        """{variant: [(q, mean, min, max), ...]} over trials, NaNs ignored."""
        out = {}
        for variant in VARIANTS:
            pts = []
            for q in sorted({r.q for r in self.rows}):
                vals = np.array([getattr(r, metric) for r in self.rows if r.q == q and r.variant == variant])
                vals = vals[~np.isnan(vals)]
                if vals.size:
                    pts.append((q, float(vals.mean()), float(vals.min()), float(vals.max())))
                else:
                    pts.append((q, math.nan, math.nan, math.nan))
            out[variant] = pts
        return out


# ---------------------------------------------------------------------------
# tau selection

def select_tau(true_graph: Graph, p: float, seed: int, grid=TAU_GRID, min_retention=MIN_RETENTION):
    """Largest grid tau that keeps >= ``min_retention`` of the edges of the q = 0 observed graph.

    Returns ``(tau, {tau: retention})``. Falls back to the smallest grid value
    when no threshold qualifies.
    """
    base = perturb(true_graph, PerturbationParams(p, 0.0, seed)) if p > 0 else true_graph
    kept = {tau: retention(base, tau) for tau in grid}
    ok = [tau for tau in grid if kept[tau] >= min_retention]
    if not ok:
        log.warning("no tau in %s keeps %.0f%% of edges; using %s", grid, 100 * min_retention, min(grid))
        return min(grid), kept
    return max(ok), kept


# ---------------------------------------------------------------------------
# synthetic sweep

class _Reference:
    """Hop metric of a reference graph, in full or on a fixed pair sample."""

    def __init__(self, graph: Graph, pairs):
        self.pairs = pairs
        self.hops = hop_distances(graph) if pairs is None else pair_hops(graph, pairs)

    def compare(self, other: Graph) -> MetricComparison:
        if self.pairs is None:
            return compare(self.hops, hop_distances(other))
        return compare_pairs(self.hops, pair_hops(other, self.pairs))


def _row(q, trial, variant, cmp: MetricComparison, start):
    return ReportRow(q, trial, variant, cmp.r2approx, cmp.delta_n, cmp.good_index_count,
                     (time.perf_counter() - start) * 1000.0)


def run_synthetic_sweep(cfg: SweepConfig) -> SweepReport:
    """Sample, build the true graph, perturb at every q, filter, and score both graphs per trial."""
    rows = []
    warnings_ = []
    radii, s_hats = [], []
    threshold = assumption_r_threshold(cfg.n) if cfg.n >= 3 else math.inf
    pairs = None if cfg.pairs is None else sample_pairs(cfg.n, int(cfg.pairs), derive_seed(cfg.master_seed, "sweep.pairs"))
    tau, tau_retention, l_hat = cfg.tau, None, None

    for trial in range(cfg.trials):
        sample = sample_points(cfg.space, cfg.n, derive_seed(cfg.master_seed, "sweep.sample", trial))
        r = cfg.r if cfg.r is not None else suggest_radius(sample, cfg.knn_multiplier, cfg.knn_k)
        true_graph = build_r_graph(sample, r)
        s_hat = estimate_ball_mass_lower(sample, r)
        radii.append(r)
        s_hats.append(s_hat)
        if s_hat < threshold:
            msg = f"trial {trial}: estimated ball mass {s_hat:.4g} below 12 ln n/(n-2) = {threshold:.4g}"
            log.warning(msg)
            warnings_.append(msg)
        perturb_seed = derive_seed(cfg.master_seed, "sweep.perturb", trial)
        if trial == 0:
            l_hat = estimate_doubling_constant(sample, 2.0 * r, n_scales=2, max_centers=500,
                                               seed=derive_seed(cfg.master_seed, "sweep.doubling"))
            if tau is None:
                tau, tau_retention = select_tau(true_graph, cfg.p, perturb_seed)

        ref = _Reference(true_graph, pairs)
        for q in cfg.q_grid:
            start = time.perf_counter()
            observed = perturb(true_graph, PerturbationParams(cfg.p, q, perturb_seed))
            rows.append(_row(q, trial, "observed", ref.compare(observed), start))
            start = time.perf_counter()
            filtered = tau_filter(observed, tau)
            rows.append(_row(q, trial, "filtered", ref.compare(filtered), start))

    s_mean = float(np.mean(s_hats))
    q_max = max(cfg.q_grid)
    c = q_max / s_mean if q_max > 0 and s_mean > 0 else 1.0
    meta = {
        "kind": "synthetic",
        "config": cfg.echo(),
        "pairs_mode": cfg.pairs_mode,
        "tau": tau,
        "tau_rule": "fixed" if cfg.tau is not None else
                    f"largest of {list(TAU_GRID)} keeping >= {MIN_RETENTION} of q=0 edges",
        "tau_retention": {str(k): v for k, v in tau_retention.items()} if tau_retention else None,
        "r": radii,
        "s_hat": s_hats,
        "L_hat": l_hat,
        "warnings": warnings_,
    }
    if cfg.n >= 3 and s_mean > 0:
        report = feasibility_report(RegimeParams(cfg.n, min(s_mean, 1.0), max(l_hat, 1.0), c, cfg.p, q_max))
        meta["bounds"] = {k: v for k, v in report.record().items()}
        meta["bounds_notes"] = list(report.notes)
    return SweepReport(rows, meta).sorted()


# ---------------------------------------------------------------------------
# real networks

def resolve_pairs(n: int, pairs) -> int | None:
    """``"auto"`` means all pairs up to LARGE_N vertices, else a 10^6 pair sample."""
    if pairs == "auto":
        return DEFAULT_SAMPLED_PAIRS if n > LARGE_N else None
    if pairs in (None, "all"):
        return None
    return int(pairs)


def run_realnet_experiment(network, q_grid, tau: float, trials: int = 3, master_seed: int = 0,
                           pairs="auto") -> SweepReport:
    """Insertion-only perturbation of an input network, compared before and after filtering.

    ``observed`` rows compare the perturbed network with the input; ``filtered``
    rows compare the filtered perturbed network with the filtered input.
    """
    graph = network if isinstance(network, Graph) else read_edge_list(network)
    q_grid = tuple(float(q) for q in q_grid)
    if not q_grid or any(not 0.0 <= q <= 1.0 for q in q_grid):
        raise ParameterError("q_grid must be non-empty with values in [0, 1]")
    if int(trials) < 1:
        raise ParameterError("trials must be >= 1")
    if graph.n < 2:
        raise ParameterError("network needs at least 2 vertices")
    count = resolve_pairs(graph.n, pairs)
    pair_set = None if count is None else sample_pairs(graph.n, count, derive_seed(master_seed, "realnet.pairs"))

    ref_observed = _Reference(graph, pair_set)
    ref_filtered = _Reference(tau_filter(graph, tau), pair_set)
    rows = []
    for trial in range(int(trials)):
        seed = derive_seed(master_seed, "realnet.perturb", trial)
        for q in q_grid:
            start = time.perf_counter()
            perturbed = perturb(graph, PerturbationParams(0.0, q, seed))
            rows.append(_row(q, trial, "observed", ref_observed.compare(perturbed), start))
            start = time.perf_counter()
            rows.append(_row(q, trial, "filtered", ref_filtered.compare(tau_filter(perturbed, tau)), start))
    meta = {
        "kind": "realnet",
        "source": str(network) if not isinstance(network, Graph) else "<graph>",
        "n": graph.n,
        "edges": graph.num_edges,
        "q_grid": list(q_grid),
        "tau": tau,
        "trials": int(trials),
        "master_seed": master_seed,
        "pairs_mode": "all" if count is None else f"sampled({len(pair_set)})",
    }
    return SweepReport(rows, meta).sorted()


# ---------------------------------------------------------------------------
# report files

def write_report_csv(path, report: SweepReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {REPORT_VERSION}\n")
        fh.write("# meta: " + json.dumps(report.metadata, sort_keys=True, default=_jsonable) + "\n")
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in report.rows:
            w.writerow([repr(r.q), r.trial, r.variant, repr(r.r2approx), repr(r.delta_n),
                        r.good_index_count, repr(r.runtime_ms)])


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_report_csv(path) -> SweepReport:
    path = Path(path)
    meta = {}
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != f"# {REPORT_VERSION}":
        raise FormatError(path, f"missing '{REPORT_VERSION}' header", 1)
    body_start = 1
    while body_start < len(lines) and lines[body_start].startswith("#"):
        text = lines[body_start][1:].strip()
        if text.startswith("meta:"):
            meta = json.loads(text[len("meta:"):])
        body_start += 1
    reader = csv.reader(lines[body_start:])
    header = next(reader, None)
    if tuple(header or ()) != REPORT_COLUMNS:
        raise FormatError(path, f"unexpected columns {header}", body_start + 1)
    for offset, rec in enumerate(reader, body_start + 2):
        try:
            rows.append(ReportRow(float(rec[0]), int(rec[1]), rec[2], float(rec[3]), float(rec[4]),
                                  int(rec[5]), float(rec[6])))
        except (ValueError, IndexError):
            raise FormatError(path, "malformed report row", offset) from None
    return SweepReport(rows, meta)


def emit_plots(report: SweepReport, out_dir) -> list:
    """Write report.csv plus r2approx.svg and delta_n.svg into ``out_dir``."""
    if not report.rows:
        raise ParameterError("report has no rows")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "report.csv", out / "r2approx.svg", out / "delta_n.svg"]
    write_report_csv(paths[0], report)
    paths[1].write_text(svgplot.line_chart(report.summary("r2approx"), "2-approximation rate",
                                           "insertion probability q", "R_2approx"), encoding="utf-8")
    paths[2].write_text(svgplot.line_chart(report.summary("delta_n"), "normalized L2 error",
                                           "insertion probability q", "delta_N"), encoding="utf-8")
    return paths


# ---------------------------------------------------------------------------
# sweep config files

def load_sweep_config(path) -> SweepConfig:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise FormatError(path, str(exc)) from None
    return sweep_config_from_dict(data)


def sweep_config_from_dict(data: dict) -> SweepConfig:
    data = dict(data)
    space = data.pop("space", None)
    if not isinstance(space, dict) or "kind" not in space:
        raise ParameterError("config needs a [space] table with a 'kind' key")
    space = dict(space)
    kind = space.pop("kind")
    known = {"known_doubling": space.pop("known_doubling", None)}
    pairs = data.pop("pairs", "all")
    allowed = {"n", "q_grid", "p", "r", "knn_multiplier", "knn_k", "tau", "trials", "master_seed"}
    unknown = set(data) - allowed
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    if "n" not in data or "q_grid" not in data:
        raise ParameterError("config needs 'n' and 'q_grid'")
    return SweepConfig(space=SpaceSpec(kind, space, **known),
                       pairs=None if pairs == "all" else int(pairs), **data)
