"""Recovering the metric of a hidden proximity graph from a randomly perturbed copy.

Submodules: geometry (spaces, sampling, estimators), graphs (r-neighbourhood
graphs, edge lists), perturbation (random deletion/insertion), filtering
(Jaccard-index edge filter), metrics (hop distances and their comparison),
theory (closed-form parameter bounds) and harness (experiment drivers).
"""
from .errors import DomainError, FormatError, ParameterError
from .filtering import FilterConfig, classify_extra_edges, edge_scores, jaccard_index, tau_filter
from .geometry import PointSample, SpaceSpec, sample_points
from .graphs import Graph, build_r_graph, neighbor_stats, read_edge_list, write_edge_list
from .harness import SweepConfig, SweepReport, run_realnet_experiment, run_synthetic_sweep
from .metrics import HopMatrix, MetricComparison, compare, hop_distances
from .perturbation import PerturbationParams, perturb
from .theory import RegimeParams, feasibility_report, tau_window

__version__ = "0.1.0"

__all__ = [
    "DomainError", "FormatError", "ParameterError",
    "FilterConfig", "classify_extra_edges", "edge_scores", "jaccard_index", "tau_filter",
    "PointSample", "SpaceSpec", "sample_points",
    "Graph", "build_r_graph", "neighbor_stats", "read_edge_list", "write_edge_list",
    "SweepConfig", "SweepReport", "run_realnet_experiment", "run_synthetic_sweep",
    "HopMatrix", "MetricComparison", "compare", "hop_distances",
    "PerturbationParams", "perturb",
    "RegimeParams", "feasibility_report", "tau_window",
]
