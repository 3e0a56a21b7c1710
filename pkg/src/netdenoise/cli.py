"""Command-line entry point: ``netdenoise <command> ...``.

Exit status is 0 on success, 2 on a parameter error and 3 on an I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import filtering, geometry, graphs, harness, metrics, perturbation, theory
from .errors import DomainError, ParameterError

EXIT_PARAM = 2
EXIT_IO = 3


def _kv(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key, value


def _q_grid(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad q grid {text!r}") from None


def _pairs(text):
    if text == "all":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--pairs takes 'all' or a count") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netdenoise",
                                     description="Perturbed proximity graphs and Jaccard-index denoising.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample points from a space")
    p.add_argument("--space", required=True, choices=geometry.KINDS)
    p.add_argument("--params", nargs="*", type=_kv, default=[], metavar="KEY=VALUE")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("graph", help="build the r-neighbourhood graph of a point file")
    p.add_argument("--points", required=True)
    radius = p.add_mutually_exclusive_group(required=True)
    radius.add_argument("--r", type=float)
    radius.add_argument("--knn-mult", type=float)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)

    p = sub.add_parser("perturb", help="random edge deletion and insertion")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("filter", help="tau-Jaccard filtering")
    p.add_argument("--graph", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scores", help="also write per-edge Jaccard scores to this CSV")

    p = sub.add_parser("evaluate", help="compare the hop metrics of two graphs")
    p.add_argument("--truth", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--pairs", type=_pairs, default=None, help="'all' (default) or a sampled pair count")
    p.add_argument("--seed", type=int, default=0, help="seed for the pair sample")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bounds", help="evaluate the parameter bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--format", choices=("text", "csv"), default="text")

    p = sub.add_parser("sweep", help="synthetic sweep from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("realnet", help="insertion sweep on a given network")
    p.add_argument("--edges", required=True)
    p.add_argument("--q-grid", type=_q_grid, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", default="auto", help="'auto', 'all' or a sampled pair count")
    p.add_argument("--out-dir", required=True)
    return parser


def _generate(a):
    space = geometry.SpaceSpec(a.space, dict(a.params))
    geometry.write_points(a.out, geometry.sample_points(space, a.n, a.seed))


def _graph(a):
    sample = geometry.load_sample(a.points)
    r = a.r if a.r is not None else geometry.suggest_radius(sample, a.knn_mult, a.k)
    g = graphs.build_r_graph(sample, r)
    graphs.write_edge_list(a.out, g)
    print(f"r={r!r} n={g.n} edges={g.num_edges}")


def _perturb(a):
    g = graphs.read_edge_list(a.graph)
    obs = perturbation.perturb(g, perturbation.PerturbationParams(a.p, a.q, a.seed))
    graphs.write_edge_list(a.out, obs)
    st = perturbation.perturbation_stats(g, obs)
    print(f"deleted={st.deleted} inserted={st.inserted} retained={st.retained}")


def _filter(a):
    g = graphs.read_edge_list(a.graph)
    cfg = filtering.FilterConfig(a.tau)
    out = filtering.tau_filter(g, cfg)
    graphs.write_edge_list(a.out, out)
    if a.scores:
        filtering.write_scores_csv(a.scores, g)
    print(f"kept {out.num_edges} of {g.num_edges} edges")


def _evaluate(a):
    truth = graphs.read_edge_list(a.truth)
    test = graphs.read_edge_list(a.test)
    n = max(truth.n, test.n)
    # an edge list only implies n up to its largest index; align the two
    truth = graphs.Graph.from_keys(n, truth.edges()[:, 0] * n + truth.edges()[:, 1])
    test = graphs.Graph.from_keys(n, test.edges()[:, 0] * n + test.edges()[:, 1])
    if a.pairs is None:
        cmp = metrics.compare(metrics.hop_distances(truth), metrics.hop_distances(test))
    else:
        pairs = metrics.sample_pairs(n, a.pairs, a.seed)
        cmp = metrics.compare_pairs(metrics.pair_hops(truth, pairs), metrics.pair_hops(test, pairs))
    cmp.to_csv(a.out)
    print(f"r2approx={cmp.r2approx:.6f} delta_n={cmp.delta_n:.6f} good={cmp.good_index_count}")


def _bounds(a):
    rep = theory.feasibility_report(theory.RegimeParams(a.n, a.s, a.L, a.c, a.p, a.q))
    sys.stdout.write(theory.format_report(rep, a.format))


def _sweep(a):
    cfg = harness.load_sweep_config(a.config)
    report = harness.run_synthetic_sweep(cfg)
    for path in harness.emit_plots(report, a.out_dir):
        print(path)


def _realnet(a):
    report = harness.run_realnet_experiment(a.edges, a.q_grid, a.tau, a.trials, a.seed, a.pairs)
    for path in harness.emit_plots(report, a.out_dir):
        print(path)


COMMANDS = {"generate": _generate, "graph": _graph, "perturb": _perturb, "filter": _filter,
            "evaluate": _evaluate, "bounds": _bounds, "sweep": _sweep, "realnet": _realnet}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ParameterError, DomainError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
