import math
from pathlib import Path

import numpy as np
import pytest

from conftest import random_graph
from netdenoise import harness as hs
from netdenoise.errors import FormatError, ParameterError
from netdenoise.filtering import edge_scores
from netdenoise.geometry import SpaceSpec
from netdenoise.graphs import Graph, write_edge_list
from netdenoise.harness import ReportRow, SweepConfig, SweepReport

GOLDEN = Path(__file__).parent / "data" / "golden_report.csv"


def small_config(**kw):
    base = dict(space=SpaceSpec.circle(), n=300, q_grid=(0.0, 0.01, 0.03), p=0.1, r=0.1, trials=2,
                master_seed=3)
    base.update(kw)
    return SweepConfig(**base)


def golden_report():
    return SweepReport([
        ReportRow(0.0, 0, "observed", 1.0, 0.0, 45, 1.25),
        ReportRow(0.0, 0, "filtered", 1.0, 0.0, 45, 1.5),
        ReportRow(0.01, 0, "observed", 0.6, math.nan, 0, 1.0),
        ReportRow(0.01, 0, "filtered", 0.9777777777777777, 0.125, 45, 2.0),
    ], {"kind": "synthetic", "pairs_mode": "all", "tau": 0.1}).sorted()


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(q_grid=()), dict(q_grid=(0.2, 0.1)), dict(q_grid=(0, 1.5)),
                                    dict(trials=0), dict(r=None), dict(knn_multiplier=2.0),
                                    dict(p=1.5), dict(tau=2.0), dict(pairs=0)])
    def test_invalid(self, kw):
        with pytest.raises(ParameterError):
            small_config(**kw)

    def test_from_toml(self, tmp_path):
        p = tmp_path / "sweep.toml"
        p.write_text('n = 100\nq_grid = [0.0, 0.1]\nknn_multiplier = 2.0\nknn_k = 5\ntau = 0.05\n'
                     'trials = 1\nmaster_seed = 9\npairs = 500\n'
                     '[space]\nkind = "sphere-nonuniform"\nalpha = 0.5\n', encoding="utf-8")
        cfg = hs.load_sweep_config(p)
        assert cfg.space.params["alpha"] == 0.5 and cfg.knn_k == 5 and cfg.pairs == 500
        assert cfg.pairs_mode == "sampled(500)" and cfg.r is None

    def test_unknown_key(self):
        with pytest.raises(ParameterError):
            hs.sweep_config_from_dict({"n": 10, "q_grid": [0], "r": 0.1, "radius": 1, "space": {"kind": "circle"}})

    def test_missing_space(self):
        with pytest.raises(ParameterError):
            hs.sweep_config_from_dict({"n": 10, "q_grid": [0], "r": 0.1})

    def test_bad_toml(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("n = = 3\n", encoding="utf-8")
        with pytest.raises(FormatError):
            hs.load_sweep_config(p)


class TestSyntheticSweep:
    def test_shape_and_ranges(self):
        rep = hs.run_synthetic_sweep(small_config())
        assert len(rep.rows) == 3 * 2 * 2
        cells = {(r.q, r.trial, r.variant) for r in rep.rows}
        assert len(cells) == 12
        assert all(0.0 <= r.r2approx <= 1.0 and r.runtime_ms >= 0 for r in rep.rows)
        assert rep.rows == sorted(rep.rows, key=ReportRow.key)
        meta = rep.metadata
        assert meta["tau"] in hs.TAU_GRID and meta["pairs_mode"] == "all"
        assert {"s_hat", "L_hat", "r", "bounds", "warnings", "config"} <= set(meta)
        # n = 300 is too small for the ball-mass assumption at this radius
        assert meta["warnings"] and meta["bounds"]["assumption_r"] is False

    def test_deterministic(self):
        a = hs.run_synthetic_sweep(small_config()).without_timings()
        b = hs.run_synthetic_sweep(small_config()).without_timings()
        assert a.rows == b.rows and a.metadata == b.metadata
        c = hs.run_synthetic_sweep(small_config(master_seed=4)).without_timings()
        assert c.rows != a.rows

    def test_q0_p0_identity(self):
        cfg = small_config(q_grid=(0.0,), p=0.0, tau=0.0)
        for r in hs.run_synthetic_sweep(cfg).rows:
            assert r.r2approx == 1.0 and r.delta_n == 0.0

    def test_q0_p0_with_tau_below_min_jaccard(self):
        from netdenoise.geometry import sample_points
        from netdenoise.graphs import build_r_graph
        from netdenoise.rng import derive_seed
        cfg = small_config(q_grid=(0.0,), p=0.0, trials=1)
        g = build_r_graph(sample_points(cfg.space, cfg.n, derive_seed(cfg.master_seed, "sweep.sample", 0)), cfg.r)
        _, inter, union = edge_scores(g)
        tau = float(np.min(inter / union))
        rows = hs.run_synthetic_sweep(small_config(q_grid=(0.0,), p=0.0, trials=1, tau=tau)).rows
        assert all(r.r2approx == 1.0 and r.delta_n == 0.0 for r in rows)

    def test_knn_radius(self):
        rep = hs.run_synthetic_sweep(small_config(r=None, knn_multiplier=5.0, trials=1, q_grid=(0.0,)))
        assert rep.metadata["r"][0] > 0

    def test_sampled_pairs(self):
        rep = hs.run_synthetic_sweep(small_config(pairs=2000, trials=1))
        assert rep.metadata["pairs_mode"] == "sampled(2000)"
        assert all(r.good_index_count <= 2000 for r in rep.rows)

    def test_filtered_beats_observed_at_small_q(self):
        cfg = SweepConfig(SpaceSpec.circle(), 2000, (0.0, 0.001, 0.005), r=0.08, trials=3, master_seed=1)
        rep = hs.run_synthetic_sweep(cfg)
        wins, cells = 0, 0
        for trial in range(3):
            obs = [r.r2approx for r in rep.rows if r.trial == trial and r.variant == "observed"]
            fil = [r.r2approx for r in rep.rows if r.trial == trial and r.variant == "filtered"]
            assert obs == sorted(obs, reverse=True)
            wins += sum(f >= o for f, o in zip(fil, obs))
            cells += len(obs)
        assert wins >= 0.9 * cells

    def test_select_tau(self):
        g = Graph.complete(6)
        tau, kept = hs.select_tau(g, 0.0, seed=0)
        assert tau == max(hs.TAU_GRID) and kept[tau] == 1.0
        tau, kept = hs.select_tau(Graph.from_edges(4, [(0, 1), (2, 3)]), 0.0, seed=0)
        assert tau == min(hs.TAU_GRID) and kept[tau] == 0.0


class TestRealnet:
    def test_q0_identity(self, tmp_path, rng):
        p = tmp_path / "net.edges"
        write_edge_list(p, random_graph(rng, 40, 0.15))
        rep = hs.run_realnet_experiment(p, [0.0], tau=0.1, trials=2, master_seed=1)
        assert len(rep.rows) == 4
        assert all(r.r2approx == 1.0 and r.delta_n == 0.0 for r in rep.rows)

    def test_toy_q1(self):
        g = Graph.from_edges(10, [(i, i + 1) for i in range(9)])
        rep = hs.run_realnet_experiment(g, [1.0], tau=0.2, trials=1)
        obs = next(r for r in rep.rows if r.variant == "observed")
        assert obs.good_index_count == 45 and math.isfinite(obs.delta_n)
        assert all(0 <= r.r2approx <= 1 for r in rep.rows)

    def test_malformed_edge_list(self, tmp_path):
        p = tmp_path / "bad.edges"
        p.write_text("0 1\n1 two\n", encoding="utf-8")
        with pytest.raises(FormatError, match=":2:"):
            hs.run_realnet_experiment(p, [0.0], tau=0.1)

    def test_pairs_resolution(self):
        assert hs.resolve_pairs(100, "auto") is None
        assert hs.resolve_pairs(hs.LARGE_N + 1, "auto") == hs.DEFAULT_SAMPLED_PAIRS
        assert hs.resolve_pairs(10, "all") is None and hs.resolve_pairs(10, "7") == 7

    def test_sampled_pairs_shared_across_variants(self, rng):
        g = random_graph(rng, 200, 0.05)
        rep = hs.run_realnet_experiment(g, [0.0, 0.01], tau=0.05, trials=1, pairs=1000)
        assert rep.metadata["pairs_mode"] == "sampled(1000)"
        assert all(r.good_index_count <= 1000 for r in rep.rows)

    def test_ppi_scale_all_pairs(self):
        rng = np.random.default_rng(0)
        n, m = 6327, 147547
        u, v = rng.integers(0, n, 2 * m), rng.integers(0, n, 2 * m)
        keys = np.unique((np.minimum(u, v) * n + np.maximum(u, v))[u != v])
        g = Graph.from_keys(n, rng.permutation(keys)[:m])
        assert g.num_edges == m
        rep = hs.run_realnet_experiment(g, [0.0, 0.001], tau=0.05, trials=1)
        assert rep.metadata["pairs_mode"] == "all" and len(rep.rows) == 4
        assert rep.rows[0].good_index_count == n * (n - 1) // 2


class TestReportFiles:
    def test_golden_serialisation(self, tmp_path):
        p = tmp_path / "report.csv"
        hs.write_report_csv(p, golden_report())
        assert p.read_text(encoding="utf-8") == GOLDEN.read_text(encoding="utf-8")

    def test_golden_parses(self):
        rep = hs.read_report_csv(GOLDEN)
        want = golden_report()
        assert rep.metadata == want.metadata
        for a, b in zip(rep.rows, want.rows):
            assert a.key() == b.key() and a.good_index_count == b.good_index_count
            assert (a.r2approx, a.runtime_ms) == (b.r2approx, b.runtime_ms)
            assert a.delta_n == b.delta_n or (math.isnan(a.delta_n) and math.isnan(b.delta_n))

    def test_round_trip_sweep(self, tmp_path):
        rep = hs.run_synthetic_sweep(small_config(trials=1))
        p = tmp_path / "r.csv"
        hs.write_report_csv(p, rep)
        back = hs.read_report_csv(p)
        assert back.rows == rep.rows
        assert back.metadata["tau"] == rep.metadata["tau"]

    def test_wrong_version(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("# netdenoise-report v0\nq\n", encoding="utf-8")
        with pytest.raises(FormatError):
            hs.read_report_csv(p)

    def test_emit_single_row(self, tmp_path):
        rep = SweepReport([ReportRow(0.0, 0, "observed", 1.0, 0.0, 1, 0.5)], {})
        paths = hs.emit_plots(rep, tmp_path / "out")
        assert [p.name for p in paths] == ["report.csv", "r2approx.svg", "delta_n.svg"]
        lines = paths[0].read_text().splitlines()
        assert lines[2] == ",".join(hs.REPORT_COLUMNS) and len(lines) == 4
        svg = paths[1].read_text()
        assert svg.startswith("<svg") and "<circle" in svg

    def test_emit_empty(self, tmp_path):
        with pytest.raises(ParameterError):
            hs.emit_plots(SweepReport([], {}), tmp_path)

    def test_emit_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            hs.emit_plots(golden_report(), blocker / "sub")
