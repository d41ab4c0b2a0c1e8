import json

import numpy as np
import pytest

from hnls import norms
from hnls.cli import main
from hnls.harness import experiments, io
from hnls.harness.config import (
    PROFILES,
    SCENARIOS,
    ConfigError,
    ExperimentConfig,
    GridSpec,
    InitialData,
)
from hnls.integrator import SolverConfig, Trajectory, evolve
from hnls.model import EquationParams
from hnls.spectral import Field, Grid

SMALL = GridSpec(n=128, L=30.0)
SHORT = SolverConfig(dt=0.01, t_end=0.1, record_every=2)


def small(scenario="general", **kw):
    base = dict(grid=SMALL, solver=SHORT)
    base.update(kw)
    return ExperimentConfig.for_scenario(scenario, **base)


class TestConfig:
    @pytest.mark.parametrize("scenario", SCENARIOS)
    def test_round_trip(self, scenario):
        cfg = ExperimentConfig.for_scenario(scenario, seed=7, thetas=(0.0, 0.5))
        back = ExperimentConfig.from_dict(json.loads(cfg.to_json()))
        assert back == cfg

    def test_load_partial_file_merges_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"scenario": "nls", "params": {"c": 2.0}, "grid": {"n": 256}}))
        cfg = ExperimentConfig.load(path)
        assert cfg.params == EquationParams(a=-1.0, b=0.0, c=2.0)
        assert cfg.grid == GridSpec(256, 80.0)

    @pytest.mark.parametrize("data", [
        {"scenario": "kdv"},
        {"thetas": [0.5, 1.5]},
        {"lambda_ladder": [8, 4]},
        {"lambda_ladder": [0, 4]},
        {"bogus": 1},
        {"params": {"f": 1.0}},
        {"initial_data": {"profile": "square"}},
        {"initial_data": {"width": -1.0}},
    ])
    def test_validation(self, data):
        with pytest.raises((ConfigError, ValueError)):
            ExperimentConfig.from_dict(data)

    def test_load_rejects_bad_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            ExperimentConfig.load(bad)
        bad.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="object"):
            ExperimentConfig.load(bad)

    @pytest.mark.parametrize("profile", PROFILES)
    def test_profiles_build(self, profile):
        cfg = ExperimentConfig.for_scenario("mkdv_soliton", grid=SMALL)
        u = InitialData(profile).build(cfg.build_grid(), cfg.params)
        assert u.is_finite()
        assert (norms.l2_sq(u) == 0) == (profile == "zero")

    def test_solver_for_carries_thetas(self):
        cfg = small(thetas=(0.25,))
        s = cfg.solver_for(-0.5)
        assert s.t_end == -0.5 and s.thetas == (0.25,)


class TestIO:
    def test_frames_round_trip(self, tmp_path):
        g = Grid(64, 10.0)
        traj = evolve(Field(g, np.exp(-g.x**2) + 0j), EquationParams(1, 1, 1, 1, 1),
                      SolverConfig(dt=0.05, t_end=0.2))
        path = io.write_frames(traj, tmp_path / "f.bin")
        grid, times, frames = io.read_frames(path)
        assert (grid.n, grid.length) == (64, 10.0)
        np.testing.assert_allclose(times, traj.times)
        np.testing.assert_allclose(frames, traj.values(), atol=1e-6)
        assert path.stat().st_size == 24 + 8 * len(traj) + 8 * 64 * len(traj)

    def test_truncated_frames_rejected(self, tmp_path):
        g = Grid(16, 1.0)
        path = io.write_frames(Trajectory([0.0], [Field.zeros(g)]), tmp_path / "f.bin")
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ValueError, match="bytes"):
            io.read_frames(path)
        path.write_bytes(b"\x00" * 5)
        with pytest.raises(ValueError, match="header"):
            io.read_frames(path)

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_diagnostics(self, tmp_path, fmt):
        g = Grid(64, 10.0)
        traj = evolve(Field(g, np.exp(-g.x**2) + 0j), EquationParams(b=1, d=1),
                      SolverConfig(dt=0.05, t_end=0.1, thetas=(0.5,)))
        path = io.write_diagnostics(traj.diagnostics, tmp_path / f"d.{fmt}", fmt)
        text = path.read_text()
        if fmt == "csv":
            lines = text.strip().splitlines()
            assert lines[0].startswith("t,I1,I2")
            assert len(lines) == 1 + len(traj)
        else:
            rows = json.loads(text)
            assert len(rows) == len(traj) and rows[0]["I2"] is None

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            io.write_diagnostics([], tmp_path / "d.x", "xml")

    def test_json_nonfinite(self):
        assert json.loads(io.dumps({"a": np.inf, "b": np.float64(1.5), "c": np.bool_(True)})) == \
            {"a": "inf", "b": 1.5, "c": True}


class TestExperiments:
    def test_degenerate_coefficients_keep_weighted_norm(self):
        cfg = small(params=EquationParams(), thetas=(0.5, 1.0))
        report = experiments.run_persistence(cfg)
        assert report.status == "pass"
        fwd, _ = report.runs
        y = [r.x2theta[1.0] for r in fwd.diagnostics]
        assert max(y) - min(y) <= 1e-12 * y[0]

    def test_free_flow_conserves_mass(self):
        report = experiments.run_apriori(small("free"))
        drift = report.select("I1_drift")
        assert drift and all(c["lhs"] <= 1e-12 for c in drift)

    def test_zero_perturbation_distance(self):
        cfg = small("mkdv_soliton", perturbation_eps=(0.0, 1e-3), thetas=(0.5,))
        report = experiments.run_continuous_dependence(cfg)
        assert report.summary["distance"]["theta=0.5,eps=0"] == 0.0

    def test_single_frame_mixed_monitor(self):
        cfg = small(solver=SolverConfig(dt=0.01, t_end=0.0))
        report = experiments.run_mixed_norm_monitor(cfg, [InitialData("gaussian")])
        row = report.summary["battery"][0]
        assert row["ratio"] is not None
        assert report.select("ratio_spread")[0]["lhs"] == 1.0

    def test_zero_field_is_skipped(self):
        cfg = small()
        report = experiments.run_mixed_norm_monitor(cfg, [InitialData("zero"), InitialData("gaussian")])
        assert report.summary["battery"][0]["ratio"] is None

    def test_gauge_check_deterministic(self):
        cfg = small(seed=3, solver=SolverConfig(dt=1e-3, t_end=0.1, record_every=20))
        a = experiments.run_gauge_check(cfg, n_random=50)
        b = experiments.run_gauge_check(cfg, n_random=50)
        assert a.to_dict()["checks"] == b.to_dict()["checks"]
        assert a.status == "pass"

    def test_lemma_family_passes(self):
        report = experiments.run_lemma_family(small(thetas=(0.25, 0.5, 0.75)))
        assert report.status == "pass"
        assert report.gated("AIL.B")

    def test_lemma_family_uses_interior_thetas(self):
        report = experiments.run_lemma_family(small(thetas=(0.0, 1.0)))
        assert report.summary["thetas"] == [round(0.1 * i, 1) for i in range(1, 10)]


class TestCli:
    def test_solve_writes_outputs(self, tmp_path, capsys):
        cfg = small()
        path = tmp_path / "c.json"
        path.write_text(cfg.to_json())
        code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o"), "--frames",
                     "--format", "json", "--theta", "0,0.5"])
        assert code == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["config"]["thetas"] == [0.0, 0.5]
        assert (tmp_path / "o" / "diagnostics.json").exists()
        assert (tmp_path / "o" / "frames.bin").exists()
        assert "pass" in capsys.readouterr().out

    def test_scenario_conflict_and_bad_theta(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(small("free").to_json())
        with pytest.raises(SystemExit):
            main(["solve", "--config", str(path), "--scenario", "nls", "--out", str(tmp_path)])
        with pytest.raises(SystemExit):
            main(["solve", "--theta", "0.5,2", "--out", str(tmp_path)])

    def test_fail_exit_code(self, tmp_path, monkeypatch):
        failing = experiments.Report("x", "fail", [], {}, [], [])
        monkeypatch.setitem(experiments.EXPERIMENTS, "solve", lambda cfg: failing)
        assert main(["solve", "--out", str(tmp_path)]) == 1
