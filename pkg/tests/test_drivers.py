import numpy as np
import pytest

from springsticks.config import parse_config_text
from springsticks.drivers import (
    extract_plateau,
    run_entropy,
    run_error_scaling,
    run_fit,
    run_scale_sweep,
    run_tlb_expressivity,
    run_tlb_heatmap,
)

SWEEP_BASE = """
experiment.id = scale-sweep
data.function = cos_x
data.domain = 0:6.283185307179586
data.n_points = 20
data.seed = 11
lattice.nodes_per_dim = 2
physics.friction = 0.1
physics.temperature = 1.0
schedule.epochs = 120
schedule.batch_size = 16
sweep.k = 1e-5,1e-4,1e-3,1
sweep.n_trajectories = 16
sweep.n_boot = 50
"""


class TestExtractPlateau:
    def test_flat_series(self):
        ks = np.logspace(-5, -1, 5)
        dfs = np.full(5, 0.4)
        value, found = extract_plateau(ks, dfs)
        assert found
        assert value == pytest.approx(0.4)

    def test_plateau_then_rise(self):
        ks = np.logspace(-5, 2, 8)
        dfs = np.array([0.3, 0.3, 0.301, 0.299, 0.8, -2.0, -20.0, -200.0])
        value, found = extract_plateau(ks, dfs)
        assert found
        assert value == pytest.approx(0.3, abs=0.01)

    def test_no_plateau_flagged(self):
        ks = np.logspace(-3, 2, 6)
        dfs = -ks * 3.0
        value, found = extract_plateau(ks, dfs)
        assert not found

    def test_sign_insensitive_magnitude(self):
        ks = np.logspace(-5, -3, 4)
        dfs = np.full(4, -1.2)
        value, found = extract_plateau(ks, dfs)
        assert found
        assert value == pytest.approx(1.2)


class TestScaleSweep:
    def test_writes_expected_schema_and_continues(self, tmp_path):
        cfg = parse_config_text(SWEEP_BASE)
        rows = run_scale_sweep(cfg, tmp_path, seed=1, jobs=1)
        assert len(rows) == 4
        header = (tmp_path / "scale_sweep.csv").read_text().splitlines()[0]
        assert header == "k,M,loss_mean,loss_std,deltaF,deltaF_lo,deltaF_hi"
        jarz = (tmp_path / "jarzynski.txt").read_text().splitlines()
        assert len(jarz) == 4
        assert jarz[0].startswith("n_traj=16,")

    def test_jobs_parallel_identical_output(self, tmp_path):
        cfg = parse_config_text(SWEEP_BASE)
        run_scale_sweep(cfg, tmp_path / "serial", seed=1, jobs=1)
        run_scale_sweep(cfg, tmp_path / "parallel", seed=1, jobs=3)
        assert ((tmp_path / "serial" / "scale_sweep.csv").read_bytes()
                == (tmp_path / "parallel" / "scale_sweep.csv").read_bytes())

    def test_point_failure_recorded_and_sweep_continues(self, tmp_path):
        cfg = parse_config_text(SWEEP_BASE + "schedule.inner_steps = 1\n"
                                + "sweep.mass_equals_stiffness = false\n"
                                + "physics.mass = 1e-9\n")
        # a single coarse step on an ultra-stiff system diverges at every point
        cfg["sweep.k"] = "1e3"
        rows = run_scale_sweep(cfg, tmp_path, seed=1, jobs=1)
        assert rows[0]["error"]
        body = (tmp_path / "scale_sweep.csv").read_text().splitlines()[1]
        assert "nan" in body
        assert "failed" in (tmp_path / "manifest.txt").read_text()


class TestTlbDrivers:
    def test_expressivity_schema(self, tmp_path):
        cfg = parse_config_text(SWEEP_BASE.replace("scale-sweep", "tlb-expressivity"))
        cfg["expressivity.n_sticks"] = "1,2"
        cfg["sweep.k"] = "1e-5,1e-4,1e-3"
        results = run_tlb_expressivity(cfg, tmp_path, seed=2, jobs=1)
        lines = (tmp_path / "tlb_expressivity.csv").read_text().splitlines()
        assert lines[0] == "N_s,deltaF_min"
        assert len(lines) == 3
        assert all(np.isfinite(r["deltaF_min"]) for r in results)
        assert (tmp_path / "tlb_expressivity_points.csv").exists()

    def test_heatmap_schema(self, tmp_path):
        cfg = parse_config_text(SWEEP_BASE.replace("scale-sweep", "tlb-heatmap"))
        cfg["heatmap.gamma"] = "0.5,5"
        cfg["heatmap.T"] = "0.5,5"
        cfg["sweep.k"] = "1e-5,1e-4,1e-3"
        results = run_tlb_heatmap(cfg, tmp_path, seed=3, jobs=1)
        lines = (tmp_path / "tlb_heatmap.csv").read_text().splitlines()
        assert lines[0] == "gamma,T,deltaF_min"
        assert len(lines) == 5
        assert len(results) == 4


class TestErrorScaling:
    def test_oracle_only_schema_and_slopes(self, tmp_path):
        cfg = parse_config_text(
            "experiment.id = error-scaling\n"
            "error.functions = sin_x,x_squared\n"
            "error.n_sticks = 4,8,16\n"
            "error.quadrature = 12\n"
        )
        rows = run_error_scaling(cfg, tmp_path, seed=4, jobs=1)
        lines = (tmp_path / "error_scaling.csv").read_text().splitlines()
        assert lines[0] == "f,N_s,E_oracle,E_trained_mean,E_trained_std"
        assert len(lines) == 7
        slopes = dict(
            line.split(" = ") for line in (tmp_path / "slopes.txt").read_text().splitlines()
        )
        assert abs(float(slopes["x_squared"]) + 2.0) < 0.05

    def test_trained_path_fills_columns(self, tmp_path):
        cfg = parse_config_text(
            "experiment.id = error-scaling\n"
            "error.functions = sin_x\n"
            "error.n_sticks = 2\n"
            "error.trained = true\n"
            "error.n_runs = 2\n"
            "error.quadrature = 8\n"
            "data.n_points = 16\n"
            "schedule.epochs = 40\n"
            "schedule.batch_size = 8\n"
        )
        rows = run_error_scaling(cfg, tmp_path, seed=5, jobs=1)
        assert np.isfinite(rows[0]["E_trained_mean"])
        assert rows[0]["E_trained_mean"] > 0


class TestEntropyDriver:
    def test_outputs_per_setting(self, tmp_path):
        cfg = parse_config_text(
            "experiment.id = entropy\n"
            "entropy.gamma = 10\n"
            "entropy.k = 1\n"
            "entropy.T = 1e-4\n"
            "entropy.t_final = 10\n"
            "entropy.dt_frac = 0.2\n"
            "entropy.record_stride = 5\n"
        )
        results = run_entropy(cfg, tmp_path, seed=6, jobs=1)
        assert (tmp_path / "entropy_g10_k1.csv").exists()
        assert (tmp_path / "thermo_g10_k1.csv").exists()
        head = (tmp_path / "entropy_g10_k1.csv").read_text().splitlines()[0]
        assert head == "t,Pi,Phi,U_mean"
        head2 = (tmp_path / "thermo_g10_k1.csv").read_text().splitlines()[0]
        assert head2 == "t,Pi,Phi,S_gauss,U_mean,K_mean"
        r = results[0]
        assert r["Pi"].min() > -1e-8


class TestFitDriver:
    def test_mlp_reports_share_schema(self, tmp_path):
        cfg = parse_config_text(
            "experiment.id = fit\n"
            "data.function = sin_x\n"
            "data.domain = 0:1\n"
            "data.n_points = 24\n"
            "lattice.nodes_per_dim = 3\n"
            "physics.friction = 10\n"
            "physics.temperature = 1e-4\n"
            "schedule.epochs = 30\n"
            "schedule.batch_size = 8\n"
            "fit.mlp = true\n"
            "fit.mlp_epochs = 50\n"
        )
        run_fit(cfg, tmp_path, seed=7, jobs=1)
        for name in ("ss_report.csv", "mlp_report.csv", "mlpf_report.csv"):
            head = (tmp_path / name).read_text().splitlines()[0]
            assert head == "epoch,loss,U,K,W_acc"
        summary = (tmp_path / "summary.txt").read_text()
        assert "oracle_min_loss" in summary
        assert "mlpf_final_loss" in summary
