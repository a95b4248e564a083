import numpy as np
import pytest

from springsticks.cli import main
from springsticks.config import (
    get,
    get_axis,
    get_domain,
    get_list,
    load_config,
    parse_config_text,
)
from springsticks.errors import ConfigError


class TestParsing:
    def test_basic_lines_and_comments(self):
        cfg = parse_config_text(
            "# comment\n"
            "physics.mass = 1.5\n"
            "data.function = cos_x  # trailing comment\n"
            "\n"
            "sweep.flag = true\n"
        )
        assert get(cfg, "physics.mass", kind=float) == 1.5
        assert get(cfg, "data.function", kind=str) == "cos_x"
        assert get(cfg, "sweep.flag") is True

    def test_missing_key_names_path(self):
        with pytest.raises(ConfigError, match="physics.mass"):
            get({}, "physics.mass")

    def test_malformed_line_rejected(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("not an assignment\n")
        with pytest.raises(ConfigError, match="section.key"):
            parse_config_text("mass = 1\n")

    def test_axis_specs(self):
        cfg = parse_config_text("sweep.k = logspace:1e-3:10:5\nsweep.g = 1,2,4\n"
                                "sweep.l = linspace:0:1:3\n")
        ks = get_axis(cfg, "sweep.k")
        assert len(ks) == 5
        assert ks[0] == pytest.approx(1e-3)
        assert ks[-1] == pytest.approx(10.0)
        assert np.allclose(get_axis(cfg, "sweep.g"), [1, 2, 4])
        assert np.allclose(get_axis(cfg, "sweep.l"), [0, 0.5, 1])
        with pytest.raises(ConfigError, match="sweep.bad"):
            get_axis(parse_config_text("sweep.bad = logspace:0:1:4\n"), "sweep.bad")

    def test_domain_spec(self):
        cfg = parse_config_text("data.domain = 0:1, -2:3\n")
        assert get_domain(cfg, "data.domain") == ((0.0, 1.0), (-2.0, 3.0))
        with pytest.raises(ConfigError, match="empty"):
            get_domain(parse_config_text("data.domain = 1:1\n"), "data.domain")

    def test_list_coercion(self):
        cfg = parse_config_text("lattice.nodes_per_dim = 5, 5\n")
        assert get_list(cfg, "lattice.nodes_per_dim", kind=int) == [5, 5]

    def test_kind_mismatch(self):
        cfg = parse_config_text("schedule.epochs = maybe\n")
        with pytest.raises(ConfigError, match="schedule.epochs"):
            get(cfg, "schedule.epochs", kind=int)


FIT_CONFIG = """
experiment.id = fit
experiment.seed = 3
data.function = sin_x
data.domain = 0:1
data.n_points = 32
data.noise_sigma = 0.01
lattice.nodes_per_dim = 4
physics.friction = 10
physics.temperature = 1e-4
schedule.epochs = 60
schedule.batch_size = 8
fit.mlp = false
"""


class TestCli:
    def test_fit_runs_and_writes_artifacts(self, tmp_path):
        cfg = tmp_path / "fit.ini"
        cfg.write_text(FIT_CONFIG)
        out = tmp_path / "out"
        assert main(["fit", "--config", str(cfg), "--out", str(out)]) == 0
        for name in ("dataset.csv", "ss_report.csv", "grid_state.csv",
                     "summary.txt", "manifest.txt"):
            assert (out / name).exists(), name
        manifest = (out / "manifest.txt").read_text()
        assert "seed = 3" in manifest
        assert "version = " in manifest

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["fit", "--config", str(tmp_path / "nope.ini")]) == 2

    def test_invalid_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("experiment.id = fit\ndata.function = unknown_fn\n"
                       "data.domain = 0:1\ndata.n_points = 4\n"
                       "lattice.nodes_per_dim = 3\nschedule.epochs = 2\n"
                       "schedule.batch_size = 2\n")
        assert main(["fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_mismatched_experiment_id_exits_2(self, tmp_path):
        cfg = tmp_path / "fit.ini"
        cfg.write_text(FIT_CONFIG)
        assert main(["entropy", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_numeric_failure_exits_3(self, tmp_path):
        cfg = tmp_path / "blow.ini"
        # one huge explicit step on a stiff system blows up deterministically
        cfg.write_text(
            "experiment.id = fit\n"
            "data.function = sin_x\n"
            "data.domain = 0:1\n"
            "data.n_points = 32\n"
            "lattice.nodes_per_dim = 4\n"
            "physics.stiffness = 1e9\n"
            "physics.friction = 0\n"
            "physics.temperature = 0\n"
            "schedule.epochs = 400\n"
            "schedule.batch_size = 8\n"
            "schedule.dt_epoch = 1.0\n"
            "schedule.inner_steps = 1\n"
            "fit.mlp = false\n"
        )
        assert main(["fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3

    def test_rerun_same_seed_byte_identical(self, tmp_path):
        cfg = tmp_path / "fit.ini"
        cfg.write_text(FIT_CONFIG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["fit", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["fit", "--config", str(cfg), "--out", str(out2)]) == 0
        for name in ("dataset.csv", "ss_report.csv", "grid_state.csv", "summary.txt"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_seed_override_changes_outputs(self, tmp_path):
        cfg = tmp_path / "fit.ini"
        cfg.write_text(FIT_CONFIG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["fit", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["fit", "--config", str(cfg), "--seed", "99",
                     "--out", str(out2)]) == 0
        assert (out1 / "grid_state.csv").read_bytes() != (out2 / "grid_state.csv").read_bytes()


class TestPhysicsValidation:
    def test_negative_friction_exits_2(self, tmp_path):
        cfg = tmp_path / "neg.ini"
        cfg.write_text(FIT_CONFIG.replace("physics.friction = 10",
                                          "physics.friction = -1"))
        assert main(["fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_nonpositive_mass_exits_2(self, tmp_path):
        cfg = tmp_path / "neg.ini"
        cfg.write_text(FIT_CONFIG + "physics.mass = 0\n")
        assert main(["fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
