"""End-to-end tests for the command line entry point."""

import json

import pandas as pd
import pytest

from src.cli.commands import SPECTRUM_COLUMNS, TABLE_COLUMNS
from src.cli.config import (
    EpsilonRunConfig,
    FlowRunConfig,
    PerturbRunConfig,
    SpectrumRunConfig,
    TrainRunConfig,
    build_run_config,
)
from src.cli.manifest import MANIFEST_NAME, RunManifest
from src.framework.core.exceptions import ConfigError
from src.framework.core.kernels import GaussianRbf, Stabilized
from src.main import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from src.utils.preset_loader import read_key_values

SMALL_FLOW = ["--n-real", "20", "--n-gen", "20", "--steps", "10", "--frame-every", "5"]


class TestBuildRunConfig:
    """Tests for layering presets, files and flags."""

    def test_flags_override_files(self, tmp_path):
        """Test a flag beats the config file, which beats the preset."""
        preset = tmp_path / "preset.env"
        preset.write_text("kernel=gaussian:sigma=1\nsteps=5\ndt=0.1\n")
        config = tmp_path / "run.env"
        config.write_text("steps=7\n")
        cfg = build_run_config(
            FlowRunConfig,
            [read_key_values(preset), read_key_values(config)],
            {"dt": 0.2, "seed": None},
        )
        assert cfg.kernel == GaussianRbf(sigma=1.0)
        assert cfg.steps == 7
        assert cfg.dt == 0.2
        assert cfg.seed == 0

    def test_defaults_sit_below_layers(self, tmp_path):
        """Test environment defaults apply only where nothing else sets the key."""
        config = tmp_path / "run.env"
        config.write_text("base=rgaussian:sigma=2\nstabilizer=rgaussian:sigma=1\nseed=9\n")
        cfg = build_run_config(
            EpsilonRunConfig, [read_key_values(config)], {}, defaults={"seed": 4}
        )
        assert cfg.seed == 9

    def test_invalid_value_names_line(self, tmp_path):
        """Test a bad value reports its field and line."""
        config = tmp_path / "run.env"
        config.write_text("# comment\nkernel=gaussian:sigma=1\nsteps=-3\n")
        with pytest.raises(ConfigError) as exc_info:
            build_run_config(FlowRunConfig, [read_key_values(config)], {})
        assert exc_info.value.field == "steps"
        assert exc_info.value.line == 3

    def test_unknown_key_names_line(self, tmp_path):
        """Test unknown keys are rejected with their line and the valid keys."""
        config = tmp_path / "run.env"
        config.write_text("kernel=gaussian:sigma=1\nstepz=3\n")
        with pytest.raises(ConfigError) as exc_info:
            build_run_config(FlowRunConfig, [read_key_values(config)], {})
        assert exc_info.value.field == "stepz"
        assert exc_info.value.line == 2
        assert "steps" in exc_info.value.hint

    def test_bad_kernel_in_file(self, tmp_path):
        """Test a malformed kernel string is reported against the kernel field."""
        config = tmp_path / "run.env"
        config.write_text("kernel=laplace:sigma=1\n")
        with pytest.raises(ConfigError) as exc_info:
            build_run_config(FlowRunConfig, [read_key_values(config)], {})
        assert exc_info.value.field == "kernel"
        assert exc_info.value.line == 1

    def test_spectrum_needs_kernel_or_table(self):
        """Test spectrum without a kernel is only valid in table mode."""
        with pytest.raises(ConfigError):
            build_run_config(SpectrumRunConfig, [], {})
        assert build_run_config(SpectrumRunConfig, [], {"table": True}).kernel is None

    def test_xi_range_ordered(self):
        """Test xi_max must exceed xi_min."""
        with pytest.raises(ConfigError):
            build_run_config(SpectrumRunConfig, [], {"table": True, "xi_min": 5, "xi_max": 1})

    def test_perturb_effective_kernel(self):
        """Test a stabilizer with positive weight wraps the kernel."""
        cfg = build_run_config(
            PerturbRunConfig,
            [],
            {"kernel": "rgaussian:sigma=4", "stabilizer": "rgaussian:sigma=1", "epsilon": 1.5},
        )
        assert isinstance(cfg.effective_kernel(), Stabilized)
        plain = build_run_config(PerturbRunConfig, [], {"kernel": "rgaussian:sigma=4"})
        assert plain.effective_kernel() == plain.kernel

    def test_unstabilized_train_preset(self, presets_path):
        """Test 'none' disables the stabilizer."""
        source = read_key_values(presets_path / "train" / "v1_unstabilized.env")
        cfg = build_run_config(TrainRunConfig, [source], {})
        assert cfg.stabilizer is None
        assert not cfg.to_train_config().stabilized

    def test_probe_list(self):
        """Test probes parse from a comma-separated string."""
        cfg = build_run_config(
            EpsilonRunConfig,
            [],
            {"base": "rgaussian:sigma=4", "stabilizer": "rgaussian:sigma=1", "probes": "0.5, 2"},
        )
        assert cfg.probes == (0.5, 2.0)


class TestExitCodes:
    """Tests for the exit status contract."""

    def test_missing_kernel(self, settings_env, capsys):
        """Test a command without its kernel exits 2 with a message."""
        assert main(["flow"]) == EXIT_CONFIG
        assert "kernel" in capsys.readouterr().err

    def test_zero_dt(self, settings_env, capsys):
        """Test an explicit dt of zero is rejected."""
        code = main(["flow", "--kernel", "gaussian:sigma=1", "--dt", "0", *SMALL_FLOW])
        assert code == EXIT_CONFIG
        assert "dt" in capsys.readouterr().err

    def test_unknown_preset(self, settings_env):
        """Test a missing preset is a configuration error."""
        assert main(["train", "--preset", "nonexistent"]) == EXIT_CONFIG

    def test_config_file_line_in_message(self, settings_env, tmp_path, capsys):
        """Test file diagnostics carry the line number."""
        config = tmp_path / "bad.env"
        config.write_text("kernel=gaussian:sigma=1\nsteps=zero\n")
        assert main(["flow", "--config", str(config)]) == EXIT_CONFIG
        assert "line 2: steps:" in capsys.readouterr().err

    def test_missing_config_file(self, settings_env, tmp_path):
        """Test an unreadable config file is a configuration error."""
        assert main(["flow", "--config", str(tmp_path / "missing.env")]) == EXIT_CONFIG

    def test_grid_too_coarse(self, settings_env, capsys):
        """Test a coarse oracle grid exits 2 with a remediation hint."""
        args = ["--kernel", "gaussian:sigma=0.1", "--half-width", "100", "--grid-points", "1024"]
        code = main(["spectrum", *args, "--no-svg"])
        assert code == EXIT_CONFIG
        assert "--grid-points" in capsys.readouterr().err

    def test_usage_error(self, settings_env):
        """Test argparse usage errors exit 2."""
        with pytest.raises(SystemExit) as exc_info:
            main(["spectrum", "--c", "not-a-number"])
        assert exc_info.value.code == 2

    def test_unwritable_output(self, settings_env, tmp_path):
        """Test an output path under a regular file exits 3."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        pair = ["--base", "rgaussian:sigma=2", "--stabilizer", "rgaussian:sigma=1"]
        code = main(["epsilon", *pair, "--out-dir", str(blocker / "run"), "--no-svg"])
        assert code == EXIT_IO


class TestCommands:
    """Tests for command artifacts and manifests."""

    def test_spectrum_single(self, settings_env, tmp_path):
        """Test a single-kernel spectrum writes its table, summary, figures and manifest."""
        out = tmp_path / "spectrum"
        assert main(["spectrum", "--kernel", "gaussian:sigma=2", "--out-dir", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "spectrum.csv")
        assert list(frame.columns) == SPECTRUM_COLUMNS
        assert len(frame) == 512
        summary = json.loads((out / "summary.json").read_text())
        assert (summary["verdict_gen"], summary["verdict_disc"]) == ("Stable", "Unstable")
        assert (out / "spectrum.svg").exists() and (out / "profile.svg").exists()
        manifest = RunManifest.read(out)
        assert manifest.command == "spectrum"
        assert {o.path for o in manifest.outputs} == {
            "spectrum.csv",
            "summary.json",
            "spectrum.svg",
            "profile.svg",
        }

    def test_spectrum_table(self, settings_env, tmp_path):
        """Test table mode covers every reference row."""
        out = tmp_path / "table"
        assert main(["spectrum", "--preset", "table", "--out-dir", str(out), "--no-svg"]) == 0
        table = pd.read_csv(out / "table.csv")
        assert list(table.columns) == TABLE_COLUMNS
        assert len(table) == 7
        assert (out / "spectrum_gaussian.csv").exists()

    def test_default_out_dir(self, settings_env):
        """Test runs land under the configured output root by command name."""
        code = main(["epsilon", "--preset", "gaussian_pair", "--no-svg"])
        assert code == EXIT_OK
        assert (settings_env / "epsilon" / MANIFEST_NAME).exists()

    def test_epsilon(self, settings_env, tmp_path, capsys):
        """Test the solver result, probes and printed margin table."""
        out = tmp_path / "eps"
        assert main(["epsilon", "--preset", "gaussian_pair", "--out-dir", str(out)]) == EXIT_OK
        result = json.loads((out / "epsilon.json").read_text())
        assert result["epsilon_min"] == pytest.approx(0.9906688, abs=1e-6)
        assert [p["certified"] for p in result["probes"]] == [False, True]
        assert "epsilon_min = 0.990668" in capsys.readouterr().out
        assert (out / "margin.svg").exists()

    def test_perturb_stabilized(self, settings_env, tmp_path):
        """Test the stabilized preset damps every resolved mode and the weak one does not."""
        out = tmp_path / "strong"
        args = ["perturb", "--preset", "stabilized", "--steps", "100", "--no-svg"]
        assert main([*args, "--out-dir", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["all_decaying"] is True
        assert summary["max_rel_err"] < 1e-3
        weak = tmp_path / "weak"
        assert main([*args, "--epsilon", "0.5", "--out-dir", str(weak)]) == EXIT_OK
        summary = json.loads((weak / "summary.json").read_text())
        assert summary["smallest_resolved_grows"] is True

    def test_flow_frames(self, settings_env, tmp_path):
        """Test the flow writes trajectory, frames and one figure per frame."""
        out = tmp_path / "flow"
        assert main(["flow", "--preset", "generator", *SMALL_FLOW, "--out-dir", str(out)]) == 0
        trajectory = pd.read_csv(out / "trajectory.csv")
        assert list(trajectory["step"]) == list(range(11))
        frames = pd.read_csv(out / "frames.csv")
        assert sorted(frames["step"].unique()) == [0, 5, 10]
        assert (out / "frame_000005.svg").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["non_increasing"] is True

    def test_train_small(self, settings_env, tmp_path):
        """Test a two-epoch run writes metrics, checkpoints and figures."""
        config = tmp_path / "train.env"
        config.write_text("eval_size=100\nmetric_subsample=50\n")
        out = tmp_path / "train"
        sizes = ["--epochs", "2", "--batch-size", "16", "--seed", "5"]
        code = main(["train", "--config", str(config), *sizes, "--out-dir", str(out)])
        assert code == EXIT_OK
        metrics = pd.read_csv(out / "metrics.csv")
        assert list(metrics["epoch"]) == [1, 2]
        for name in ["generator.json", "discriminator.json", "kde_generated.svg", "samples.svg"]:
            assert (out / name).exists()
        manifest = RunManifest.read(out)
        assert manifest.seed == 5
        assert manifest.config["epochs"] == 2

    def test_diverged_training_exits_ok(self, settings_env, tmp_path):
        """Test a training run that blows up halts, records it and still writes its manifest."""
        config = tmp_path / "train.env"
        config.write_text("eval_size=40\nmetric_subsample=20\n")
        out = tmp_path / "train"
        sizes = ["--epochs", "5", "--batch-size", "8", "--lr", "1e200", "--no-checkpoints"]
        code = main(["train", "--config", str(config), *sizes, "--out-dir", str(out), "--no-svg"])
        assert code == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["diverged"] is True
        assert summary["instability_indicators"][0] == "non_finite_loss"
        assert RunManifest.read(out).summary["diverged"] is True

    def test_failed_rerun_leaves_no_manifest(self, settings_env, tmp_path):
        """Test a rerun that fails in the same directory removes the earlier manifest."""
        out = tmp_path / "epsilon"
        good = ["--base", "rgaussian:sigma=2", "--stabilizer", "rgaussian:sigma=1"]
        assert main(["epsilon", *good, "--out-dir", str(out), "--no-svg"]) == EXIT_OK
        assert (out / MANIFEST_NAME).exists()
        bad = ["--base", "gaussian:sigma=1", "--stabilizer", "rq:alpha=2"]
        assert main(["epsilon", *bad, "--out-dir", str(out), "--no-svg"]) == EXIT_CONFIG
        assert not (out / MANIFEST_NAME).exists()


class TestDeterminism:
    """Tests for byte-identical reruns."""

    def test_flow_rerun(self, settings_env, tmp_path):
        """Test two runs with one seed write identical tables."""
        args = ["flow", "--preset", "discriminator", *SMALL_FLOW, "--seed", "3", "--no-svg"]
        assert main([*args, "--out-dir", str(tmp_path / "a")]) == EXIT_OK
        assert main([*args, "--out-dir", str(tmp_path / "b")]) == EXIT_OK
        for name in ["trajectory.csv", "frames.csv", "summary.json"]:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_spectrum_rerun(self, settings_env, tmp_path):
        """Test spectrum tables and figures are byte-identical across runs."""
        args = ["spectrum", "--kernel", "rq:alpha=2"]
        assert main([*args, "--out-dir", str(tmp_path / "a")]) == EXIT_OK
        assert main([*args, "--out-dir", str(tmp_path / "b")]) == EXIT_OK
        first = RunManifest.read(tmp_path / "a")
        second = RunManifest.read(tmp_path / "b")
        assert [o.sha256 for o in first.outputs] == [o.sha256 for o in second.outputs]
