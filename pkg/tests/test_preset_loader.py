"""Tests for preset loading and key-value files."""

import pytest

from src.utils.preset_loader import PresetLoader, read_key_values


class TestReadKeyValues:
    """Tests for dotenv-syntax parsing."""

    def test_values_and_lines(self, tmp_path):
        """Test keys are lower-cased and remember their line."""
        path = tmp_path / "run.env"
        path.write_text("# header\n\nKERNEL=gaussian:sigma=1\nsteps = 20\n")
        source = read_key_values(path)
        assert source.values == {"kernel": "gaussian:sigma=1", "steps": "20"}
        assert source.lines == {"kernel": 3, "steps": 4}
        assert source.path == path

    def test_quoted_and_empty_values(self, tmp_path):
        """Test quotes are stripped and empty values become empty strings."""
        path = tmp_path / "run.env"
        path.write_text('kernel="sum[rgaussian:sigma=4;rgaussian:sigma=8]"\nstabilizer=\n')
        source = read_key_values(path)
        assert source.values["kernel"] == "sum[rgaussian:sigma=4;rgaussian:sigma=8]"
        assert source.values["stabilizer"] == ""

    def test_missing_file(self, tmp_path):
        """Test a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            read_key_values(tmp_path / "absent.env")


class TestPresetLoader:
    """Tests for versioned preset lookup."""

    def test_load_shipped_preset(self, presets_path):
        """Test a shipped preset loads with its values."""
        source = PresetLoader(presets_path).load("perturb", "v1", "stabilized")
        assert source.values["epsilon"] == "1.5"
        assert source.values["direction"] == "discriminator"

    def test_load_named_forms(self, presets_path):
        """Test bare and versioned names resolve to the same file."""
        loader = PresetLoader(presets_path)
        assert loader.load_named("flow", "generator") == loader.load_named("flow", "v1_generator")

    def test_cache(self, presets_path):
        """Test repeated loads return the cached source until cleared."""
        loader = PresetLoader(presets_path)
        first = loader.load("train", "v1", "stabilized")
        assert loader.load("train", "v1", "stabilized") is first
        loader.clear_cache()
        assert loader.load("train", "v1", "stabilized") is not first

    def test_missing_preset(self, presets_path):
        """Test an unknown variant raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            PresetLoader(presets_path).load("train", "v1", "absent")

    def test_listing(self, presets_path):
        """Test commands and presets are discoverable."""
        loader = PresetLoader(presets_path)
        assert loader.list_commands() == ["epsilon", "flow", "perturb", "spectrum", "train"]
        assert loader.list_presets("train") == ["v1_stabilized", "v1_unstabilized"]
        assert loader.list_presets("absent") == []

    def test_empty_base_path(self, tmp_path):
        """Test a missing preset root lists nothing."""
        assert PresetLoader(tmp_path / "none").list_commands() == []
