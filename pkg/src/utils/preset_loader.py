"""Run preset loading.

Presets are versioned key-value files under ``resources/presets``:

    resources/presets/<command>/<version>_<variant>.env
"""

import re
from dataclasses import dataclass
from pathlib import Path

import structlog
from dotenv import dotenv_values

logger = structlog.get_logger(__name__)

_VERSIONED = re.compile(r"^(v\d+)_(.+)$")
_KEY_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=")


@dataclass(frozen=True)
class KeyValueSource:
    """Values read from one key-value file, with the line each key came from."""

    path: Path
    values: dict[str, str]
    lines: dict[str, int]


def read_key_values(path: Path) -> KeyValueSource:
    """Read a dotenv-syntax file, lower-casing keys.

    Raises:
        FileNotFoundError: If the file does not exist.
        OSError: If it cannot be read.
    """
    text = path.read_text(encoding="utf-8")
    raw = dotenv_values(path)
    lines: dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = _KEY_LINE.match(line)
        if match:
            lines[match.group(1).lower()] = number
    values = {key.lower(): ("" if value is None else value) for key, value in raw.items()}
    return KeyValueSource(path=path, values=values, lines=lines)


class PresetLoader:
    """Loads and caches versioned run presets."""

    DEFAULT_RESOURCES_PATH = Path("resources/presets")

    def __init__(self, base_path: Path | str | None = None) -> None:
        """Initialize the preset loader.

        Args:
            base_path: Base directory holding one sub-directory per command.
        """
        self.base_path = Path(base_path) if base_path else self.DEFAULT_RESOURCES_PATH
        self._cache: dict[str, KeyValueSource] = {}
        self._logger = structlog.get_logger(__name__)

    def load(self, command: str, version: str = "v1", variant: str = "default") -> KeyValueSource:
        """Load a preset file.

        Args:
            command: Command name (e.g., 'train', 'perturb').
            version: Preset version (e.g., 'v1').
            variant: Preset variant (e.g., 'stabilized').

        Raises:
            FileNotFoundError: If no preset file matches.
        """
        cache_key = f"{command}/{version}_{variant}"
        if cache_key in self._cache:
            return self._cache[cache_key]

        path = self.base_path / command / f"{version}_{variant}.env"
        if not path.exists():
            raise FileNotFoundError(f"Preset not found for {cache_key}")
        source = read_key_values(path)
        self._cache[cache_key] = source
        self._logger.debug("preset_loaded", path=str(path))
        return source

    def load_named(self, command: str, name: str) -> KeyValueSource:
        """Load ``name``, which is either ``variant`` (version v1) or ``vN_variant``."""
        match = _VERSIONED.match(name)
        if match:
            return self.load(command, match.group(1), match.group(2))
        return self.load(command, "v1", name)

    def list_commands(self) -> list[str]:
        if not self.base_path.exists():
            return []
        return sorted(
            d.name for d in self.base_path.iterdir() if d.is_dir() and not d.name.startswith(".")
        )

    def list_presets(self, command: str) -> list[str]:
        """Preset names available for a command, as ``vN_variant``."""
        command_path = self.base_path / command
        if not command_path.exists():
            return []
        return sorted(f.stem for f in command_path.iterdir() if f.is_file() and f.suffix == ".env")

    def clear_cache(self) -> None:
        self._cache.clear()
        self._logger.debug("preset_cache_cleared")
