"""Artifact writer for run outputs.

All tables go through pandas with a frozen column order and round-trip
float formatting so reruns with a fixed seed produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd
import structlog

from src.framework.nn.mlp import MlpModel

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = "%.17g"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default, allow_nan=True)


def write_atomic(path: Path, text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class ArtifactStore:
    """Writes run artifacts under one directory and remembers what it wrote."""

    def __init__(self, out_dir: Path | str) -> None:
        self.out_dir = Path(out_dir)
        self.written: list[Path] = []
        self._logger = structlog.get_logger(__name__).bind(out_dir=str(self.out_dir))

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _track(self, path: Path) -> Path:
        if path not in self.written:
            self.written.append(path)
        self._logger.debug("artifact_written", file=path.name)
        return path

    def write_csv(
        self, name: str, rows: Sequence[dict[str, Any]], columns: Sequence[str]
    ) -> Path:
        """Write rows as CSV with exactly the given column order."""
        frame = pd.DataFrame(list(rows), columns=list(columns))
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return self._track(path)

    def write_json(self, name: str, data: Any) -> Path:
        path = self.path(name)
        write_atomic(path, to_json(data) + "\n")
        return self._track(path)

    def write_checkpoint(self, name: str, model: MlpModel) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        model.save(path)
        return self._track(path)

    def adopt(self, path: Path) -> Path:
        """Track a file written by another writer (figures)."""
        return self._track(path)

    def digests(self) -> dict[str, str]:
        return {
            str(p.relative_to(self.out_dir)): sha256_file(p) for p in self.written if p.exists()
        }
