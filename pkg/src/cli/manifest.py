"""Run manifest written at the end of every successful command."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import structlog
from pydantic import BaseModel, ConfigDict, Field

from src import __version__
from src.infrastructure.artifacts.store import ArtifactStore, to_json, write_atomic

logger = structlog.get_logger(__name__)

MANIFEST_NAME = "manifest.json"


class OutputFile(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    sha256: str
    bytes: int


class RunManifest(BaseModel):
    """What ran, with which resolved configuration, and what it produced.

    Only files that exist at write time are listed. A run directory without
    a manifest belongs to a failed run.
    """

    model_config = ConfigDict(frozen=True)

    command: str
    config: dict[str, Any]
    seed: int
    version: str = __version__
    outputs: list[OutputFile] = Field(default_factory=list)
    duration_seconds: float
    finished_at: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    summary: dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_store(
        cls,
        command: str,
        config: BaseModel,
        seed: int,
        store: ArtifactStore,
        duration_seconds: float,
        summary: dict[str, Any] | None = None,
    ) -> RunManifest:
        outputs = [
            OutputFile(
                path=name,
                sha256=digest,
                bytes=(store.out_dir / name).stat().st_size,
            )
            for name, digest in store.digests().items()
        ]
        return cls(
            command=command,
            config=config.model_dump(mode="json"),
            seed=seed,
            outputs=outputs,
            duration_seconds=duration_seconds,
            summary=json.loads(to_json(summary or {})),
        )

    def write(self, out_dir: Path) -> Path:
        """Write atomically to ``<out_dir>/manifest.json``."""
        path = out_dir / MANIFEST_NAME
        write_atomic(path, self.model_dump_json(indent=2) + "\n")
        logger.info("manifest_written", path=str(path), outputs=len(self.outputs))
        return path

    @classmethod
    def read(cls, out_dir: Path) -> RunManifest:
        return cls.model_validate_json((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))

    @staticmethod
    def clear(out_dir: Path) -> bool:
        """Remove a manifest left in ``out_dir`` by an earlier run."""
        path = out_dir / MANIFEST_NAME
        if not path.is_file():
            return False
        path.unlink()
        logger.info("stale_manifest_removed", path=str(path))
        return True
