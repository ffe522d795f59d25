"""CSV, JSON, SVG and checkpoint writers."""

from src.infrastructure.artifacts.store import ArtifactStore, sha256_file, write_atomic

__all__ = ["ArtifactStore", "sha256_file", "write_atomic"]
