"""Infrastructure layer - artifact files on disk."""

from src.infrastructure.artifacts.store import ArtifactStore

__all__ = ["ArtifactStore"]
