"""Utility modules."""

from src.utils.preset_loader import PresetLoader, read_key_values

__all__ = ["PresetLoader", "read_key_values"]
