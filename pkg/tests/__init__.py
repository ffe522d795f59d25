"""Test suite for Kura-Next Voice Agent."""
