"""Desk-scale epidemic policy exploration: simulator, emulator, landscape search."""

__version__ = "0.1.0"
