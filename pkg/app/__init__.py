"""Zeno-dynamics W-state generation and phase-covariant cloning simulator."""

__version__ = "0.1.0"
