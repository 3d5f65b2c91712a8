"""Linear-algebra helpers."""
