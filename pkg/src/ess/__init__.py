"""Numerical lab for boundary-driven gradient growth in 2D Euler flow on symmetric domains."""

__version__ = "0.1.0"
