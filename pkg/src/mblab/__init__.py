"""Numerical laboratory for a coupled KdV-KdV system with unequal dispersion."""

__version__ = "0.1.0"
