"""Exact-arithmetic verification of SUSY structures on deformed graded manifolds."""

__version__ = "0.1.0"
