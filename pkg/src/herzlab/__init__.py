"""Numerical laboratory for weighted Herz spaces with variable exponent."""

__version__ = "0.1.0"
