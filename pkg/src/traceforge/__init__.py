"""Exact trace-field computations for gluings of arithmetic hyperbolic pieces."""

__version__ = "0.1.0"
