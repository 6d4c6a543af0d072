"""Exact q-series machinery for the higher-genus local P^2 mirror computation."""

__version__ = "0.1.0"
