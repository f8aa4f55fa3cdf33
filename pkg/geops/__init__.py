"""Exact computations with linear differential operators over Q[z]."""

__version__ = "0.3.0"
