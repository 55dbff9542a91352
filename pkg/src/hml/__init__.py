"""Metrics on Calabi-Yau moduli from period data, with verification suites."""

__version__ = "0.1.0"
