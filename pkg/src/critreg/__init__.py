"""Regularity of critical points for couplings of Nevanlinna-function models."""

__version__ = "0.1.0"
