"""Numerical laboratory for Schur multipliers, Riesz-Schur transforms and RC_p norms."""

__version__ = "0.1.0"
