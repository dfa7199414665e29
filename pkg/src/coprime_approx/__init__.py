"""Inhomogeneous Diophantine approximation with coprime integers."""

__version__ = "0.1.0"
