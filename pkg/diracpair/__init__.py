"""Dirac geometry on coordinate patches: verification and realizations."""

__version__ = "0.1.0"
