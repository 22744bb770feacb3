"""Dual pairs: verification, composition and the realization pipeline."""
