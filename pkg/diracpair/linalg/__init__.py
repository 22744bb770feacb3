"""Pointwise linear algebra of the generalized tangent space."""
