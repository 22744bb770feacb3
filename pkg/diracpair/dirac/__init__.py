"""Dirac structures on coordinate patches."""
