"""Expressions, jets and geometric fields on coordinate patches."""
