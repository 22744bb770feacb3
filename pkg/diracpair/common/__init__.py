"""Shared plumbing for the package."""
