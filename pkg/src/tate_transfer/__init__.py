"""Tate duality and transfer maps for symmetric algebras over Z_(p)."""

__version__ = "0.1.0"
