"""Compact sphere packings with finitely many sizes: angle symbols, packing codes,
spherical triangulations, periodic disc packings and radius solvers."""

__version__ = "0.1.0"
