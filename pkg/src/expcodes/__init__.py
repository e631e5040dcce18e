"""Tanner and AEL codes on bipartite expanders, list decoded through weak graph regularity."""

__version__ = "0.1.0"
