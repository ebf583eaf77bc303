"""Reconstruct labelled points on a line from a partial graph of known distances."""

__version__ = "0.1.0"
