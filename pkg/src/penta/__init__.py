"""Exact cyclotomic-associator and double-shuffle verification toolkit."""

__version__ = "0.1.0"
