"""Butterfly network zero forcing and minimum rank toolkit."""

__version__ = "0.1.0"
