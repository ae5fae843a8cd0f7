"""Exact abelianization of rank-2 lambda-connections on a formal disc."""

__version__ = "0.1.0"
