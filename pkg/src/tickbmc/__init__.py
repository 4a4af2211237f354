"""Bounded verification of precedence properties for timing-annotated threads."""

__version__ = "0.1.0"
