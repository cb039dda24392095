"""Conditional extreme value index estimation under right random censoring."""

__version__ = "0.1.0"
