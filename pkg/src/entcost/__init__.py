"""Computable lower bounds on entanglement cost via semidefinite programming."""

__version__ = "0.1.0"
