"""Concircular-tensor separation of variables for natural Hamiltonians."""

__version__ = "0.1.0"
