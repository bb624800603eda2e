"""Variational imaginary-time evolution for transcorrelated Hamiltonians."""

__version__ = "0.1.0"
