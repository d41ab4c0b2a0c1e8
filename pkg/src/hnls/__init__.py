"""Pseudospectral laboratory for the higher-order (Airy-Schrodinger) NLS."""

__version__ = "0.1.0"
