"""Simulations of macroscopic superpositions and their decoherence."""

__version__ = "0.1.0"
