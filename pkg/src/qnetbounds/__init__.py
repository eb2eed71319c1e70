"""Entanglement-based capacity bounds for qubit channels and quantum networks."""

__version__ = "0.1.0"
