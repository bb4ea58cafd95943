"""Dual Bell-CHSH toolkit: entanglement of effects, experiment simulation and teleportation usefulness."""

__version__ = "0.1.0"
