"""Simulation toolkit for photon-magnon hybrid-system transducers (ferromagnetic haloscopes)."""

__version__ = "0.1.0"
