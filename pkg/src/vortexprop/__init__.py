"""Gaussian and vortex electron packets in a uniform magnetic field."""

__version__ = "0.1.0"
