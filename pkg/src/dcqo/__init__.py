"""Digitized-counterdiabatic quantum optimization in the impulse regime."""

__version__ = "0.1.0"
