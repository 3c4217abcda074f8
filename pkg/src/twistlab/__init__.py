"""Trace coordinates, Dehn twists and Goldman flows on SU(2) character varieties."""

__version__ = "0.1.0"
