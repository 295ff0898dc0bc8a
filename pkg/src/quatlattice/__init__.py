"""Lattices from maximal orders in the quaternion algebra (-1,-1 / F)."""

__version__ = "0.1.0"
