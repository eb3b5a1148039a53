"""Spherical rectangles with corner angles (A_j + 1/2) half-turns.

Nets are counted and enumerated in :mod:`sphrect.netcalc` and realized as
labelled graphs in :mod:`sphrect.netgraph`.  The Heun accessory problem is
handled by :mod:`sphrect.darboux` and :mod:`sphrect.periods`, and the
one-parameter families and their limit moduli by :mod:`sphrect.families`.
"""
from .netcalc import AngleQuadruple, NetParams, count, enumerate_nets, exists

__version__ = "0.1.0"

__all__ = ["AngleQuadruple", "NetParams", "count", "enumerate_nets", "exists", "__version__"]
