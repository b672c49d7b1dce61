"""Gluing equations of ideal triangulations, dilogarithms, the extended
Bloch group and Nahm sums.

Modules: zlinalg (exact integer matrices), triangulation, dilogarithm,
geometry (shapes, volumes, Dehn filling, potential function), bloch,
arithmetic, cli.
"""

__version__ = "0.1.0"
