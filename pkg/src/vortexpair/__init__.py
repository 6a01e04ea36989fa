"""Concentrated traveling vortex pairs on the half-plane.

Computes maximizers of the penalized kinetic energy E - q*I over discrete
rearrangement classes, sweeps the concentration scale to measure the
asymptotic behavior (support diameter, centroid, multiplier and energy
bounds, rescaled-profile convergence), and evolves fields under the 2D
incompressible Euler equations to test the traveling and stability
properties.
"""

from .grid import (
    CellSet,
    CenteredGrid,
    HalfPlaneGrid,
    ScalarField,
    centroid,
    diameter,
    integral,
    lp_norm,
    mirror,
    support,
)
from .kernel import KernelEvaluator, green, self_cell_constant

__all__ = [
    "CellSet",
    "CenteredGrid",
    "HalfPlaneGrid",
    "ScalarField",
    "centroid",
    "diameter",
    "integral",
    "lp_norm",
    "mirror",
    "support",
    "KernelEvaluator",
    "green",
    "self_cell_constant",
]

__version__ = "0.1.0"
