"""Combinatorics of postcritically finite branched covers of the sphere.

Wreath recursions on marked spheres, curve pullback and transition matrices,
certified Perron-Frobenius bounds, cutting and gluing along invariant
multicurves, and a small numerical pullback laboratory.
"""

from .curves import Multicurve, is_obstruction, normalize, pullback_class, saturate, search_obstruction
from .decomposition import ConfigurationTree, combine, decompose
from .recursion import BranchedCoverRecursion, orbifold_signature, portrait, validate
from .spectral import leading_eigenvalue
from .words import MarkedSphere

__all__ = [
    "BranchedCoverRecursion",
    "ConfigurationTree",
    "MarkedSphere",
    "Multicurve",
    "combine",
    "decompose",
    "is_obstruction",
    "leading_eigenvalue",
    "normalize",
    "orbifold_signature",
    "portrait",
    "pullback_class",
    "saturate",
    "search_obstruction",
    "validate",
]

__version__ = "0.1.0"
