"""Schottky groups, their zeta-type infinite products, holomorphic
differentials and exact Tate-curve q-series.
"""

from .errors import SchottkyZetaError
from .moebius import INF, Circle, MoebiusMap
from .schottky import GroupSpec, SchottkyGroup, build, normalize

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Circle",
    "GroupSpec",
    "MoebiusMap",
    "SchottkyGroup",
    "SchottkyZetaError",
    "build",
    "normalize",
]
