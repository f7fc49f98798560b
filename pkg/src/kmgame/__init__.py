"""Combinatorics and checks for signed Duhamel expansions.

The package enumerates the signed collapsing-map terms of a Duhamel
expansion, groups them with signed KM moves and wild moves into reference
classes, computes each class's time-integration domain, builds its
factorized D-tree, and checks the underlying identities exactly and on a
small lattice.
"""

from kmgame._backend import BACKEND, available_backends
from kmgame.core import (
    CollapseMap,
    Pair,
    SignedTree,
    SignMap,
    Skeleton,
    TimePermutation,
    make_pair,
)

__all__ = [
    "BACKEND",
    "available_backends",
    "CollapseMap",
    "Pair",
    "SignedTree",
    "SignMap",
    "Skeleton",
    "TimePermutation",
    "make_pair",
]

__version__ = "0.1.0"
