"""Refinement structure between a coarse lattice and its n+k refinement.

Coarse cube c occupies the fine block c·b^(k⁰) + [0, b^(k⁰))^d (corner-anchored).
For k¹ > 0 the fine torus is larger than the embedded coarse region and the
remaining fine cubes are exterior.
"""

import itertools
from functools import cached_property
from typing import FrozenSet, Sequence

import numpy as np

from .exceptions import LatticeSpecError
from .geometry import TorusLattice
from .types import CubeIndex, LatticeSpec, RefinementStep


def distinguished_subcube(
    coarse: LatticeSpec, cube: Sequence[int], k: RefinementStep
) -> CubeIndex:
    """Central fine cube of the b^(dk⁰)-block of ``cube``.

    Args:
        coarse: Coarse lattice spec at scale n
        cube: Coarse cube Δ₀
        k: Refinement step

    Returns:
        Fine cube index c·b^(k⁰) + (b^(k⁰)-1)/2 per axis

    Raises:
        LatticeSpecError: If the base is even (no unique center)
    """
    if coarse.b % 2 == 0:
        raise LatticeSpecError("Distinguished subcube requires an odd base", "b")
    TorusLattice(coarse).check_cube(cube)
    block = coarse.b**k.k0
    offset = (block - 1) // 2
    return tuple(int(c) * block + offset for c in cube)


def refine_cover(
    coarse: LatticeSpec, cube: Sequence[int], k: RefinementStep
) -> FrozenSet[CubeIndex]:
    """The b^(dk⁰) fine cubes contained in coarse ``cube``."""
    TorusLattice(coarse).check_cube(cube)
    block = coarse.b**k.k0
    ranges = [range(int(c) * block, (int(c) + 1) * block) for c in cube]
    return frozenset(tuple(f) for f in itertools.product(*ranges))


class Refinement:
    """Index tables relating a coarse lattice at n to the fine lattice at n+k."""

    def __init__(self, coarse: TorusLattice, k: RefinementStep) -> None:
        """Initialize refinement.

        Args:
            coarse: Coarse lattice at scale n
            k: Refinement step
        """
        self.coarse = coarse
        self.k = k
        self.fine = TorusLattice(coarse.spec.refined(k))
        self.block = coarse.b**k.k0

    def __repr__(self) -> str:
        return f"Refinement({self.coarse!r}, k=({self.k.k0},{self.k.k1}))"

    @cached_property
    def distinguished_indices(self) -> np.ndarray:
        """Fine linear index of the distinguished subcube, per coarse cube."""
        coords = np.indices(self.coarse.shape).reshape(self.coarse.d, -1)
        fine_coords = coords * self.block + (self.block - 1) // 2
        return np.ravel_multi_index(tuple(fine_coords), self.fine.shape)

    @cached_property
    def cover_indices(self) -> np.ndarray:
        """Array (τ_coarse, b^(dk⁰)) of fine linear indices inside each coarse cube."""
        coords = np.indices(self.coarse.shape).reshape(self.coarse.d, -1, 1)
        offsets = np.indices((self.block,) * self.coarse.d).reshape(self.coarse.d, 1, -1)
        fine_coords = coords * self.block + offsets
        return np.ravel_multi_index(tuple(fine_coords), self.fine.shape)

    @cached_property
    def integrated_mask(self) -> np.ndarray:
        """Boolean mask over fine cubes: True for every non-distinguished cube."""
        mask = np.ones(self.fine.tau, dtype=bool)
        mask[self.distinguished_indices] = False
        return mask

    @cached_property
    def exterior_indices(self) -> np.ndarray:
        """Fine cubes outside the embedded coarse region (empty when k¹=0)."""
        inside = np.zeros(self.fine.tau, dtype=bool)
        inside[self.cover_indices.ravel()] = True
        return np.flatnonzero(~inside)

    def distinguished(self, cube: Sequence[int]) -> CubeIndex:
        return distinguished_subcube(self.coarse.spec, cube, self.k)

    def cover(self, cube: Sequence[int]) -> FrozenSet[CubeIndex]:
        return refine_cover(self.coarse.spec, cube, self.k)
