"""Torus cube-complex geometry: cubes, faces, incidence, translations, distances."""

import itertools
import math
from functools import cached_property
from typing import FrozenSet, List, Sequence, Tuple

import numpy as np

from .exceptions import IndexRangeError, LatticeSizeError
from .types import CubeIndex, FaceIndex, LatticeSpec

INT_LIMIT = int(np.iinfo(np.int64).max)


class TorusLattice:
    """Periodic cubic lattice with L = b^(n⁰+n¹) cubes per axis.

    Cubes are ordered lexicographically (row-major), faces by (base cube, axis).
    Configurations are flat arrays whose last axis runs over cubes in this order.
    """

    def __init__(self, spec: LatticeSpec) -> None:
        """Initialize lattice.

        Args:
            spec: Lattice specification

        Raises:
            LatticeSizeError: If τ(n) does not fit into a 64-bit integer
        """
        if spec.tau > INT_LIMIT:
            raise LatticeSizeError(spec.tau, INT_LIMIT, {"spec": repr(spec)})
        self.spec = spec
        self.b = spec.b
        self.d = spec.d
        self.size = spec.size
        self.tau = spec.tau

    def __repr__(self) -> str:
        return f"TorusLattice(b={self.b}, d={self.d}, n=({self.spec.n.n0},{self.spec.n.n1}))"

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.size,) * self.d

    @property
    def face_count(self) -> int:
        return self.d * self.tau

    # Enumeration

    def cubes(self) -> List[CubeIndex]:
        """All cubes in lexicographic order."""
        return [tuple(c) for c in itertools.product(range(self.size), repeat=self.d)]

    def faces(self) -> List[FaceIndex]:
        """All faces ordered by (base cube, axis)."""
        return [
            FaceIndex(cube, axis)
            for cube in self.cubes()
            for axis in range(1, self.d + 1)
        ]

    def enumerate_cubes_and_faces(self) -> Tuple[List[CubeIndex], List[FaceIndex]]:
        """Return τ(n) cubes and d·τ(n) faces in deterministic order."""
        return self.cubes(), self.faces()

    # Indexing

    def check_cube(self, cube: Sequence[int]) -> CubeIndex:
        """Validate a cube index already in canonical range."""
        if len(cube) != self.d or any(not 0 <= c < self.size for c in cube):
            raise IndexRangeError(tuple(cube), self.size)
        return tuple(int(c) for c in cube)

    def canonical(self, cube: Sequence[int]) -> CubeIndex:
        """Reduce an arbitrary integer tuple mod L."""
        if len(cube) != self.d:
            raise IndexRangeError(tuple(cube), self.size, f"Expected {self.d} coordinates")
        return tuple(int(c) % self.size for c in cube)

    def index_of(self, cube: Sequence[int]) -> int:
        """Linear (lexicographic) index of a cube."""
        cube = self.check_cube(cube)
        return int(np.ravel_multi_index(cube, self.shape))

    def cube_at(self, index: int) -> CubeIndex:
        """Cube at a linear index."""
        if not 0 <= index < self.tau:
            raise IndexRangeError((index,), self.tau)
        return tuple(int(c) for c in np.unravel_index(index, self.shape))

    def face_position(self, face: FaceIndex) -> int:
        """Linear index of a face."""
        self._check_face(face)
        return self.index_of(face.base) * self.d + (face.axis - 1)

    def _check_face(self, face: FaceIndex) -> None:
        self.check_cube(face.base)
        if not 1 <= face.axis <= self.d:
            raise IndexRangeError((face.axis,), self.d + 1, f"Axis {face.axis} not in 1..{self.d}")

    # Incidence

    def face_incidence(self, face: FaceIndex) -> Tuple[CubeIndex, CubeIndex]:
        """Cubes (Δ₀, Δ₁) sharing ``face``; Δ₁ = Δ₀ + e_axis mod L."""
        self._check_face(face)
        head = list(face.base)
        head[face.axis - 1] = (head[face.axis - 1] + 1) % self.size
        return face.base, tuple(head)

    def boundary_faces(self, cube: Sequence[int]) -> FrozenSet[FaceIndex]:
        """The 2d faces bounding ``cube``."""
        cube = self.check_cube(cube)
        faces = set()
        for axis in range(1, self.d + 1):
            faces.add(FaceIndex(cube, axis))
            lower = list(cube)
            lower[axis - 1] = (lower[axis - 1] - 1) % self.size
            faces.add(FaceIndex(tuple(lower), axis))
        return frozenset(faces)

    @cached_property
    def face_endpoints(self) -> np.ndarray:
        """Array (d·τ, 2) of linear cube indices (Δ₀, Δ₁) per face."""
        coords = np.indices(self.shape).reshape(self.d, -1)
        tails = np.arange(self.tau)
        rows = []
        for axis in range(self.d):
            shifted = coords.copy()
            shifted[axis] = (shifted[axis] + 1) % self.size
            heads = np.ravel_multi_index(tuple(shifted), self.shape)
            rows.append(np.stack([tails, heads], axis=-1))
        # interleave so that face index = cube*d + axis
        return np.stack(rows, axis=1).reshape(-1, 2)

    @cached_property
    def boundary_table(self) -> np.ndarray:
        """Array (τ, 2d) of face positions bounding each cube (upper faces first)."""
        coords = np.indices(self.shape).reshape(self.d, -1)
        columns = []
        for axis in range(self.d):
            columns.append(np.arange(self.tau) * self.d + axis)
        for axis in range(self.d):
            lower = coords.copy()
            lower[axis] = (lower[axis] - 1) % self.size
            columns.append(np.ravel_multi_index(tuple(lower), self.shape) * self.d + axis)
        return np.stack(columns, axis=-1)

    # Translations

    def translate_cube(self, cube: Sequence[int], g: Sequence[int]) -> CubeIndex:
        """Componentwise (cube + g) mod L."""
        cube = self.check_cube(cube)
        if len(g) != self.d:
            raise IndexRangeError(tuple(g), self.size, f"Translation needs {self.d} components")
        return tuple((c + int(s)) % self.size for c, s in zip(cube, g))

    def translation_permutation(self, g: Sequence[int]) -> np.ndarray:
        """Index array ``perm`` with (u∘g)[i] = u[perm[i]], i.e. (u∘g)(Δ) = u(Δ+g)."""
        coords = np.indices(self.shape).reshape(self.d, -1)
        shifted = (coords + np.asarray(g, dtype=np.int64).reshape(-1, 1)) % self.size
        return np.ravel_multi_index(tuple(shifted), self.shape)

    def translations(self) -> List[CubeIndex]:
        """All group elements of (ℤ_L)^d."""
        return self.cubes()

    # Metric

    def cube_distance(self, first: Sequence[int], second: Sequence[int]) -> float:
        """Physical distance b^(-n⁰)·|Δ₁-Δ₂|, torus-minimised per axis."""
        first = self.check_cube(first)
        second = self.check_cube(second)
        total = 0
        for a, c in zip(first, second):
            delta = abs(a - c)
            total += min(delta, self.size - delta) ** 2
        return self.spec.spacing * math.sqrt(total)
