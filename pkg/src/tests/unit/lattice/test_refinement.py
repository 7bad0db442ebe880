import itertools

import numpy as np
import pytest

from src.lattice.geometry import TorusLattice
from src.lattice.refinement import Refinement, distinguished_subcube, refine_cover
from src.lattice.types import LatticeSpec, RefinementStep, ScalePair


@pytest.fixture
def coarse_1d():
    return LatticeSpec(3, 1, ScalePair(0, 1))


def test_distinguished_known_values(coarse_1d):
    assert distinguished_subcube(coarse_1d, (0,), RefinementStep(1, 0)) == (1,)
    assert distinguished_subcube(coarse_1d, (2,), RefinementStep(1, 0)) == (7,)
    assert distinguished_subcube(coarse_1d, (0,), RefinementStep(2, 0)) == (4,)


def test_distinguished_composition():
    coarse = LatticeSpec(3, 2, ScalePair(0, 1))
    for k1, k2 in itertools.product(range(3), repeat=2):
        if k1 + k2 > 2:
            continue
        first = RefinementStep(k1, 0)
        second = RefinementStep(k2, 0)
        middle = coarse.refined(first)
        for cube in TorusLattice(coarse).cubes():
            via = distinguished_subcube(middle, distinguished_subcube(coarse, cube, first), second)
            assert via == distinguished_subcube(coarse, cube, first.compose(second))


def test_refine_cover(coarse_1d):
    assert refine_cover(coarse_1d, (0,), RefinementStep(1, 0)) == {(0,), (1,), (2,)}
    coarse_2d = LatticeSpec(3, 2, ScalePair(0, 1))
    assert len(refine_cover(coarse_2d, (1, 2), RefinementStep(1, 0))) == 9


def test_covers_partition_fine_lattice():
    coarse = TorusLattice(LatticeSpec(3, 2, ScalePair(0, 1)))
    refinement = Refinement(coarse, RefinementStep(1, 0))
    flat = refinement.cover_indices.ravel()
    assert sorted(flat.tolist()) == list(range(refinement.fine.tau))
    assert refinement.exterior_indices.size == 0


def test_exterior_cubes_for_volume_growth(coarse_1d):
    refinement = Refinement(TorusLattice(coarse_1d), RefinementStep(1, 1))
    assert refinement.fine.tau == 27
    assert refinement.exterior_indices.tolist() == list(range(9, 27))
    assert refinement.distinguished_indices.tolist() == [1, 4, 7]
    assert np.count_nonzero(refinement.integrated_mask) == 24


def test_tables_match_functions():
    coarse = TorusLattice(LatticeSpec(3, 2, ScalePair(0, 1)))
    refinement = Refinement(coarse, RefinementStep(1, 0))
    for cube in coarse.cubes():
        row = coarse.index_of(cube)
        fine = refinement.fine
        distinguished = fine.cube_at(int(refinement.distinguished_indices[row]))
        assert distinguished == refinement.distinguished(cube)
        cover = {fine.cube_at(int(i)) for i in refinement.cover_indices[row]}
        assert cover == refinement.cover(cube)
