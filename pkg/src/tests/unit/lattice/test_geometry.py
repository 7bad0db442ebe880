import itertools
import math

import numpy as np
import pytest

from src.lattice.exceptions import IndexRangeError, LatticeSizeError, LatticeSpecError
from src.lattice.geometry import TorusLattice
from src.lattice.types import FaceIndex, LatticeSpec, RefinementStep, ScalePair


def make(b=3, d=1, n0=0, n1=1):
    return TorusLattice(LatticeSpec(b, d, ScalePair(n0, n1)))


@pytest.mark.parametrize(
    "d,n0,n1,cubes,faces",
    [(1, 0, 1, 3, 3), (2, 0, 1, 9, 18), (2, 1, 1, 81, 162)],
)
def test_enumerate_counts(d, n0, n1, cubes, faces):
    lattice = make(d=d, n0=n0, n1=n1)
    all_cubes, all_faces = lattice.enumerate_cubes_and_faces()
    assert len(all_cubes) == cubes == lattice.tau
    assert len(all_faces) == faces == lattice.face_count
    assert all_cubes == sorted(all_cubes)


def test_spec_validation():
    with pytest.raises(LatticeSpecError):
        LatticeSpec(4, 1, ScalePair(0, 1))
    with pytest.raises(LatticeSpecError):
        LatticeSpec(3, 0, ScalePair(0, 1))
    with pytest.raises(LatticeSpecError):
        LatticeSpec(3, 1, ScalePair(0, 0))
    with pytest.raises(LatticeSpecError):
        RefinementStep(-1, 0)


def test_size_overflow():
    with pytest.raises(LatticeSizeError):
        make(d=8, n0=0, n1=6)


def test_face_incidence_wraparound():
    lattice = make()
    assert lattice.face_incidence(FaceIndex((0,), 1)) == ((0,), (1,))
    assert lattice.face_incidence(FaceIndex((2,), 1)) == ((2,), (0,))


def test_boundary_faces_2d():
    lattice = make(d=2)
    expected = {
        FaceIndex((0, 0), 1),
        FaceIndex((2, 0), 1),
        FaceIndex((0, 0), 2),
        FaceIndex((0, 2), 2),
    }
    assert lattice.boundary_faces((0, 0)) == expected


def test_every_cube_in_2d_faces():
    lattice = make(d=2)
    counts = np.bincount(lattice.face_endpoints.ravel(), minlength=lattice.tau)
    assert np.all(counts == 2 * lattice.d)
    assert np.all(lattice.face_endpoints[:, 0] != lattice.face_endpoints[:, 1])


def test_face_endpoints_match_incidence():
    lattice = make(d=2)
    for face in lattice.faces():
        tail, head = lattice.face_incidence(face)
        row = lattice.face_endpoints[lattice.face_position(face)]
        assert row[0] == lattice.index_of(tail)
        assert row[1] == lattice.index_of(head)


def test_boundary_table_matches_boundary_faces():
    lattice = make(d=2)
    for cube in lattice.cubes():
        positions = {lattice.face_position(f) for f in lattice.boundary_faces(cube)}
        assert positions == set(lattice.boundary_table[lattice.index_of(cube)].tolist())


def test_out_of_range():
    lattice = make()
    with pytest.raises(IndexRangeError):
        lattice.check_cube((3,))
    with pytest.raises(IndexRangeError):
        lattice.face_incidence(FaceIndex((0,), 2))


def test_translate_group_action():
    lattice = make(d=2)
    assert lattice.translate_cube((1, 2), (0, 0)) == (1, 2)
    assert make().translate_cube((2,), (1,)) == (0,)
    for c in lattice.cubes():
        orbit = {lattice.translate_cube(c, g) for g in lattice.translations()}
        assert len(orbit) == lattice.tau
    g1, g2 = (1, 2), (2, 2)
    composed = lattice.translate_cube(lattice.translate_cube((0, 1), g1), g2)
    assert composed == lattice.translate_cube((0, 1), (3, 4))


def test_translation_permutation():
    lattice = make(d=2)
    u = np.arange(lattice.tau, dtype=float)
    perm = lattice.translation_permutation((1, 0))
    shifted = u[perm]
    for c in lattice.cubes():
        target = lattice.translate_cube(c, (1, 0))
        assert shifted[lattice.index_of(c)] == u[lattice.index_of(target)]


def test_distances():
    assert make().cube_distance((0,), (0,)) == 0.0
    assert make().cube_distance((0,), (2,)) == pytest.approx(1.0)
    lattice = make(d=2, n0=1, n1=0)
    assert lattice.cube_distance((0, 0), (1, 1)) == pytest.approx(math.sqrt(2) / 3)


@pytest.mark.parametrize("d", [1, 2])
def test_distance_metric_axioms(d):
    lattice = make(d=d)
    cubes = lattice.cubes()
    for x, y in itertools.product(cubes, repeat=2):
        assert lattice.cube_distance(x, y) == pytest.approx(lattice.cube_distance(y, x))
        assert (lattice.cube_distance(x, y) == 0) == (x == y)
        g = (1,) * d
        shifted = lattice.cube_distance(lattice.translate_cube(x, g), lattice.translate_cube(y, g))
        assert shifted == pytest.approx(lattice.cube_distance(x, y))
        for z in cubes:
            assert lattice.cube_distance(x, z) <= (
                lattice.cube_distance(x, y) + lattice.cube_distance(y, z) + 1e-12
            )


def test_scale_order():
    assert ScalePair(0, 1).precedes(ScalePair(1, 1))
    assert not ScalePair(1, 0).precedes(ScalePair(0, 1))
    assert ScalePair(0, 1).refine(RefinementStep(2, 1)) == ScalePair(2, 2)
