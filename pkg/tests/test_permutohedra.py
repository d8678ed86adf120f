from fractions import Fraction as Fr
from itertools import permutations

import pytest

from app.core.errors import ParameterError
from app.permutohedra import (
    OrderedPartition,
    act_on_partition,
    act_on_point,
    cube_chain,
    extend,
    face,
    fixed_permutohedron,
    geometric_dimension,
    intersect_hyperplanes,
    ordered_partitions,
    reduce,
    refinements,
    refines,
    tau,
    verify_permutohedra,
    vertices,
)

P = OrderedPartition.of


def test_vertices_and_tau():
    assert len(vertices((1, 2, 3))) == 6
    assert tau((1, 2, 3)) == (0, 1, 3, 6)


@pytest.mark.parametrize("r, count", [(1, 1), (2, 3), (3, 13), (4, 75)])
def test_ordered_partition_counts(r, count):
    assert len(ordered_partitions(r)) == count


def test_face_points():
    assert face((1, 2, 3), P([1, 3], [2])).barycenter() == (Fr(3, 2), Fr(3), Fr(3, 2))
    assert face((1, 2, 3), P([2], [1, 3])).barycenter() == (Fr(5, 2), Fr(1), Fr(5, 2))


def test_face_vertices_and_equations():
    f = face((1, 2, 3), P([1, 3], [2]))
    assert f.dim == 1
    assert list(f.vertices()) == [(1, 3, 2), (2, 3, 1)]
    assert f.equations() == [(frozenset({1, 3}), 3), (frozenset({1, 2, 3}), 6)]


def test_refinement_order():
    coarse = P([1, 2, 3])
    fine = P([2], [1, 3])
    assert refines(fine, coarse)
    assert not refines(coarse, fine)
    assert refines(P([2], [1], [3]), fine)
    assert not refines(P([1], [2], [3]), fine)
    assert face((1, 2, 3), coarse).contains(face((1, 2, 3), fine))
    assert len(refinements(P([1, 2], [3]))) == 3


def test_reduce_and_extend():
    p = P([1, 3, 5], [2, 6], [4, 7])
    reduced = reduce(p, 5)
    assert reduced == P([1, 3], [2, 5], [4, 6])
    assert extend(reduced, 3, 5) == p
    assert extend(reduced, 1, 5) == p


def test_reduce_rejects_singletons():
    with pytest.raises(ParameterError):
        reduce(P([1], [2]), 2)


def test_intersection_with_one_hyperplane():
    inter = intersect_hyperplanes((1, 2, 3), [[1, 3]])
    assert inter.reduced_S == (1, 2)
    assert inter.image(P([1, 3], [2])) == P([1], [2])
    assert inter.image(P([1], [2, 3])) is None
    assert inter.point(P([1, 3], [2])) == (Fr(3, 2), Fr(3), Fr(3, 2))
    assert inter.point(P([1], [2, 3])) is None
    assert len(inter.surviving()) == 3


def test_geometric_dimension():
    S = (1, 2, 3)
    assert geometric_dimension(face(S, P([1, 2, 3])), [[1, 3]]) == 1
    assert geometric_dimension(face(S, P([1, 3], [2])), [[1, 3]]) == 0
    assert geometric_dimension(face(S, P([1], [2, 3])), [[1, 3]]) is None


def test_action_on_faces():
    sigma = {1: 2, 2: 1, 3: 3}
    p = P([1], [2, 3])
    image = act_on_partition(sigma, p)
    assert image == P([2], [1, 3])
    assert act_on_point(sigma, face((1, 2, 3), p).barycenter()) == face((1, 2, 3), image).barycenter()


def test_fixed_permutohedron():
    fixed = fixed_permutohedron(4, [[1, 2], [3, 4]])
    points = fixed.vertices()
    assert set(points.values()) == {
        (Fr(3, 2), Fr(3, 2), Fr(7, 2), Fr(7, 2)),
        (Fr(7, 2), Fr(7, 2), Fr(3, 2), Fr(3, 2)),
    }
    assert fixed.chains_through((0, 1)) == 4


@pytest.mark.parametrize("make", [
    lambda: P([1], [3]),
    lambda: P([1], []),
    lambda: face((1, 2), P([1], [2], [3])),
    lambda: face((2, 1, 3), P([1, 2, 3])),
    lambda: intersect_hyperplanes((1, 2, 3), [[1, 2], [2, 3]]),
    lambda: intersect_hyperplanes((1, 2, 3), [[1]]),
    lambda: fixed_permutohedron(3, [[1, 2]]),
    lambda: extend(P([1, 2]), 1, 1),
])
def test_invalid_inputs(make):
    with pytest.raises(ParameterError):
        make()


def test_verification_sweep():
    report = verify_permutohedra(5)
    assert report.verdict == "pass", [c for c in report.checks if not c.passed]
    assert [c.name for c in report.checks] == [
        "face-lattice", "reduction-refinement", "hyperplane-oracle", "fixed-points",
    ]


def test_middle_pair_of_four_coordinates():
    inter = intersect_hyperplanes((1, 2, 3, 4), [[2, 3]])
    assert inter.reduced_S == (1, 2, 3)
    points = {
        P([2, 3], [1], [4]): ((Fr(3), Fr(3, 2), Fr(3, 2), Fr(4)), P([2], [1], [3]), (2, 1, 3)),
        P([2, 3], [4], [1]): ((Fr(4), Fr(3, 2), Fr(3, 2), Fr(3)), P([2], [3], [1]), (3, 1, 2)),
        P([4], [2, 3], [1]): ((Fr(4), Fr(5, 2), Fr(5, 2), Fr(1)), P([3], [2], [1]), (3, 2, 1)),
        P([1], [2, 3], [4]): ((Fr(1), Fr(5, 2), Fr(5, 2), Fr(4)), P([1], [2], [3]), (1, 2, 3)),
        P([4], [1], [2, 3]): ((Fr(2), Fr(7, 2), Fr(7, 2), Fr(1)), P([3], [1], [2]), (2, 3, 1)),
        P([1], [4], [2, 3]): ((Fr(1), Fr(7, 2), Fr(7, 2), Fr(2)), P([1], [3], [2]), (1, 3, 2)),
    }
    surviving = inter.surviving()
    assert {p for p in surviving if len(p) == 3} == set(points)
    for p, (point, image, vertex) in points.items():
        assert inter.point(p) == point
        assert inter.image(p) == image
        assert face(inter.reduced_S, image).barycenter() == vertex
    segments = {p for p in surviving if len(p) == 2}
    assert segments == {
        P([1, 2, 3], [4]), P([4], [1, 2, 3]), P([2, 3, 4], [1]),
        P([1], [2, 3, 4]), P([2, 3], [1, 4]), P([1, 4], [2, 3]),
    }
    assert inter.image(P([1, 2, 3], [4])) == P([1, 2], [3])
    assert inter.image(P([1, 2, 3, 4])) == P([1, 2, 3])
    assert len(surviving) == 13
    assert inter.image(P([2], [1, 3, 4])) is None


def test_intersection_with_two_groups():
    inter = intersect_hyperplanes((1, 2, 3, 4), [[1, 2], [3, 4]])
    assert inter.reduced_S == (1, 2)
    assert {p: inter.image(p) for p in inter.surviving()} == {
        P([1, 2, 3, 4]): P([1, 2]),
        P([1, 2], [3, 4]): P([1], [2]),
        P([3, 4], [1, 2]): P([2], [1]),
    }
    assert inter.point(P([3, 4], [1, 2])) == (Fr(7, 2), Fr(7, 2), Fr(3, 2), Fr(3, 2))


@pytest.mark.parametrize("groups", [[[1, 2], [3, 4, 5]], [[1, 3], [2, 5]], [[2, 4], [1, 3, 5]]])
def test_two_group_oracle_in_five_coordinates(groups):
    S = (1, 2, 3, 4, 5)
    inter = intersect_hyperplanes(S, groups)
    for p in ordered_partitions(5):
        image = inter.image(p)
        expected = None if image is None else len(inter.reduced_S) - len(image)
        assert geometric_dimension(face(S, p), groups) == expected, p


def test_fixed_point_chains():
    fixed = fixed_permutohedron(4, [[1, 2], [3, 4]])
    chain = fixed.chain((0, 1))
    assert chain == ((0, 0, 0, 0), (1, 1, 0, 0), (1, 1, 1, 1))
    assert fixed.chain((1, 0))[1] == (0, 0, 1, 1)
    refining = [order for order in permutations(range(1, 5)) if set(chain) <= set(cube_chain(order))]
    assert len(refining) == fixed.chains_through((0, 1)) == 4
    assert cube_chain((2, 1)) == ((0, 0), (0, 1), (1, 1))
    with pytest.raises(ParameterError):
        fixed.chain((0, 0))
    with pytest.raises(ParameterError):
        cube_chain((1, 3))
