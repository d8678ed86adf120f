import pytest

from app.core.errors import FieldError, InconsistencyError, ParameterError, SymmetryError
from app.core.linalg import Field
from app.equivariant import (
    CorrectionCochain,
    GeneratorAction,
    borel_ekh,
    chain_action,
    correction_cochain,
    eigen_decompose,
    has_maximal_order,
    identity_action,
    localized_ranks,
    verify_fixed_generators,
    verify_smith,
)
from app.homology import annular_complex, homology, khovanov_complex, standard_sign_assignment
from app.resolution import MINUS, PLUS, labeled, resolve
from conftest import random_periodic_diagrams


def test_correction_cochain_for_a_swap():
    c = correction_cochain(2, standard_sign_assignment(2), (1, 0))
    assert dict(c.values) == {(0, 0): 0, (1, 0): 0, (0, 1): 0, (1, 1): 1}


def test_correction_cochain_is_zero_for_the_identity():
    c = correction_cochain(3, standard_sign_assignment(3), (0, 1, 2))
    assert set(c.values.values()) == {0}


@pytest.mark.parametrize("r, p, n, expected", [
    (3, 2, 1, True),
    (2, 3, 1, True),
    (2, 7, 1, False),
    (3, 2, 2, True),
    (5, 2, 3, False),
    (2, 5, 2, True),
])
def test_has_maximal_order(r, p, n, expected):
    assert has_maximal_order(r, p, n) is expected


def test_generator_action_swaps_circles_at_11(hopf2):
    act = GeneratorAction(hopf2, hopf2.symmetry)
    bottom = labeled(resolve(hopf2, (0, 0)), (PLUS, MINUS))
    assert act(bottom) == ((0, 0), (PLUS, MINUS))
    top = labeled(resolve(hopf2, (1, 1)), (PLUS, MINUS))
    assert act(top) == ((1, 1), (MINUS, PLUS))


def test_chain_action_signs(hopf2):
    cx = khovanov_complex(hopf2, Field(3))
    action = chain_action(cx, hopf2)
    block = cx.blocks[(4,)]
    for j, x in enumerate(block.basis[2]):
        target, sign = action.blocks[(4,)][2][j]
        assert block.basis[2][target].labels == tuple(reversed(x.labels))
        assert sign == -1


def test_wrong_cochain_is_rejected_over_f3(hopf2):
    cx = khovanov_complex(hopf2, Field(3))
    zero = CorrectionCochain(2, {(0, 0): 0, (1, 0): 0, (0, 1): 0, (1, 1): 0})
    with pytest.raises(InconsistencyError):
        chain_action(cx, hopf2, c=zero)


def test_eigen_split_of_hopf2(hopf2):
    cx = khovanov_complex(hopf2, Field(3))
    split = eigen_decompose(cx, chain_action(cx, hopf2), 2, 1, 3)
    assert dict(split.dims[0].terms) == {(0, 0): 1, (0, 2): 1, (2, 4): 1}
    assert dict(split.dims[1].terms) == {(2, 6): 1}
    assert split.total_dim == 4
    assert dict(split.delta[1].terms) == {(2, 6): 1}


def test_eigen_split_of_trefoil(trefoil):
    cx = khovanov_complex(trefoil, Field(2))
    split = eigen_decompose(cx, chain_action(cx, trefoil), 3, 1, 2)
    assert split.total_dim == 6
    assert all(dim % 2 == 0 for _, dim in split.dims[1].items())


def test_eigen_parameter_checks(hopf2, trefoil):
    cx = khovanov_complex(hopf2, Field(3))
    action = chain_action(cx, hopf2)
    cx2 = khovanov_complex(hopf2, Field(2))
    with pytest.raises(FieldError):
        eigen_decompose(cx2, chain_action(cx2, hopf2), 2, 1, 2)
    with pytest.raises(ParameterError):
        eigen_decompose(cx, action, 3, 1, 3)
    cx7 = khovanov_complex(trefoil, Field(7))
    with pytest.raises(FieldError, match="maximal"):
        eigen_decompose(cx7, chain_action(cx7, trefoil), 3, 1, 7)


def test_borel_of_hopf2(hopf2):
    F = Field(2)
    cx = khovanov_complex(hopf2, F)
    result = borel_ekh(cx, chain_action(cx, hopf2), 2, max_degree=12)
    assert result.stabilized
    assert result.stable_rank == 4
    assert {key: result.stable(key) for key in result.dims} == {(0,): 1, (2,): 1, (4,): 1, (6,): 1}


def test_borel_annular_blocks_match_localization(hopf2, hopf_quotient):
    F = Field(2)
    cx = annular_complex(hopf2, F)
    result = borel_ekh(cx, chain_action(cx, hopf2), 2, max_degree=12)
    expected = localized_ranks(homology(annular_complex(hopf_quotient, F)), 2, annular=True)
    assert expected == {(4, 2): 1, (6, 0): 1, (2, 0): 1, (0, -2): 1}
    assert {key: result.stable(key) for key in result.dims} == {
        (4, 2): 1, (6, 0): 1, (0, -2): 1, (2, 0): 1, (4, 0): 0,
    }


def test_borel_with_trivial_action_keeps_everything(unknot):
    cx = khovanov_complex(unknot, Field(2))
    result = borel_ekh(cx, identity_action(cx, 2), 2)
    assert result.stable_rank == 2
    assert result.stabilized


def test_borel_parameter_checks(hopf2):
    cx = khovanov_complex(hopf2, Field(2))
    action = chain_action(cx, hopf2)
    with pytest.raises(ParameterError):
        borel_ekh(cx, action, 4)
    with pytest.raises(ParameterError, match="width"):
        borel_ekh(cx, action, 2, max_degree=5)


def test_smith_inequalities_on_corpus(hopf2, trefoil):
    assert verify_smith(hopf2, 2).verdict == "pass"
    assert verify_smith(trefoil, 3).verdict == "pass"


def test_smith_inequalities_on_random_lifts():
    lifts = random_periodic_diagrams(seed=11, count=20, max_crossings=10, reverse=True)
    assert all(lifted.n <= 10 for lifted, _, _ in lifts)
    for lifted, p, _ in lifts:
        report = verify_smith(lifted, p)
        assert report.verdict == "pass", [e for e in report.entries if not e.holds]


def test_fixed_generators_of_hopf2(hopf2):
    report = verify_fixed_generators(hopf2, 2)
    assert report.verdict == "pass"
    assert (report.quotient_count, report.invariant_count) == (6, 6)
    assert (report.fixed_vertices, report.expected_fixed_vertices) == (2, 2)
    assert {(b.q, b.k): b.quotient_count for b in report.blocks} == {
        (3, 2): 1, (1, 0): 3, (-1, -2): 1, (3, 0): 1,
    }


def test_fixed_generators_of_random_lifts():
    for lifted, p, _ in random_periodic_diagrams(seed=3, count=6, max_crossings=9):
        assert verify_fixed_generators(lifted, p).verdict == "pass"


def test_fixed_generators_need_a_symmetry(hopf_quotient):
    with pytest.raises(SymmetryError):
        verify_fixed_generators(hopf_quotient, 2)


def test_fixed_blocks_record_the_lifted_grading(trefoil):
    report = verify_fixed_generators(trefoil, 3)
    assert report.verdict == "pass"
    assert all(b.lift_q == 3 * b.q - 2 * b.k for b in report.blocks)
