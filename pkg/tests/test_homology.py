import pytest
from sympy import symbols, sympify

from app.config.settings import get_settings
from app.core.errors import InconsistencyError
from app.core.linalg import Field
from app.homology import (
    PoincarePolynomial,
    SignAssignment,
    annular_complex,
    build_complex,
    chain_euler_characteristic,
    forget_annular,
    graded_euler_characteristic,
    homological_width,
    homology,
    khovanov_complex,
    standard_sign_assignment,
)
from conftest import load

F2, F3, Q = Field(2), Field(3), Field(0)


def terms(poly):
    return dict(poly.terms)


@pytest.mark.parametrize("F", [F2, F3, Q])
def test_hopf2_khovanov(hopf2, F):
    kh = homology(khovanov_complex(hopf2, F))
    assert terms(kh) == {(0, 0): 1, (0, 2): 1, (2, 4): 1, (2, 6): 1}


def test_hopf2_annular(hopf2):
    akh = homology(annular_complex(hopf2, F2))
    assert terms(akh) == {
        (0, 4, 2): 1,
        (1, 4, 0): 1,
        (2, 4, 0): 1,
        (0, 2, 0): 1,
        (0, 0, -2): 1,
        (2, 6, 0): 1,
    }


def test_hopf_quotient_annular(hopf_quotient):
    akh = homology(annular_complex(hopf_quotient, F2))
    assert terms(akh) == {(0, 3, 2): 1, (1, 3, 0): 1, (0, 1, 0): 1, (0, -1, -2): 1}


def test_trefoil_over_f2(trefoil):
    kh = homology(khovanov_complex(trefoil, F2))
    assert terms(kh) == {(0, 1): 1, (0, 3): 1, (2, 5): 1, (2, 7): 1, (3, 7): 1, (3, 9): 1}
    assert homological_width(kh) == 2


def test_trefoil_over_q(trefoil):
    kh = homology(khovanov_complex(trefoil, Q))
    assert terms(kh) == {(0, 1): 1, (0, 3): 1, (2, 5): 1, (3, 9): 1}
    assert homological_width(kh) == 2


def test_torus_2_5_over_q():
    kh = homology(khovanov_complex(load("torus-2-5"), Q))
    assert terms(kh) == {(0, 3): 1, (0, 5): 1, (2, 7): 1, (3, 11): 1, (4, 11): 1, (5, 15): 1}


def test_unknot(unknot):
    assert terms(homology(khovanov_complex(unknot, F3))) == {(0, 1): 1, (0, -1): 1}
    assert terms(homology(annular_complex(unknot, F3))) == {(0, 1, 0): 1, (0, -1, 0): 1}


def test_nontrivial_loop_is_graded_by_k():
    akh = homology(annular_complex(load("nontrivial-loop"), F2))
    assert terms(akh) == {(0, 1, 1): 1, (0, -1, -1): 1}


def test_sparse_and_dense_paths_agree(hopf2, monkeypatch):
    dense = homology(annular_complex(hopf2, F3))
    monkeypatch.setenv("PERKH_DENSE_COLUMN_THRESHOLD", "0")
    get_settings.cache_clear()
    sparse = homology(annular_complex(hopf2, F3))
    assert terms(dense) == terms(sparse)
    assert dense.dim(1, 4, 0) == 1


def test_threads_do_not_change_the_result(trefoil):
    cx = khovanov_complex(trefoil, F2)
    assert terms(homology(cx, threads=1)) == terms(homology(cx, threads=4))


def test_euler_characteristic(hopf2, trefoil):
    assert chain_euler_characteristic(khovanov_complex(hopf2, F2)) == {0: 1, 2: 1, 4: 1, 6: 1}
    cx = khovanov_complex(trefoil, Q)
    assert chain_euler_characteristic(cx) == graded_euler_characteristic(homology(cx))


def test_forget_annular_keeps_euler_characteristic(hopf2):
    akh = homology(annular_complex(hopf2, F2))
    flat = forget_annular(akh)
    assert not flat.annular
    assert flat.total_dim == 6
    assert graded_euler_characteristic(flat) == {0: 1, 2: 1, 4: 1, 6: 1}


def test_annular_blocks_only_keep_k_preserving_maps(hopf2):
    cx = annular_complex(hopf2, F2)
    assert set(cx.block_keys()) == {(4, 2), (2, 0), (0, -2), (4, 0), (6, 0)}
    assert cx.total_rank == 12


def test_render_and_blocks(hopf2):
    kh = homology(khovanov_complex(hopf2, F2))
    t, q = symbols("t q")
    assert sympify(kh.render()) == 1 + q ** 2 + t ** 2 * q ** 4 + t ** 2 * q ** 6
    assert kh.blocks()[0] == {"i": 0, "q": 0, "dim": 1}


def test_standard_signs_form_a_cocycle():
    for n in range(4):
        assert standard_sign_assignment(n).is_cocycle()
    broken = SignAssignment(2, {((0, 0), 0): 1})
    assert not broken.is_cocycle()


def test_bad_signs_break_d_squared(hopf2):
    broken = SignAssignment(2, {((0, 0), 0): 1})
    with pytest.raises(InconsistencyError):
        build_complex(hopf2, F3, sign=broken)


def test_width_of_empty_polynomial():
    assert homological_width(PoincarePolynomial({})) == 0
