import numpy as np
import pytest

from app.core.errors import FieldError, InconsistencyError
from app.core.linalg import (
    Field,
    matmul_mod,
    nullspace_mod,
    parse_field,
    poly_of_matrix_mod,
    rank,
    rref_mod,
    solve_mod,
)

TRIANGLE = [{0: 1, 1: 1}, {1: 1, 2: 1}, {0: 1, 2: 1}]


@pytest.mark.parametrize("text, name", [("2", "F2"), (3, "F3"), ("F5", "F5"), ("Q", "Q"), ("0", "Q")])
def test_parse_field(text, name):
    assert parse_field(text).name == name


@pytest.mark.parametrize("text", ["4", "x", "1", str(2 ** 31 + 11)])
def test_parse_field_rejects(text):
    with pytest.raises(FieldError):
        parse_field(text)


def test_rank_depends_on_the_field():
    assert rank(TRIANGLE, Field(2)) == 2
    assert rank(TRIANGLE, Field(3)) == 3
    assert rank(TRIANGLE, Field(0)) == 3


def test_sparse_mod_p_path():
    assert rank(TRIANGLE, Field(3), dense_threshold=0) == 3
    assert rank([{0: 1, 1: 2}, {0: 2, 1: 1}], Field(3), dense_threshold=0) == 1


def test_rank_ignores_zero_vectors():
    assert rank([{}, {}], Field(5)) == 0
    assert rank([{0: 6}], Field(0)) == 1


def test_rational_rank_with_large_entries():
    vectors = [{0: 10 ** 12, 1: 3}, {0: 2 * 10 ** 12, 1: 6}, {1: 7}]
    assert rank(vectors, Field(0)) == 2


def test_rref_and_nullspace():
    M = np.array([[1, 1, 0], [0, 1, 1]])
    R, pivots = rref_mod(M, 3)
    assert pivots == [0, 1]
    assert R.tolist() == [[1, 0, 2], [0, 1, 1]]
    kernel = nullspace_mod(M, 3)
    assert kernel.tolist() == [[1, 2, 1]]
    assert not (matmul_mod(M, kernel.T, 3)).any()


def test_nullspace_of_empty_matrix():
    assert nullspace_mod(np.zeros((0, 3), dtype=np.int64), 5).shape == (3, 3)


def test_solve_mod():
    basis = np.array([[1, 0], [1, 1], [0, 1]])
    targets = np.array([[2], [0], [1]])
    assert solve_mod(basis, targets, 3).tolist() == [[2], [1]]
    with pytest.raises(InconsistencyError):
        solve_mod(basis, np.array([[0], [0], [1]]), 3)


def test_poly_of_matrix():
    swap = np.array([[0, 1], [1, 0]])
    assert not poly_of_matrix_mod([1, 0, -1], swap, 3).any()
    assert poly_of_matrix_mod([1, -1], swap, 3).tolist() == [[2, 1], [1, 2]]
