"""
Exact linear algebra over prime fields and Q.

Vectors are sparse ``{index: coefficient}`` dicts. Ranks are computed
incrementally against a table of pivots keyed by leading index:

- F_2 packs each vector into a Python int and eliminates with XOR;
- F_p keeps sparse dict rows, or switches to a dense numpy echelon form
  when the ambient dimension is small;
- Q uses fraction-free integer elimination with content removal.

The dense helpers (``rref_mod``, ``nullspace_mod``, ``solve_mod``) back the
homology-level computations in ``app.equivariant``.
"""
import logging
from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime

from .errors import FieldError, InconsistencyError

logger = logging.getLogger(__name__)

Vector = Dict[int, int]

MAX_CHARACTERISTIC = 2 ** 31


@dataclass(frozen=True)
class Field:
    """A prime field F_p, or Q when ``characteristic`` is 0"""
    characteristic: int

    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @property
    def name(self) -> str:
        return "Q" if self.is_rational else f"F{self.characteristic}"

    def reduce(self, value: int) -> int:
        if self.is_rational:
            return value
        return value % self.characteristic


def parse_field(name) -> Field:
    """
    Parse a field designation

    Parameters:
        name: a prime (int or decimal string), or "Q"/"0" for the rationals
    """
    text = str(name).strip().upper()
    if text in ("Q", "0"):
        return Field(0)
    try:
        p = int(text.lstrip("F"))
    except ValueError:
        raise FieldError(f"Unsupported field {name!r}")
    if p >= MAX_CHARACTERISTIC or not isprime(p):
        raise FieldError(f"Unsupported field characteristic {p}: need a prime below 2^31 or Q")
    return Field(p)


def rank(
    vectors: Iterable[Vector],
    field: Field,
    n_cols: Optional[int] = None,
    dense_threshold: int = 512,
) -> int:
    """
    Rank of a family of sparse vectors

    Parameters:
        vectors: the family, as ``{index: coefficient}`` dicts
        field: coefficient field
        n_cols: ambient dimension, used to choose the dense path
        dense_threshold: ambient dimensions below this are reduced densely
    """
    vectors = [v for v in vectors if v]
    if not vectors:
        return 0
    p = field.characteristic
    if p == 2:
        return _rank_gf2(vectors)
    if p == 0:
        return _rank_rational(vectors)
    if n_cols is None:
        n_cols = 1 + max(max(v) for v in vectors)
    if n_cols < dense_threshold:
        dense = np.zeros((len(vectors), n_cols), dtype=np.int64)
        for r, v in enumerate(vectors):
            for i, c in v.items():
                dense[r, i] = c % p
        return len(rref_mod(dense, p)[1])
    return _rank_sparse_mod(vectors, p)


def _rank_gf2(vectors: List[Vector]) -> int:
    pivots: Dict[int, int] = {}
    for v in vectors:
        x = 0
        for i, c in v.items():
            if c & 1:
                x |= 1 << i
        while x:
            lead = x.bit_length() - 1
            pivot = pivots.get(lead)
            if pivot is None:
                pivots[lead] = x
                break
            x ^= pivot
    return len(pivots)


def _fill_order(vectors: List[Vector]) -> Dict[int, int]:
    """Relabel indices so the sparsest ones lead"""
    counts: Dict[int, int] = {}
    for v in vectors:
        for i in v:
            counts[i] = counts.get(i, 0) + 1
    ordered = sorted(counts, key=lambda i: (-counts[i], i))
    return {i: pos for pos, i in enumerate(ordered)}


def _rank_sparse_mod(vectors: List[Vector], p: int) -> int:
    relabel = _fill_order(vectors)
    pivots: Dict[int, Vector] = {}
    for v in vectors:
        row = {relabel[i]: c % p for i, c in v.items() if c % p}
        while row:
            lead = max(row)
            pivot = pivots.get(lead)
            if pivot is None:
                inv = pow(row[lead], -1, p)
                pivots[lead] = {i: c * inv % p for i, c in row.items()}
                break
            f = row[lead]
            for i, c in pivot.items():
                value = (row.get(i, 0) - f * c) % p
                if value:
                    row[i] = value
                else:
                    row.pop(i, None)
    return len(pivots)


def _rank_rational(vectors: List[Vector]) -> int:
    pivots: Dict[int, Vector] = {}
    for v in vectors:
        row = {i: c for i, c in v.items() if c}
        while row:
            lead = max(row)
            pivot = pivots.get(lead)
            if pivot is None:
                content = reduce(gcd, row.values())
                pivots[lead] = {i: c // content for i, c in row.items()}
                break
            a, b = pivot[lead], row[lead]
            merged = {i: a * c for i, c in row.items()}
            for i, c in pivot.items():
                merged[i] = merged.get(i, 0) - b * c
            row = {i: c for i, c in merged.items() if c}
            if row:
                content = reduce(gcd, row.values())
                row = {i: c // content for i, c in row.items()}
    return len(pivots)


def rref_mod(matrix: np.ndarray, p: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of a dense matrix over F_p, with its pivot columns"""
    R = np.array(matrix, dtype=np.int64) % p
    m, n = R.shape
    pivot_cols: List[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nonzero = np.nonzero(R[row:, col])[0]
        if nonzero.size == 0:
            continue
        found = row + int(nonzero[0])
        if found != row:
            R[[row, found]] = R[[found, row]]
        inv = pow(int(R[row, col]), -1, p)
        R[row] = R[row] * inv % p
        factors = R[:, col].copy()
        factors[row] = 0
        mask = factors != 0
        if mask.any():
            R[mask] = (R[mask] - np.outer(factors[mask], R[row])) % p
        pivot_cols.append(col)
        row += 1
    return R, pivot_cols


def nullspace_mod(matrix: np.ndarray, p: int, n_cols: Optional[int] = None) -> np.ndarray:
    """Basis of the right kernel of ``matrix`` over F_p, one vector per row"""
    M = np.asarray(matrix, dtype=np.int64)
    if M.size == 0:
        n = n_cols if n_cols is not None else (M.shape[1] if M.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    R, pivots = rref_mod(M, p)
    n = M.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = (-R[r, f]) % p
    return basis


def solve_mod(basis: np.ndarray, targets: np.ndarray, p: int) -> np.ndarray:
    """
    Coefficients X with ``basis @ X == targets`` over F_p

    Parameters:
        basis: n x k matrix with linearly independent columns
        targets: n x t matrix whose columns lie in the column span
    """
    n, k = basis.shape
    augmented = np.concatenate([basis % p, targets % p], axis=1)
    R, pivots = rref_mod(augmented, p)
    if pivots[:k] != list(range(k)) or any(pc >= k for pc in pivots):
        raise InconsistencyError("Target vectors are not in the span of the basis")
    return R[:k, k:] % p


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    if p < 2 ** 20 and A.shape[1] < 2 ** 20:
        return (A.astype(np.int64) @ B.astype(np.int64)) % p
    return (A.astype(object) @ B.astype(object)) % p


def poly_of_matrix_mod(coeffs: Sequence[int], A: np.ndarray, p: int) -> np.ndarray:
    """Evaluate the polynomial with ``coeffs`` (highest degree first) at A, by Horner"""
    n = A.shape[0]
    identity = np.eye(n, dtype=np.int64)
    result = np.zeros((n, n), dtype=np.int64)
    for c in coeffs:
        result = (matmul_mod(result, A, p) + (int(c) % p) * identity) % p
    return result
