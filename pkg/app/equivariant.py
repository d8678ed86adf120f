"""
Cyclic group actions on Khovanov complexes of periodic diagrams.

The symmetry acts on generators by moving crossings and circles, corrected by a
sign (-1)^{c(v)} where c solves nu(sigma u, sigma v) + nu(u, v) = c(u) + c(v)
on every cube edge. On top of the chain action this module computes:

- the cyclotomic eigen-splitting of Kh over F_r for p^n-periodic links (r != p);
- Borel cohomology over F_p for p-periodic links, from the double complex
  Hom(P, C) with P the 2-periodic resolution of F_p over F_p[Z_p];
- Smith-type rank inequalities and the fixed-generator correspondence with the quotient.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sympy import Poly, cyclotomic_poly, isprime, symbols, totient
from sympy.ntheory import n_order

from .core.errors import FieldError, InconsistencyError, ParameterError, SymmetryError
from .core.linalg import Field, Vector, matmul_mod, nullspace_mod, poly_of_matrix_mod, rank, rref_mod, solve_mod
from .diagram import AnnularDiagram, PeriodicSymmetry, Vertex, quotient_diagram
from .homology import (
    BlockKey,
    GradedComplex,
    PoincarePolynomial,
    SignAssignment,
    annular_complex,
    forget_annular,
    homological_width,
    homology,
    khovanov_complex,
    standard_sign_assignment,
)
from .models import FixedBlock, FixedGeneratorsReport, SmithEntry, SmithReport
from .resolution import LabeledGenerator, ResolutionConfig, flip, generators, lift_generator, resolve

logger = logging.getLogger(__name__)


def multiplicative_order(r: int, modulus: int) -> int:
    return int(n_order(r, modulus))


def has_maximal_order(r: int, p: int, n: int) -> bool:
    """Whether r generates (Z/p^n)^*, i.e. r^{(p-1)p^{n-1}} is the first power equal to 1"""
    modulus = p ** n
    if modulus == 2:
        return r % 2 == 1
    return r % p != 0 and multiplicative_order(r, modulus) == int(totient(modulus))


def _act_on_cube(sigma: Sequence[int], v: Vertex) -> Vertex:
    w = [0] * len(v)
    for i, bit in enumerate(v):
        w[sigma[i]] = bit
    return tuple(w)


@dataclass(frozen=True)
class CorrectionCochain:
    n: int
    values: Mapping[Vertex, int] = field(hash=False)

    def __call__(self, u: Vertex) -> int:
        return self.values[u]


def correction_cochain(n: int, nu: SignAssignment, sigma: Sequence[int]) -> CorrectionCochain:
    """
    Solve nu(sigma u, sigma v) + nu(u, v) = c(u) + c(v) over F_2 with c(0...0) = 0

    Parameters:
        n: cube dimension
        nu: sign assignment
        sigma: coordinate permutation, i -> sigma[i]
    """
    if sorted(sigma) != list(range(n)):
        raise SymmetryError("sigma is not a permutation of the cube coordinates")

    def defect(u: Vertex, pos: int) -> int:
        return (nu(_act_on_cube(sigma, u), sigma[pos]) + nu(u, pos)) % 2

    zero = tuple([0] * n)
    values: Dict[Vertex, int] = {zero: 0}
    queue = deque([zero])
    while queue:
        u = queue.popleft()
        for pos in range(n):
            w = flip(u, [pos])
            if w in values:
                continue
            lower = u if u[pos] == 0 else w
            values[w] = (values[u] + defect(lower, pos)) % 2
            queue.append(w)

    for u, pos in nu.edges():
        w = flip(u, [pos])
        if (values[u] + values[w]) % 2 != defect(u, pos):
            raise InconsistencyError(f"Sign correction is inconsistent on the cube edge {u} -> {w}")
    return CorrectionCochain(n, values)


@dataclass(frozen=True)
class ChainAction:
    """Signed permutation per block and degree: element j -> (target index, sign)"""
    order: int
    blocks: Mapping[BlockKey, Mapping[int, Tuple[Tuple[int, int], ...]]] = field(hash=False)

    def apply(self, key: BlockKey, i: int, v: Vector, F: Field, power: int = 1) -> Vector:
        table = self.blocks[key][i]
        out = dict(v)
        for _ in range(power):
            step: Vector = {}
            for j, c in out.items():
                t, sign = table[j]
                step[t] = F.reduce(step.get(t, 0) + sign * c)
            out = {t: c for t, c in step.items() if c}
        return out


class GeneratorAction:
    """The symmetry acting on labeled generators of a fixed diagram, unsigned"""

    def __init__(self, d: AnnularDiagram, s: PeriodicSymmetry):
        self.d = d
        self.s = s
        self._configs: Dict[Vertex, ResolutionConfig] = {}

    def config(self, v: Vertex) -> ResolutionConfig:
        if v not in self._configs:
            self._configs[v] = resolve(self.d, v)
        return self._configs[v]

    def image_circle(self, target: ResolutionConfig, circle_id: int) -> int:
        if circle_id in self.d.ray_parity:
            return target.circle_of(self.s.edge_perm[circle_id])
        index = self.d.loop_ids.index(circle_id)
        return self.d.loop_ids[self.s.loop_image(index)]

    def __call__(self, x: LabeledGenerator) -> Tuple[Vertex, Tuple[int, ...]]:
        w = self.s.act_on_vertex(x.v)
        target = self.config(w)
        labels = {self.image_circle(target, cid): label for cid, label in zip(x.circles, x.labels)}
        return w, tuple(labels[cid] for cid in target.circle_ids)


def chain_action(
    cx: GradedComplex,
    d: AnnularDiagram,
    s: Optional[PeriodicSymmetry] = None,
    c: Optional[CorrectionCochain] = None,
) -> ChainAction:
    """
    The signed action x -> (-1)^{c(v)} sigma(x) on every block of cx

    Parameters:
        cx: complex built from d (either grading scheme)
        d: the periodic diagram
        s: its symmetry (defaults to d.symmetry)
        c: correction cochain (solved against the standard sign assignment by default)
    """
    s = s or d.symmetry
    if s is None:
        raise SymmetryError("Diagram carries no symmetry")
    if c is None:
        c = correction_cochain(d.n, standard_sign_assignment(d.n), s.crossing_perm)
    act = GeneratorAction(d, s)
    where = {
        x.key: (key, i, j)
        for key, block in cx.blocks.items()
        for i, elems in block.basis.items()
        for j, x in enumerate(elems)
    }
    blocks: Dict[BlockKey, Dict[int, Tuple[Tuple[int, int], ...]]] = {}
    for key, block in cx.blocks.items():
        blocks[key] = {}
        for i, elems in block.basis.items():
            row = []
            for x in elems:
                tkey, ti, tj = where[act(x)]
                if (tkey, ti) != (key, i):
                    raise InconsistencyError(f"Symmetry moves {x} out of its block {key}, degree {i}")
                row.append((tj, -1 if c(x.v) else 1))
            blocks[key][i] = tuple(row)
    action = ChainAction(s.order, blocks)
    verify_chain_action(cx, action)
    return action


def identity_action(cx: GradedComplex, order: int) -> ChainAction:
    return ChainAction(order, {
        key: {i: tuple((j, 1) for j in range(len(elems))) for i, elems in block.basis.items()}
        for key, block in cx.blocks.items()
    })


def verify_chain_action(cx: GradedComplex, action: ChainAction) -> None:
    """Commutation with d and order, as exact identities"""
    F = cx.field
    for key, block in cx.blocks.items():
        for i in block.degrees:
            images = block.images(i)
            following = block.size(i + 1) > 0
            for j in range(block.size(i)):
                t, sign = action.blocks[key][i][j]
                if following:
                    left = action.apply(key, i + 1, images[j], F)
                    right = {u: F.reduce(sign * a) for u, a in images[t].items()}
                    right = {u: a for u, a in right.items() if a}
                    if left != right:
                        raise InconsistencyError(f"Action does not commute with d on block {key}, degree {i}")
                if action.apply(key, i, {j: 1}, F, power=action.order) != {j: 1}:
                    raise InconsistencyError(f"Action does not have order {action.order} on block {key}")


def _dense(images: Sequence[Vector], n_rows: int, n_cols: int, p: int) -> np.ndarray:
    M = np.zeros((n_rows, n_cols), dtype=np.int64)
    for col, v in enumerate(images):
        for row, value in v.items():
            M[row, col] = value % p
    return M


def _induced_action(cx: GradedComplex, action: ChainAction, key: BlockKey, i: int) -> np.ndarray:
    """Matrix of the action on H^i of one block, in a basis of cycle representatives"""
    p = cx.field.characteristic
    block = cx.blocks[key]
    size = block.size(i)
    d_out = _dense(block.images(i), block.size(i + 1), size, p)
    d_in = _dense(block.images(i - 1), size, block.size(i - 1), p)
    cycles = nullspace_mod(d_out, p, n_cols=size).T
    stacked = np.concatenate([d_in, cycles], axis=1)
    _, pivots = rref_mod(stacked, p) if stacked.size else (None, [])
    boundary_cols = [c for c in pivots if c < d_in.shape[1]]
    rep_cols = [c - d_in.shape[1] for c in pivots if c >= d_in.shape[1]]
    reps = cycles[:, rep_cols]
    if not rep_cols:
        return np.zeros((0, 0), dtype=np.int64)
    G = np.zeros((size, size), dtype=np.int64)
    for j, (t, sign) in enumerate(action.blocks[key][i]):
        G[t, j] = sign % p
    moved = matmul_mod(G, reps, p)
    basis = np.concatenate([d_in[:, boundary_cols], reps], axis=1)
    coefficients = solve_mod(basis, moved, p)
    return coefficients[len(boundary_cols):, :]


@dataclass(frozen=True)
class EigenDecomposition:
    p: int
    n: int
    r: int
    dims: Mapping[int, PoincarePolynomial] = field(hash=False)
    delta: Mapping[int, PoincarePolynomial] = field(hash=False)

    @property
    def total_dim(self) -> int:
        return sum(poly.total_dim for poly in self.dims.values())


def eigen_decompose(cx: GradedComplex, action: ChainAction, p: int, n: int, r: int) -> EigenDecomposition:
    """
    Split Kh over F_r into the kernels of Phi_{p^s}(g), s = 0..n, on homology

    Parameters:
        cx: complex over F_r
        action: chain action of order p^n
        p, n: the period is p^n
        r: coefficient characteristic
    """
    if not isprime(p):
        raise ParameterError(f"p={p} is not prime")
    if n < 1:
        raise ParameterError("n must be at least 1")
    if action.order < 2 or action.order != p ** n:
        raise ParameterError(f"Action has order {action.order}, expected {p ** n}")
    if not isprime(r):
        raise FieldError(f"r={r} is not prime")
    if r == p:
        raise FieldError("The eigen-splitting needs r != p; use the Borel computation for r = p")
    if cx.field.characteristic != r:
        raise FieldError(f"Complex is over {cx.field.name}, expected F{r}")
    if not has_maximal_order(r, p, n):
        raise FieldError(f"{r} does not have maximal multiplicative order modulo {p ** n}")

    x = symbols("x")
    cyclotomic = {s: [int(a) for a in Poly(cyclotomic_poly(p ** s, x), x).all_coeffs()] for s in range(n + 1)}
    dims: Dict[int, Dict[Tuple[int, ...], int]] = {s: {} for s in range(n + 1)}
    for key in cx.block_keys():
        for i in cx.blocks[key].degrees:
            A = _induced_action(cx, action, key, i)
            h = A.shape[0]
            if h == 0:
                continue
            found = 0
            for s in range(n + 1):
                value = poly_of_matrix_mod(cyclotomic[s], A, r)
                dim = h - len(rref_mod(value, r)[1])
                found += dim
                if dim:
                    dims[s][(i,) + key] = dim
            if found != h:
                raise InconsistencyError(f"Eigenspaces of block {key}, degree {i} do not span homology")

    delta = {}
    for s in range(n + 1):
        phi = int(totient(p ** s))
        for index, dim in dims[s].items():
            if dim % phi:
                raise InconsistencyError(f"Dimension {dim} at {index} is not divisible by phi({p ** s})={phi}")
        delta[s] = PoincarePolynomial({index: dim // phi for index, dim in dims[s].items()}, cx.annular)
    logger.info({"message": "Eigen decomposition", "p": p, "n": n, "r": r})
    return EigenDecomposition(p, n, r, {s: PoincarePolynomial(t, cx.annular) for s, t in dims.items()}, delta)


@dataclass(frozen=True)
class BorelCohomology:
    p: int
    max_degree: int
    annular: bool
    dims: Mapping[BlockKey, Mapping[int, int]] = field(hash=False)

    def stable(self, key: BlockKey) -> int:
        return self.dims[key].get(self.max_degree, 0)

    @property
    def stable_rank(self) -> int:
        return sum(self.stable(key) for key in self.dims)

    def totals(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for table in self.dims.values():
            for t, dim in table.items():
                out[t] = out.get(t, 0) + dim
        return out

    @property
    def stabilized(self) -> bool:
        """Last two periods agree in every block"""
        J = self.max_degree
        return all(
            table.get(J, 0) == table.get(J - 2, 0) and table.get(J - 1, 0) == table.get(J - 3, 0)
            for table in self.dims.values()
        )


def _borel_block(cx: GradedComplex, action: ChainAction, key: BlockKey, J: int) -> Dict[int, int]:
    F = cx.field
    p = F.characteristic
    block = cx.blocks[key]
    degrees = block.degrees
    low = min(degrees)

    def basis(t: int) -> List[Tuple[int, int, int]]:
        return [(i, t - i, x) for i in degrees if t - i >= 0 for x in range(block.size(i))]

    def boundary(t: int) -> Tuple[List[Vector], int]:
        source, target = basis(t), basis(t + 1)
        index = {cell: pos for pos, cell in enumerate(target)}
        columns = []
        for i, j, x in source:
            column: Vector = {}
            for y, c in block.images(i)[x].items():
                column[index[(i + 1, j, y)]] = c
            if j % 2 == 0:
                moved = action.apply(key, i, {x: 1}, F)
                moved[x] = moved.get(x, 0) - 1
            else:
                moved = {}
                for a in range(p):
                    for y, c in action.apply(key, i, {x: 1}, F, power=a).items():
                        moved[y] = moved.get(y, 0) + c
            sign = -1 if i % 2 else 1
            for y, c in moved.items():
                pos = index[(i, j + 1, y)]
                value = F.reduce(column.get(pos, 0) + sign * c)
                if value:
                    column[pos] = value
                else:
                    column.pop(pos, None)
            columns.append(column)
        return columns, len(target)

    ranks = {}
    for t in range(low - 1, J + 1):
        columns, n_cols = boundary(t)
        ranks[t] = rank(columns, F, n_cols=n_cols)
    return {t: len(basis(t)) - ranks[t] - ranks[t - 1] for t in range(low, J + 1)}


def borel_ekh(
    cx: GradedComplex,
    action: ChainAction,
    p: int,
    max_degree: Optional[int] = None,
) -> BorelCohomology:
    """
    Borel cohomology of every block up to total degree J

    Parameters:
        cx: complex over F_p
        action: chain action of order p
        p: the prime period
        max_degree: J, at least the homological width plus 2p (default: width plus 4p)
    """
    if not isprime(p):
        raise ParameterError(f"Borel cohomology needs a prime period, got {p}")
    if cx.field.characteristic != p:
        raise FieldError(f"Complex is over {cx.field.name}, expected F{p}")
    if action.order != p:
        raise ParameterError(f"Action has order {action.order}, expected {p}")
    width = homological_width(forget_annular(homology(cx)))
    if max_degree is None:
        max_degree = width + 4 * p
    if max_degree < width + 2 * p:
        raise ParameterError(
            f"max degree {max_degree} is below width + 2p = {width + 2 * p}; stability is not observable"
        )
    dims = {key: _borel_block(cx, action, key, max_degree) for key in cx.block_keys()}
    result = BorelCohomology(p, max_degree, cx.annular, dims)
    logger.info({
        "message": "Borel cohomology",
        "p": p,
        "max_degree": max_degree,
        "stable_rank": result.stable_rank,
        "stabilized": result.stabilized,
    })
    return result


def localized_ranks(quotient: PoincarePolynomial, p: int, annular: bool) -> Dict[BlockKey, int]:
    """
    Ranks predicted by localization from the annular homology of the quotient

    Block (q,) of the periodic link collects all (q', k') with p q' - (p-1) k' = q;
    block (q, k) collects the (q', k) with p q' - (p-1) k = q.
    """
    out: Dict[BlockKey, int] = {}
    for (i, q, k), dim in quotient.items():
        lifted = p * q - (p - 1) * k
        key = (lifted, k) if annular else (lifted,)
        out[key] = out.get(key, 0) + dim
    return out


def _periodic_data(d: AnnularDiagram, p: int) -> PeriodicSymmetry:
    if d.symmetry is None:
        raise SymmetryError("Diagram carries no symmetry")
    if not isprime(p):
        raise ParameterError(f"p={p} is not prime")
    if d.symmetry.order != p:
        raise ParameterError(f"Symmetry has order {d.symmetry.order}, expected {p}")
    return d.symmetry


def verify_smith(d: AnnularDiagram, p: int) -> SmithReport:
    """
    Rank inequalities between a p-periodic link and its quotient over F_p

    Three families: annular per (q, k), Khovanov per q against the annular
    homology of the quotient, and the filtration bound sum_k AKh >= Kh on both links.
    """
    _periodic_data(d, p)
    quotient, _ = quotient_diagram(d)
    F = Field(p)
    akh_lift = homology(annular_complex(d, F))
    akh_quot = homology(annular_complex(quotient, F))
    kh_lift = homology(khovanov_complex(d, F))
    kh_quot = homology(khovanov_complex(quotient, F))

    entries: List[SmithEntry] = []
    per_block: Dict[Tuple[int, int], int] = {}
    for (i, q, k), dim in akh_quot.items():
        per_block[(q, k)] = per_block.get((q, k), 0) + dim
    for (q, k), right in sorted(per_block.items()):
        lifted = p * q - (p - 1) * k
        left = sum(dim for (i, q2, k2), dim in akh_lift.items() if (q2, k2) == (lifted, k))
        entries.append(SmithEntry(family="annular", q=q, k=k, left=left, right=right, holds=left >= right))

    for (q,), right in sorted(localized_ranks(akh_quot, p, annular=False).items()):
        left = sum(dim for (i, q2), dim in kh_lift.items() if q2 == q)
        entries.append(SmithEntry(family="khovanov", q=q, left=left, right=right, holds=left >= right))

    for name, akh, kh in (("periodic", akh_lift, kh_lift), ("quotient", akh_quot, kh_quot)):
        collapsed = forget_annular(akh)
        for (i, q) in sorted(set(collapsed.terms) | set(kh.terms)):
            left, right = collapsed.dim(i, q), kh.dim(i, q)
            entries.append(SmithEntry(
                family="filtration", q=q, i=i, link=name, left=left, right=right, holds=left >= right
            ))

    verdict = "pass" if all(e.holds for e in entries) else "fail"
    logger.info({"message": "Smith inequalities", "p": p, "entries": len(entries), "verdict": verdict})
    return SmithReport(p=p, entries=entries, verdict=verdict)


def fixed_vertices(d: AnnularDiagram, s: PeriodicSymmetry) -> List[Vertex]:
    return [v for v in product((0, 1), repeat=d.n) if s.act_on_vertex(v) == v]


def verify_fixed_generators(d: AnnularDiagram, p: int) -> FixedGeneratorsReport:
    """
    Match the symmetric generators of a p-periodic diagram with the generators of its quotient

    Every quotient generator x lifts to a symmetric generator with k unchanged
    and q = p q(x) - (p-1) k(x), and these lifts are all the symmetric generators.
    """
    s = _periodic_data(d, p)
    quotient, maps = quotient_diagram(d)
    act = GeneratorAction(d, s)
    invariant = {x.key: x for x in generators(d) if act(x) == x.key}

    lifted: Dict[tuple, LabeledGenerator] = {}
    blocks: Dict[Tuple[int, int], List[int]] = {}
    for x in generators(quotient):
        y = lift_generator(x, quotient, d, maps)
        if y.key in lifted:
            raise InconsistencyError(f"Two quotient generators lift to {y}")
        if y.key not in invariant:
            raise InconsistencyError(f"Lift {y} of {x} is not symmetric")
        if y.k != x.k or y.q != p * x.q - (p - 1) * x.k:
            raise InconsistencyError(f"Lift {y} of {x} has gradings ({y.q},{y.k}), expected ({p * x.q - (p - 1) * x.k},{x.k})")
        lifted[y.key] = y
        blocks.setdefault((x.q, x.k), [0, 0])[0] += 1
    if set(lifted) != set(invariant):
        missing = sorted(str(invariant[key]) for key in set(invariant) - set(lifted))
        raise InconsistencyError(f"Symmetric generators without a quotient preimage: {missing}")

    for y in invariant.values():
        # every invariant generator is a lift, so its block is the image of a quotient block
        for (q, k), counts in blocks.items():
            if y.k == k and y.q == p * q - (p - 1) * k:
                counts[1] += 1

    orbits = len({min(s.crossing_image(c, a) for a in range(p)) for c in range(d.n)})
    report = FixedGeneratorsReport(
        p=p,
        quotient_count=len(lifted),
        invariant_count=len(invariant),
        fixed_vertices=len(fixed_vertices(d, s)),
        expected_fixed_vertices=2 ** orbits,
        blocks=[
            FixedBlock(q=q, k=k, lift_q=p * q - (p - 1) * k, quotient_count=a, invariant_count=b)
            for (q, k), (a, b) in sorted(blocks.items())
        ],
        verdict="pass",
    )
    if report.fixed_vertices != report.expected_fixed_vertices or any(
        b.quotient_count != b.invariant_count for b in report.blocks
    ):
        report.verdict = "fail"
    return report
