"""
Khovanov and annular Khovanov chain complexes, and their homology.

A complex is split into independent blocks: one per quantum grading q, or per
(q, k) in the annular case. Each block stores its basis per homological degree
and, for every basis element, its image under the differential as a sparse
vector over the next degree's basis.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple

from sympy import Integer, symbols

from .config.settings import get_settings
from .core.errors import InconsistencyError
from .core.linalg import Field, Vector, rank
from .diagram import AnnularDiagram, Vertex
from .resolution import flip, generators_at, resolve, tqft_images

logger = logging.getLogger(__name__)

BlockKey = Tuple[int, ...]


@dataclass(frozen=True)
class SignAssignment:
    """Mod 2 cochain on the edges of Cube(n); an edge is (u, pos) with u[pos] == 0"""
    n: int
    overrides: Optional[Mapping[Tuple[Vertex, int], int]] = field(default=None, hash=False)

    def __call__(self, u: Vertex, pos: int) -> int:
        if self.overrides is not None and (u, pos) in self.overrides:
            return self.overrides[(u, pos)] % 2
        return sum(u[:pos]) % 2

    def edges(self) -> Iterable[Tuple[Vertex, int]]:
        for u in product((0, 1), repeat=self.n):
            for pos in range(self.n):
                if u[pos] == 0:
                    yield u, pos

    def squares(self) -> Iterable[Tuple[Vertex, int, int]]:
        for u in product((0, 1), repeat=self.n):
            for i in range(self.n):
                for j in range(i + 1, self.n):
                    if u[i] == 0 and u[j] == 0:
                        yield u, i, j

    def is_cocycle(self) -> bool:
        """Every 2-face sums to 1 mod 2"""
        for u, i, j in self.squares():
            total = self(u, i) + self(flip(u, [i]), j) + self(u, j) + self(flip(u, [j]), i)
            if total % 2 != 1:
                return False
        return True


def standard_sign_assignment(n: int) -> SignAssignment:
    if n < 0:
        raise ValueError("n must be non-negative")
    return SignAssignment(n)


@dataclass(frozen=True)
class ComplexBlock:
    key: BlockKey
    basis: Mapping[int, Tuple[Hashable, ...]] = field(hash=False)
    differential: Mapping[int, Tuple[Vector, ...]] = field(hash=False)

    @property
    def degrees(self) -> List[int]:
        return sorted(self.basis)

    def size(self, i: int) -> int:
        return len(self.basis.get(i, ()))

    def images(self, i: int) -> Tuple[Vector, ...]:
        return self.differential.get(i, tuple({} for _ in range(self.size(i))))

    @cached_property
    def positions(self) -> Dict[Hashable, Tuple[int, int]]:
        """Basis element -> (degree, local index)"""
        return {x: (i, j) for i, elems in self.basis.items() for j, x in enumerate(elems)}


@dataclass(frozen=True)
class GradedComplex:
    field: Field
    annular: bool
    blocks: Mapping[BlockKey, ComplexBlock] = field(hash=False)

    def block_keys(self) -> List[BlockKey]:
        return sorted(self.blocks)

    @property
    def total_rank(self) -> int:
        return sum(b.size(i) for b in self.blocks.values() for i in b.degrees)


def build_complex(
    d: AnnularDiagram,
    F: Field,
    annular: bool = False,
    sign: Optional[SignAssignment] = None,
) -> GradedComplex:
    """
    Cube-of-resolutions complex of d over F

    Parameters:
        d: the diagram
        F: coefficient field
        annular: split by (q, k) and keep only k-preserving components
        sign: sign assignment, standard by default
    """
    sign = sign or standard_sign_assignment(d.n)
    configs = {v: resolve(d, v) for v in product((0, 1), repeat=d.n)}

    basis: Dict[BlockKey, Dict[int, list]] = {}
    where: Dict[tuple, Tuple[BlockKey, int, int]] = {}
    for v, cfg in configs.items():
        for x in generators_at(cfg):
            key = (x.q, x.k) if annular else (x.q,)
            column = basis.setdefault(key, {}).setdefault(x.i, [])
            where[x.key] = (key, x.i, len(column))
            column.append(x)

    images: Dict[BlockKey, Dict[int, List[Vector]]] = {
        key: {i: [{} for _ in elems] for i, elems in degrees.items()} for key, degrees in basis.items()
    }
    for key, degrees in basis.items():
        for i, elems in degrees.items():
            for j, x in enumerate(elems):
                src = configs[x.v]
                labels = x.label_map
                image = images[key][i][j]
                for pos in range(d.n):
                    if x.v[pos]:
                        continue
                    u = flip(x.v, [pos])
                    dst = configs[u]
                    coefficient = -1 if sign(x.v, pos) else 1
                    for target in tqft_images(src, dst, pos, labels):
                        tkey, ti, tj = where[(u, tuple(target[c] for c in dst.circle_ids))]
                        if tkey != key:
                            if annular and tkey[0] == key[0]:
                                continue
                            raise InconsistencyError(f"Differential of {x} leaves its block {key}")
                        value = F.reduce(image.get(tj, 0) + coefficient)
                        if value:
                            image[tj] = value
                        else:
                            image.pop(tj, None)

    blocks = {
        key: ComplexBlock(
            key,
            {i: tuple(elems) for i, elems in degrees.items()},
            {i: tuple(images[key][i]) for i in degrees},
        )
        for key, degrees in basis.items()
    }
    cx = GradedComplex(F, annular, blocks)
    check_d_squared(cx)
    logger.debug({
        "message": "Built complex",
        "annular": annular,
        "field": F.name,
        "blocks": len(blocks),
        "generators": len(where),
    })
    return cx


def khovanov_complex(d: AnnularDiagram, F: Field) -> GradedComplex:
    return build_complex(d, F, annular=False)


def annular_complex(d: AnnularDiagram, F: Field) -> GradedComplex:
    return build_complex(d, F, annular=True)


def apply(vectors: Tuple[Vector, ...], v: Vector, F: Field) -> Vector:
    """Image of the sparse vector v under the map with columns ``vectors``"""
    out: Vector = {}
    for j, c in v.items():
        for t, a in vectors[j].items():
            value = F.reduce(out.get(t, 0) + c * a)
            if value:
                out[t] = value
            else:
                out.pop(t, None)
    return out


def check_d_squared(cx: GradedComplex) -> None:
    for key, block in cx.blocks.items():
        for i in block.degrees:
            following = block.images(i + 1)
            if not block.size(i + 1):
                continue
            for j, image in enumerate(block.images(i)):
                if apply(following, image, cx.field):
                    raise InconsistencyError(f"d^2 != 0 on block {key}, degree {i}, element {j}")


@dataclass(frozen=True)
class PoincarePolynomial:
    """Dimensions keyed by (i, q) or (i, q, k)"""
    terms: Mapping[Tuple[int, ...], int] = field(hash=False)
    annular: bool = False

    def dim(self, *index: int) -> int:
        return self.terms.get(tuple(index), 0)

    @property
    def total_dim(self) -> int:
        return sum(self.terms.values())

    def items(self) -> List[Tuple[Tuple[int, ...], int]]:
        return sorted(self.terms.items())

    def blocks(self) -> List[Dict[str, int]]:
        names = ("i", "q", "k") if self.annular else ("i", "q")
        return [{**dict(zip(names, index)), "dim": dim} for index, dim in self.items()]

    def render(self) -> str:
        """Laurent polynomial sum dim * t^i q^j (times a^k when annular)"""
        t, q, a = symbols("t q a")
        expr = Integer(0)
        for index, dim in self.items():
            term = dim * t ** index[0] * q ** index[1]
            if self.annular:
                term *= a ** index[2]
            expr += term
        return str(expr)


def _block_homology(block: ComplexBlock, F: Field, dense_threshold: int) -> Dict[int, int]:
    ranks = {
        i: rank(block.images(i), F, n_cols=block.size(i + 1), dense_threshold=dense_threshold)
        for i in block.degrees
    }
    return {i: block.size(i) - ranks[i] - ranks.get(i - 1, 0) for i in block.degrees}


def homology(cx: GradedComplex, threads: Optional[int] = None) -> PoincarePolynomial:
    """
    Dimensions of the cohomology of every block

    Parameters:
        cx: the complex
        threads: worker threads across blocks (0 or None = settings, then CPU count)
    """
    settings = get_settings()
    threads = threads or settings.threads or os.cpu_count() or 1
    keys = cx.block_keys()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(
            lambda key: _block_homology(cx.blocks[key], cx.field, settings.dense_column_threshold),
            keys,
        ))
    terms: Dict[Tuple[int, ...], int] = {}
    for key, dims in zip(keys, results):
        for i, dim in dims.items():
            if dim < 0:
                raise InconsistencyError(f"Negative homology dimension in block {key}")
            if dim:
                terms[(i,) + key] = dim
    logger.debug({"message": "Computed homology", "blocks": len(keys), "total_dim": sum(terms.values())})
    return PoincarePolynomial(terms, cx.annular)


def chain_euler_characteristic(cx: GradedComplex) -> Dict[int, int]:
    """q -> sum over i of (-1)^i rank C^{i,q}"""
    chi: Dict[int, int] = {}
    for key, block in cx.blocks.items():
        for i in block.degrees:
            chi[key[0]] = chi.get(key[0], 0) + (-1) ** (i % 2) * block.size(i)
    return {q: c for q, c in sorted(chi.items()) if c}


def graded_euler_characteristic(poly: PoincarePolynomial) -> Dict[int, int]:
    chi: Dict[int, int] = {}
    for index, dim in poly.items():
        chi[index[1]] = chi.get(index[1], 0) + (-1) ** (index[0] % 2) * dim
    return {q: c for q, c in sorted(chi.items()) if c}


def forget_annular(poly: PoincarePolynomial) -> PoincarePolynomial:
    """Sum an annular polynomial over k"""
    if not poly.annular:
        return poly
    terms: Dict[Tuple[int, ...], int] = {}
    for (i, q, _), dim in poly.items():
        terms[(i, q)] = terms.get((i, q), 0) + dim
    return PoincarePolynomial(terms, annular=False)


def homological_width(poly: PoincarePolynomial) -> int:
    """Number of diagonals q - 2i carrying homology"""
    deltas = {index[1] - 2 * index[0] for index, dim in poly.items() if dim}
    if not deltas:
        return 0
    return (max(deltas) - min(deltas)) // 2 + 1
