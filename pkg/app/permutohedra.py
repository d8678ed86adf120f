"""
Permutohedra and their faces as ordered partitions.

Pi_S for S = (s_1 < ... < s_r) is the convex hull of all coordinate
permutations of S. The face of an ordered partition (P_1, ..., P_m) of
{1..r} is cut out by sum_{i in P_1 u ... u P_j} x_i = tau_{|P_1|+...+|P_j|}
with tau_k = s_1 + ... + s_k, so block j takes the j-th consecutive chunk of
S. Coordinates are numbered from 1.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations, permutations, product
from math import factorial, prod
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .core.errors import ParameterError
from .models import CheckRecord, PermutohedraReport

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


@dataclass(frozen=True)
class OrderedPartition:
    blocks: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        if any(not block for block in self.blocks):
            raise ParameterError("Ordered partitions have non-empty blocks")
        union = [x for block in self.blocks for x in block]
        if len(union) != len(set(union)) or sorted(union) != list(range(1, len(union) + 1)):
            raise ParameterError(f"{self} does not partition 1..{len(union)}")

    @classmethod
    def of(cls, *blocks: Iterable[int]) -> "OrderedPartition":
        return cls(tuple(frozenset(block) for block in blocks))

    @property
    def r(self) -> int:
        return sum(len(block) for block in self.blocks)

    def block_of(self, x: int) -> int:
        for j, block in enumerate(self.blocks):
            if x in block:
                return j
        raise ParameterError(f"{x} is not in {self}")

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return "(" + ",".join("{" + ",".join(map(str, sorted(block))) + "}" for block in self.blocks) + ")"


def _check_sequence(S: Sequence[int]) -> Tuple[int, ...]:
    S = tuple(S)
    if not S or any(a >= b for a, b in zip(S, S[1:])):
        raise ParameterError(f"S={S} must be a non-empty strictly increasing sequence")
    return S


def tau(S: Sequence[int]) -> Tuple[int, ...]:
    """Prefix sums tau_0 = 0, tau_1, ..., tau_r"""
    sums = [0]
    for s in S:
        sums.append(sums[-1] + s)
    return tuple(sums)


def vertices(S: Sequence[int]) -> Set[Point]:
    S = _check_sequence(S)
    return set(permutations(S))


@dataclass(frozen=True)
class PermutohedronFace:
    S: Tuple[int, ...]
    partition: OrderedPartition

    @property
    def dim(self) -> int:
        return self.partition.r - len(self.partition)

    def chunks(self) -> List[Tuple[int, ...]]:
        out, start = [], 0
        for block in self.partition.blocks:
            out.append(self.S[start:start + len(block)])
            start += len(block)
        return out

    @cached_property
    def vertex_set(self) -> FrozenSet[Point]:
        per_block = []
        for block, chunk in zip(self.partition.blocks, self.chunks()):
            coords = sorted(block)
            per_block.append([dict(zip(coords, values)) for values in permutations(chunk)])
        points = set()
        for choice in product(*per_block):
            merged: Dict[int, int] = {}
            for part in choice:
                merged.update(part)
            points.add(tuple(merged[i] for i in range(1, self.partition.r + 1)))
        return frozenset(points)

    def vertices(self) -> Iterator[Point]:
        return iter(sorted(self.vertex_set))

    def equations(self) -> List[Tuple[FrozenSet[int], int]]:
        """The prefix equations (coordinates, right-hand side) cutting out the face"""
        sums = tau(self.S)
        out, covered, size = [], set(), 0
        for block in self.partition.blocks:
            covered |= block
            size += len(block)
            out.append((frozenset(covered), sums[size]))
        return out

    def barycenter(self) -> Tuple[Fraction, ...]:
        """Each coordinate is the mean of its block's chunk"""
        value: Dict[int, Fraction] = {}
        for block, chunk in zip(self.partition.blocks, self.chunks()):
            mean = Fraction(sum(chunk), len(chunk))
            for i in block:
                value[i] = mean
        return tuple(value[i] for i in range(1, self.partition.r + 1))

    def contains(self, other: "PermutohedronFace") -> bool:
        return refines(other.partition, self.partition)


def face(S: Sequence[int], p: OrderedPartition) -> PermutohedronFace:
    S = _check_sequence(S)
    if p.r != len(S):
        raise ParameterError(f"{p} partitions 1..{p.r}, S has {len(S)} entries")
    return PermutohedronFace(S, p)


def refines(q: OrderedPartition, p: OrderedPartition) -> bool:
    """Whether every block of p is a union of consecutive blocks of q, in order"""
    if q.r != p.r:
        return False
    j = 0
    for block in p.blocks:
        acc: Set[int] = set()
        while j < len(q.blocks) and acc | q.blocks[j] <= block and acc != block:
            acc |= q.blocks[j]
            j += 1
        if acc != block:
            return False
    return j == len(q.blocks)


def _ordered_partitions(elements: Tuple[int, ...]) -> Iterator[Tuple[FrozenSet[int], ...]]:
    if not elements:
        yield ()
        return
    for size in range(1, len(elements) + 1):
        for first in combinations(elements, size):
            rest = tuple(x for x in elements if x not in first)
            for tail in _ordered_partitions(rest):
                yield (frozenset(first),) + tail


def ordered_partitions(r: int) -> List[OrderedPartition]:
    return [OrderedPartition(blocks) for blocks in _ordered_partitions(tuple(range(1, r + 1)))]


def refinements(p: OrderedPartition) -> List[OrderedPartition]:
    """All ordered partitions refining p (p included)"""
    per_block = [list(_ordered_partitions(tuple(sorted(block)))) for block in p.blocks]
    return [
        OrderedPartition(tuple(b for part in choice for b in part))
        for choice in product(*per_block)
    ]


def reduce(p: OrderedPartition, b: int) -> OrderedPartition:
    """Delete b and renumber the elements above it down by one"""
    j = p.block_of(b)
    if len(p.blocks[j]) == 1:
        raise ParameterError(f"Reducing {p} by {b} empties a block")
    return OrderedPartition(tuple(
        frozenset(x - 1 if x > b else x for x in block if x != b) for block in p.blocks
    ))


def extend(p: OrderedPartition, a: int, b: int) -> OrderedPartition:
    """
    The (a,b)-extension: renumber elements >= b up by one and put b next to a

    a and b are named in the numbering of the result, so extend(reduce(p, b), a, b) == p
    whenever a and b share a block of p.
    """
    if a == b or not 1 <= b <= p.r + 1 or not 1 <= a <= p.r + 1:
        raise ParameterError(f"Cannot extend {p} by ({a},{b})")
    target = p.block_of(a if a < b else a - 1)
    blocks = []
    for j, block in enumerate(p.blocks):
        shifted = {x + 1 if x >= b else x for x in block}
        if j == target:
            shifted.add(b)
        blocks.append(frozenset(shifted))
    return OrderedPartition(tuple(blocks))


@dataclass(frozen=True)
class HyperplaneIntersection:
    """Pi_S intersected with the equality groups, identified with Pi of the shortened S"""
    S: Tuple[int, ...]
    groups: Tuple[Tuple[int, ...], ...]
    reduced_S: Tuple[int, ...]
    images: Mapping[OrderedPartition, Optional[OrderedPartition]]

    def image(self, p: OrderedPartition) -> Optional[OrderedPartition]:
        return self.images[p]

    def surviving(self) -> List[OrderedPartition]:
        return [p for p, image in self.images.items() if image is not None]

    def point(self, p: OrderedPartition) -> Optional[Tuple[Fraction, ...]]:
        """Barycenter of the face of p, a point of the intersection when it is not empty"""
        if self.images[p] is None:
            return None
        return face(self.S, p).barycenter()


def reduce_groups(p: OrderedPartition, groups: Sequence[Sequence[int]]) -> Optional[OrderedPartition]:
    """Reduce by every element but the smallest of each group, largest first; None if a group is split"""
    for group in groups:
        if len({p.block_of(x) for x in group}) > 1:
            return None
    removed = sorted((x for group in groups for x in sorted(group)[1:]), reverse=True)
    for b in removed:
        p = reduce(p, b)
    return p


def intersect_hyperplanes(S: Sequence[int], equalities: Sequence[Sequence[int]]) -> HyperplaneIntersection:
    """
    Faces of Pi_S meeting H = {x_a = x_b within every group}, with their images in Pi_{S'}

    Parameters:
        S: strictly increasing sequence of length r
        equalities: pairwise disjoint coordinate groups, each of size at least 2
    """
    S = _check_sequence(S)
    groups = tuple(tuple(sorted(group)) for group in equalities)
    seen: Set[int] = set()
    for group in groups:
        if len(group) < 2 or any(not 1 <= x <= len(S) for x in group):
            raise ParameterError(f"Equality group {group} is not a set of at least two coordinates")
        if seen & set(group):
            raise ParameterError("Equality groups must be pairwise disjoint")
        seen |= set(group)
    K = sum(len(group) - 1 for group in groups)
    images = {p: reduce_groups(p, groups) for p in ordered_partitions(len(S))}
    return HyperplaneIntersection(S, groups, S[: len(S) - K], images)


def act_on_partition(sigma: Mapping[int, int], p: OrderedPartition) -> OrderedPartition:
    """Push p forward along the coordinate permutation i -> sigma[i]"""
    if sorted(sigma) != sorted(sigma.values()) or sorted(sigma) != list(range(1, p.r + 1)):
        raise ParameterError("sigma must permute the coordinates 1..r")
    return OrderedPartition(tuple(frozenset(sigma[x] for x in block) for block in p.blocks))


def act_on_point(sigma: Mapping[int, int], x: Sequence) -> tuple:
    y = [None] * len(x)
    for i, value in enumerate(x, start=1):
        y[sigma[i] - 1] = value
    return tuple(y)


@dataclass(frozen=True)
class FixedPermutohedron:
    """Fixed set of Pi_{n-1} under a group permuting coordinates within the orbits"""
    n: int
    orbits: Tuple[Tuple[int, ...], ...]

    @property
    def s(self) -> int:
        return len(self.orbits)

    def partition(self, w: Sequence[int]) -> OrderedPartition:
        """Face of Pi_{n-1} whose barycenter is z_w; w orders the orbits"""
        return OrderedPartition(tuple(frozenset(self.orbits[j]) for j in w))

    def vertex(self, w: Sequence[int]) -> Tuple[Fraction, ...]:
        return face(tuple(range(1, self.n + 1)), self.partition(w)).barycenter()

    def vertices(self) -> Dict[Tuple[int, ...], Tuple[Fraction, ...]]:
        return {w: self.vertex(w) for w in permutations(range(self.s))}

    def chain(self, w: Sequence[int]) -> Tuple[Point, ...]:
        """
        Invariant chain of Cube(n) behind z_w

        0 < 1_{U_{w_1}} < 1_{U_{w_1} u U_{w_2}} < ... < 1, with U_j the j-th orbit
        and 1_U the 0/1 vertex supported on U.
        """
        if sorted(w) != list(range(self.s)):
            raise ParameterError(f"{tuple(w)} does not order the {self.s} orbits")
        on: Set[int] = set()
        out = [tuple([0] * self.n)]
        for j in w:
            on.update(self.orbits[j])
            out.append(tuple(1 if x in on else 0 for x in range(1, self.n + 1)))
        return tuple(out)

    def chains_through(self, w: Sequence[int]) -> int:
        """Maximal chains (vertices of Pi_{n-1}) refining the invariant chain of z_w"""
        return prod(factorial(len(self.orbits[j])) for j in w)


def fixed_permutohedron(n: int, orbits: Sequence[Sequence[int]]) -> FixedPermutohedron:
    """
    Parameters:
        n: dimension plus one of the ambient permutohedron
        orbits: partition of 1..n into the orbits of the action
    """
    flat = sorted(x for orbit in orbits for x in orbit)
    if flat != list(range(1, n + 1)) or any(not orbit for orbit in orbits):
        raise ParameterError(f"Orbits {orbits} do not partition 1..{n}")
    return FixedPermutohedron(n, tuple(sorted(tuple(sorted(orbit)) for orbit in orbits)))


def cube_chain(order: Sequence[int]) -> Tuple[Point, ...]:
    """Maximal chain of Cube(n) switching the coordinates on in the given order"""
    n = len(order)
    if sorted(order) != list(range(1, n + 1)):
        raise ParameterError(f"{tuple(order)} is not an ordering of 1..{n}")
    point = [0] * n
    out = [tuple(point)]
    for x in order:
        point[x - 1] = 1
        out.append(tuple(point))
    return tuple(out)


def geometric_dimension(f: PermutohedronFace, groups: Sequence[Sequence[int]]) -> Optional[int]:
    """
    Dimension of f meet H computed from coordinates, or None when they are disjoint

    Disjointness is decided per equality x_a = x_b through the range of x_a - x_b
    over the vertices of f.
    """
    points = sorted(f.vertex_set)
    for group in groups:
        for a, b in zip(group, group[1:]):
            values = [x[a - 1] - x[b - 1] for x in points]
            if min(values) > 0 or max(values) < 0:
                return None
    D = np.array([[x - y for x, y in zip(point, points[0])] for point in points[1:]] or [[0] * f.partition.r])
    rows = []
    for group in groups:
        for a, b in zip(group, group[1:]):
            row = [0] * f.partition.r
            row[a - 1], row[b - 1] = 1, -1
            rows.append(row)
    if not rows:
        return int(np.linalg.matrix_rank(D))
    return int(np.linalg.matrix_rank(D)) - int(np.linalg.matrix_rank(D @ np.array(rows).T))


def verify_permutohedra(max_r: int = 5) -> PermutohedraReport:
    checks: List[CheckRecord] = []

    def record(name: str, failures: List[str]) -> None:
        checks.append(CheckRecord(name=name, passed=not failures, detail="; ".join(failures[:5])))

    failures = []
    for r in range(1, max_r + 1):
        S = tuple(range(1, r + 1))
        faces = [face(S, p) for p in ordered_partitions(r)]
        for f in faces:
            if len(f.vertex_set) != prod(factorial(len(b)) for b in f.partition.blocks):
                failures.append(f"{f.partition}: wrong vertex count")
        if r <= 4:
            for f, g in product(faces, repeat=2):
                if (g.vertex_set <= f.vertex_set) != f.contains(g):
                    failures.append(f"{g.partition} in {f.partition}")
    record("face-lattice", failures)

    failures = []
    for r in range(2, max_r + 1):
        for p in ordered_partitions(r):
            for block in p.blocks:
                for a, b in permutations(sorted(block), 2):
                    if extend(reduce(p, b), a, b) != p:
                        failures.append(f"extend(reduce({p}, {b}), {a}, {b})")
                    left = {reduce(q, b) for q in refinements(p) if q.block_of(a) == q.block_of(b)}
                    right = set(refinements(reduce(p, b)))
                    if left != right:
                        failures.append(f"reduction by {b} and refinement of {p}")
    record("reduction-refinement", failures)

    failures = []
    for r in range(2, max_r + 1):
        S = tuple(range(1, r + 1))
        singles = [[group] for size in range(2, r + 1) for group in combinations(range(1, r + 1), size)]
        pairs = [
            [a, b] for (a,), (b,) in combinations(singles, 2) if not set(a) & set(b)
        ] if r <= 4 else []
        for groups in singles + pairs:
            inter = intersect_hyperplanes(S, groups)
            for p, image in inter.images.items():
                expected = None if image is None else len(inter.reduced_S) - len(image)
                if geometric_dimension(face(S, p), groups) != expected:
                    failures.append(f"{p} meets {groups}")
    record("hyperplane-oracle", failures)

    failures = []
    for n in range(1, max_r + 1):
        cube_chains = [set(cube_chain(order)) for order in permutations(range(1, n + 1))]
        for blocks in _ordered_partitions(tuple(range(1, n + 1))):
            fixed = fixed_permutohedron(n, [sorted(b) for b in blocks])
            points = fixed.vertices()
            if len(set(points.values())) != factorial(fixed.s):
                failures.append(f"{fixed.orbits}: vertex count")
            groups = [orbit for orbit in fixed.orbits if len(orbit) > 1]
            inter = intersect_hyperplanes(tuple(range(1, n + 1)), groups) if groups else None
            for w in points:
                p = fixed.partition(w)
                if inter is not None and (inter.image(p) is None or len(inter.image(p)) != inter.image(p).r):
                    failures.append(f"{p} is not a vertex of the intersection")
                if fixed.chains_through(w) != len(face(tuple(range(1, n + 1)), p).vertex_set):
                    failures.append(f"{p}: chain count")
                invariant = set(fixed.chain(w))
                refining = sum(1 for chain in cube_chains if invariant <= chain)
                if refining != fixed.chains_through(w):
                    failures.append(f"{p}: {refining} cube chains through {sorted(invariant)}")
    record("fixed-points", failures)

    verdict = "pass" if all(check.passed for check in checks) else "fail"
    logger.info({"message": "Permutohedra checks", "max_r": max_r, "verdict": verdict})
    return PermutohedraReport(checks=checks, verdict=verdict)
