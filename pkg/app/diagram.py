"""
Annular planar diagrams: parsing, validation, periodic symmetry, lifts and quotients.

Crossings are 4-tuples of edge ids listed counterclockwise from the incoming
under-strand. The 0-smoothing joins positions (0,1) and (2,3), the 1-smoothing
joins (0,3) and (1,2). The under-strand runs from position 0 to position 2; the
over-strand runs 3 -> 1 at a positive crossing and 1 -> 3 at a negative one.

The annulus is encoded by per-edge ray parities: a resolution circle is
nontrivial iff the parities of its edges sum to 1 mod 2. Lifts also need the
signed ray windings; a diagram given by parities alone reads every parity-1 edge
as one positive crossing, which is checked before lifting. Free loops get the
ids following the largest edge id.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from pydantic import ValidationError
from sympy import factorint

from .config.settings import get_settings
from .core.errors import DiagramError, ParameterError, SymmetryError
from .core.unionfind import UnionFind
from .models import (
    BraidRecord,
    CrossingRecord,
    DiagramFile,
    FreeLoopRecord,
    SymmetryRecord,
)

logger = logging.getLogger(__name__)

Vertex = Tuple[int, ...]


@dataclass(frozen=True)
class Crossing:
    edges: Tuple[int, int, int, int]
    sign: int

    @staticmethod
    def join_positions(bit: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return ((0, 1), (2, 3)) if bit == 0 else ((0, 3), (1, 2))

    def joins(self, bit: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        (i, j), (k, l) = self.join_positions(bit)
        return (self.edges[i], self.edges[j]), (self.edges[k], self.edges[l])

    def partner(self, pos: int, bit: int) -> int:
        """Position joined to pos by the bit-smoothing"""
        for i, j in self.join_positions(bit):
            if pos == i:
                return j
            if pos == j:
                return i
        raise ValueError(f"Crossing position {pos} out of range")

    @property
    def outgoing(self) -> Tuple[int, int]:
        """Positions where an edge leaves the crossing"""
        return (1, 2) if self.sign > 0 else (2, 3)

    @property
    def incoming(self) -> Tuple[int, int]:
        return (0, 3) if self.sign > 0 else (0, 1)


@dataclass(frozen=True)
class PeriodicSymmetry:
    order: int
    crossing_perm: Tuple[int, ...]
    edge_perm: Mapping[int, int] = field(hash=False)
    loop_perm: Optional[Tuple[int, ...]] = None

    def crossing_image(self, c: int, power: int = 1) -> int:
        for _ in range(power % self.order):
            c = self.crossing_perm[c]
        return c

    def edge_image(self, e: int, power: int = 1) -> int:
        for _ in range(power % self.order):
            e = self.edge_perm[e]
        return e

    def loop_image(self, index: int, power: int = 1) -> int:
        if self.loop_perm is None:
            return index
        for _ in range(power % self.order):
            index = self.loop_perm[index]
        return index

    def act_on_vertex(self, v: Vertex) -> Vertex:
        """Resolution vector of the image diagram: (sigma v)[sigma(i)] = v[i]"""
        w = [0] * len(v)
        for i, bit in enumerate(v):
            w[self.crossing_perm[i]] = bit
        return tuple(w)


@dataclass(frozen=True)
class AnnularDiagram:
    crossings: Tuple[Crossing, ...]
    free_loops: Tuple[int, ...]
    ray_parity: Mapping[int, int] = field(hash=False)
    ray_winding: Mapping[int, int] = field(hash=False)
    symmetry: Optional[PeriodicSymmetry] = None
    # False when ray_winding was read off the parities as positive crossings
    windings_given: bool = True

    @property
    def n(self) -> int:
        return len(self.crossings)

    @cached_property
    def n_plus(self) -> int:
        return sum(1 for c in self.crossings if c.sign > 0)

    @cached_property
    def n_minus(self) -> int:
        return sum(1 for c in self.crossings if c.sign < 0)

    @cached_property
    def edges(self) -> FrozenSet[int]:
        return frozenset(e for c in self.crossings for e in c.edges)

    @cached_property
    def loop_ids(self) -> Tuple[int, ...]:
        start = max(self.edges) + 1 if self.edges else 0
        return tuple(start + i for i in range(len(self.free_loops)))

    @cached_property
    def edge_slots(self) -> Dict[int, List[Tuple[int, int]]]:
        """Edge id -> its two (crossing, position) slots"""
        slots: Dict[int, List[Tuple[int, int]]] = {}
        for c, crossing in enumerate(self.crossings):
            for pos, e in enumerate(crossing.edges):
                slots.setdefault(e, []).append((c, pos))
        return slots

    def parity(self, circle_member: int) -> int:
        """Ray parity of an edge or of a free loop id"""
        if circle_member in self.ray_parity:
            return self.ray_parity[circle_member]
        return self.free_loops[self.loop_ids.index(circle_member)]

    def with_symmetry(self, symmetry: Optional[PeriodicSymmetry]) -> "AnnularDiagram":
        return replace(self, symmetry=symmetry)


@dataclass(frozen=True)
class TracedCircle:
    id: int
    members: Tuple[int, ...]
    trivial: bool


def trace_circles(d: AnnularDiagram, v: Vertex) -> List[TracedCircle]:
    """Circles of the resolution at v, sorted by id (the smallest edge or loop id on them)"""
    uf = UnionFind(d.edges)
    for crossing, bit in zip(d.crossings, v):
        for x, y in crossing.joins(bit):
            uf.union(x, y)
    circles = []
    for members in uf.groups():
        parity = sum(d.ray_parity[e] for e in members) % 2
        circles.append(TracedCircle(members[0], tuple(members), parity == 0))
    for loop_id, parity in zip(d.loop_ids, d.free_loops):
        circles.append(TracedCircle(loop_id, (loop_id,), parity == 0))
    return sorted(circles, key=lambda c: c.id)


def _check_vertices(n: int, sample_bound: int) -> List[Vertex]:
    if n <= sample_bound:
        return list(product((0, 1), repeat=n))
    return [tuple([0] * n), tuple([1] * n)]


def _tail_slot(d: AnnularDiagram, e: int) -> Tuple[int, int]:
    """The (crossing, position) slot edge e leaves from"""
    for c, pos in d.edge_slots[e]:
        if pos in d.crossings[c].outgoing:
            return c, pos
    raise DiagramError(f"Edge {e} has no outgoing end")


def circle_windings(d: AnnularDiagram, v: Vertex) -> Dict[int, int]:
    """
    Signed winding of each crossing circle of the resolution at v

    A circle is walked once; edges traversed against their orientation count
    with the opposite sign. Circles are keyed by their smallest edge id.
    """
    tails = {e: _tail_slot(d, e) for e in d.edges}
    out: Dict[int, int] = {}
    seen = set()
    for start in sorted(d.edges):
        if start in seen:
            continue
        e, forward, total, members = start, True, 0, []
        while True:
            seen.add(e)
            members.append(e)
            total += d.ray_winding[e] if forward else -d.ray_winding[e]
            first, second = d.edge_slots[e]
            tail = tails[e]
            head = second if first == tail else first
            c, pos = head if forward else tail
            crossing = d.crossings[c]
            q = crossing.partner(pos, v[c])
            e = crossing.edges[q]
            forward = tails[e] == (c, q)
            if e == start and forward:
                break
        out[min(members)] = total
    return out


def check_windings(d: AnnularDiagram, sample_bound: Optional[int] = None) -> None:
    """
    Reject windings under which some resolution circle winds more than once

    Embedded circles wind 0 or +-1 around the axis. Checked on all resolutions
    up to sample_bound crossings, else on the all-0, all-1 and oriented ones.
    """
    if sample_bound is None:
        sample_bound = get_settings().symmetry_sample_bound
    vertices = _check_vertices(d.n, sample_bound)
    oriented = tuple(1 if c.sign < 0 else 0 for c in d.crossings)
    if oriented not in vertices:
        vertices.append(oriented)
    for v in vertices:
        for circle, total in circle_windings(d, v).items():
            if abs(total) > 1:
                hint = "" if d.windings_given else "; the parities do not fix the crossing signs, give ray_winding"
                raise DiagramError(f"Circle {circle} at resolution {v} winds {total} times around the axis{hint}")


def build_diagram(
    crossings: Sequence[Tuple[Sequence[int], int]],
    free_loops: Sequence[int] = (),
    ray_parity: Optional[Mapping[int, int]] = None,
    ray_winding: Optional[Mapping[int, int]] = None,
    symmetry: Optional[PeriodicSymmetry] = None,
    n_plus: Optional[int] = None,
    n_minus: Optional[int] = None,
    max_crossings: Optional[int] = None,
) -> AnnularDiagram:
    """
    Assemble and validate an annular diagram

    Parameters:
        crossings: (edge 4-tuple, sign) pairs
        free_loops: ray parity of each crossingless component
        ray_parity: edge id -> parity bit
        ray_winding: optional edge id -> signed winding, congruent to the parity mod 2;
            when omitted every parity-1 edge is read as crossing the ray positively
        symmetry: optional periodic symmetry, validated against the diagram
        n_plus, n_minus: optional declared sign counts
        max_crossings: cube size cap (defaults to the settings)
    """
    if max_crossings is None:
        max_crossings = get_settings().max_crossings
    if len(crossings) > max_crossings:
        raise ParameterError(
            f"Diagram has {len(crossings)} crossings, above the cap of {max_crossings}"
        )
    records = tuple(Crossing(tuple(int(e) for e in edges), int(sign)) for edges, sign in crossings)
    ray_parity = {int(e): int(b) for e, b in (ray_parity or {}).items()}

    # every edge exactly twice, once in and once out
    occurrences: Dict[int, List[str]] = {}
    for c, crossing in enumerate(records):
        if len(crossing.edges) != 4:
            raise DiagramError(f"Crossing {c} does not have 4 edges")
        if crossing.sign not in (1, -1):
            raise DiagramError(f"Crossing {c} has sign {crossing.sign}")
        for pos, e in enumerate(crossing.edges):
            if e < 0:
                raise DiagramError(f"Edge id {e} is negative")
            occurrences.setdefault(e, []).append("out" if pos in crossing.outgoing else "in")
    for e, seen in sorted(occurrences.items()):
        if len(seen) != 2:
            raise DiagramError(f"Edge {e} appears {len(seen)} times (expected 2)")
        if sorted(seen) != ["in", "out"]:
            raise DiagramError(f"Edge {e} is not oriented consistently: {seen}")

    for e in sorted(occurrences):
        if e not in ray_parity:
            raise DiagramError(f"Missing ray parity for edge {e}")
    for e, bit in ray_parity.items():
        if e not in occurrences:
            raise DiagramError(f"Ray parity given for unknown edge {e}")
        if bit not in (0, 1):
            raise DiagramError(f"Ray parity of edge {e} is {bit}, expected 0 or 1")
    for i, bit in enumerate(free_loops):
        if bit not in (0, 1):
            raise DiagramError(f"Free loop {i} has parity {bit}, expected 0 or 1")

    if ray_winding is None:
        winding = dict(ray_parity)
    else:
        winding = {int(e): int(w) for e, w in ray_winding.items()}
        if set(winding) != set(ray_parity):
            raise DiagramError("ray_winding must cover exactly the edges")
        for e, w in winding.items():
            if w % 2 != ray_parity[e]:
                raise DiagramError(f"Winding {w} of edge {e} disagrees with its parity")

    d = AnnularDiagram(
        records, tuple(int(b) for b in free_loops), ray_parity, winding, windings_given=ray_winding is not None
    )

    if n_plus is not None and n_plus != d.n_plus:
        raise DiagramError(f"Declared n_plus={n_plus} but the signs give {d.n_plus}")
    if n_minus is not None and n_minus != d.n_minus:
        raise DiagramError(f"Declared n_minus={n_minus} but the signs give {d.n_minus}")

    if symmetry is not None:
        validate_symmetry(d, symmetry)
        d = d.with_symmetry(symmetry)
    return d


def parse_diagram(text: str) -> AnnularDiagram:
    """
    Parse a diagram file

    Parameters:
        text: JSON content with crossings, free loops, ray parities and an optional
            symmetry, or a braid word to close up
    """
    try:
        record = DiagramFile.model_validate_json(text)
    except ValidationError as e:
        raise DiagramError(f"Malformed diagram file: {e}")

    if record.braid is not None:
        braid = record.braid
        d = braid_closure(braid.strands, braid.word, periodic=braid.periodic, period=braid.period)
    else:
        symmetry = None
        if record.symmetry is not None:
            symmetry = PeriodicSymmetry(
                order=record.symmetry.order,
                crossing_perm=tuple(record.symmetry.crossing_perm),
                edge_perm=dict(record.symmetry.edge_perm),
                loop_perm=tuple(record.symmetry.loop_perm) if record.symmetry.loop_perm is not None else None,
            )
        d = build_diagram(
            [(c.edges, c.sign) for c in record.crossings],
            [loop.parity for loop in record.free_loops],
            record.ray_parity,
            record.ray_winding,
            symmetry,
            n_plus=record.n_plus,
            n_minus=record.n_minus,
        )
    logger.debug({"message": "Parsed diagram", "crossings": d.n, "free_loops": len(d.free_loops)})
    return d


def diagram_to_file(d: AnnularDiagram) -> DiagramFile:
    symmetry = None
    if d.symmetry is not None:
        symmetry = SymmetryRecord(
            order=d.symmetry.order,
            crossing_perm=list(d.symmetry.crossing_perm),
            edge_perm=dict(sorted(d.symmetry.edge_perm.items())),
            loop_perm=list(d.symmetry.loop_perm) if d.symmetry.loop_perm is not None else None,
        )
    winding = None
    if any(d.ray_winding[e] != d.ray_parity[e] for e in d.ray_parity):
        winding = dict(sorted(d.ray_winding.items()))
    return DiagramFile(
        crossings=[CrossingRecord(edges=list(c.edges), sign=c.sign) for c in d.crossings],
        free_loops=[FreeLoopRecord(parity=b) for b in d.free_loops],
        ray_parity=dict(sorted(d.ray_parity.items())),
        ray_winding=winding,
        symmetry=symmetry,
    )


def canonical_payload(d: AnnularDiagram) -> str:
    """Canonical JSON of a diagram, stable across equivalent input files"""
    payload = diagram_to_file(d).model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def validate_symmetry(d: AnnularDiagram, s: PeriodicSymmetry, sample_bound: Optional[int] = None) -> None:
    """
    Check that s is a free periodic automorphism of d

    Parameters:
        d: the diagram
        s: the candidate symmetry
        sample_bound: triviality classes are compared on all resolutions when
            d has at most this many crossings, else on the all-0 and all-1 ones
    """
    if sample_bound is None:
        sample_bound = get_settings().symmetry_sample_bound
    n, m = d.n, s.order
    if m < 2:
        raise SymmetryError(f"Symmetry order must be at least 2, got {m}")
    if sorted(s.crossing_perm) != list(range(n)):
        raise SymmetryError("crossing_perm is not a permutation of the crossings")
    if set(s.edge_perm) != set(d.edges) or set(s.edge_perm.values()) != set(d.edges):
        raise SymmetryError("edge_perm is not a permutation of the edges")
    loops = len(d.free_loops)
    loop_perm = s.loop_perm if s.loop_perm is not None else tuple(range(loops))
    if sorted(loop_perm) != list(range(loops)):
        raise SymmetryError("loop_perm is not a permutation of the free loops")

    for c, crossing in enumerate(d.crossings):
        image = d.crossings[s.crossing_perm[c]]
        expected = tuple(s.edge_perm[e] for e in crossing.edges)
        if image.edges != expected or image.sign != crossing.sign:
            raise SymmetryError(
                f"Not an automorphism: crossing {c} {crossing.edges} maps to "
                f"{image.edges}, expected {expected}"
            )
    for i, j in enumerate(loop_perm):
        if d.free_loops[i] != d.free_loops[j]:
            raise SymmetryError(f"Free loop {i} maps to a loop of the other triviality class")
        if d.free_loops[i] == 1 and i != j:
            raise SymmetryError(f"Nontrivial free loop {i} must be fixed by the symmetry")

    s = replace(s, loop_perm=tuple(loop_perm))
    if any(s.crossing_image(c, m) != c for c in range(n)):
        raise SymmetryError(f"crossing_perm does not have order dividing {m}")
    if any(s.edge_image(e, m) != e for e in d.edges):
        raise SymmetryError(f"edge_perm does not have order dividing {m}")
    if any(s.loop_image(i, m) != i for i in range(loops)):
        raise SymmetryError(f"loop_perm does not have order dividing {m}")

    for power in range(1, m):
        fixed = [c for c in range(n) if s.crossing_image(c, power) == c]
        if fixed:
            raise SymmetryError(f"Crossings {fixed} are fixed by the power {power} of the symmetry")
        fixed = [e for e in sorted(d.edges) if s.edge_image(e, power) == e]
        if fixed:
            raise SymmetryError(f"Edges {fixed} are fixed by the power {power} of the symmetry")
        fixed = [i for i in range(loops) if d.free_loops[i] == 0 and s.loop_image(i, power) == i]
        if fixed:
            raise SymmetryError(f"Trivial free loops {fixed} are fixed by the power {power} of the symmetry")

    for v in _check_vertices(n, sample_bound):
        source = trace_circles(d, v)
        target = trace_circles(d, s.act_on_vertex(v))
        owner = {member: circle for circle in target for member in circle.members}
        for circle in source:
            first = circle.members[0]
            if first in d.ray_parity:
                image = owner[s.edge_perm[first]]
                mapped = {s.edge_perm[e] for e in circle.members}
            else:
                loop_index = d.loop_ids.index(first)
                image = owner[d.loop_ids[s.loop_image(loop_index)]]
                mapped = {image.id}
            if set(image.members) != mapped:
                raise SymmetryError(f"Circle {circle.id} at {v} does not map onto a circle")
            if image.trivial != circle.trivial:
                raise SymmetryError(
                    f"Circle {circle.id} at resolution {v} changes triviality under the symmetry"
                )


def is_prime_power(m: int) -> bool:
    return m >= 2 and len(factorint(m)) == 1


@dataclass(frozen=True)
class OrbitMaps:
    """Where each crossing, edge and free loop of a periodic diagram goes in its quotient"""
    crossing_map: Tuple[int, ...]
    edge_map: Mapping[int, int] = field(hash=False)
    loop_map: Tuple[int, ...] = ()


def _sheet_windings(
    d: AnnularDiagram, s: PeriodicSymmetry, crossing_rep: Sequence[int], parity: Mapping[int, int]
) -> Dict[int, int]:
    """
    Quotient windings read off the symmetry when d only carries parities

    Crossing sigma^k(rep) lies on sheet k. An edge orbit running from sheet a to
    sheet b winds b - a mod m, and its winding is also its quotient parity mod 2.
    For even m the sheets of whole crossing orbits are shifted by one first, so
    that both congruences agree. The smallest such winding is taken.
    """
    m = s.order
    sheet = {}
    for c, rep in enumerate(crossing_rep):
        sheet[c] = next(k for k in range(m) if s.crossing_image(rep, k) == c)

    ends: Dict[int, Tuple[int, int, int]] = {}
    for e in d.edges:
        if e not in parity:
            continue
        tail_slot = _tail_slot(d, e)
        tail = tail_slot[0]
        head = next(c for c, pos in d.edge_slots[e] if (c, pos) != tail_slot)
        ends[e] = (crossing_rep[tail], crossing_rep[head], (sheet[head] - sheet[tail]) % m)

    shift = {rep: 0 for rep in set(crossing_rep)}
    if m % 2 == 0:
        # shift[b] - shift[a] = parity - offset (mod 2) on every edge orbit a -> b
        graph: Dict[int, List[Tuple[int, int]]] = {rep: [] for rep in shift}
        for e, (a, b, offset) in ends.items():
            need = (parity[e] - offset) % 2
            graph[a].append((b, need))
            graph[b].append((a, need))
        fixed: Dict[int, int] = {}
        for root in sorted(shift):
            if root in fixed:
                continue
            fixed[root] = 0
            queue = [root]
            while queue:
                a = queue.pop()
                for b, need in graph[a]:
                    value = (fixed[a] + need) % 2
                    if b not in fixed:
                        fixed[b] = value
                        queue.append(b)
                    elif fixed[b] != value:
                        raise DiagramError(
                            "The ray parities disagree with the sheets of the symmetry; give ray_winding"
                        )
        shift = fixed

    modulus = m if m % 2 == 0 else 2 * m
    winding = {}
    for e, (a, b, offset) in ends.items():
        offset = (offset + shift[b] - shift[a]) % m
        r = next(r for r in range(modulus) if r % m == offset and r % 2 == parity[e])
        winding[e] = r if r <= modulus - r else r - modulus
    return winding


def quotient_diagram(d: AnnularDiagram, s: Optional[PeriodicSymmetry] = None) -> Tuple[AnnularDiagram, OrbitMaps]:
    """
    Quotient of a periodic diagram by its symmetry

    Quotient windings sum the windings over each edge orbit. A diagram given by
    parities alone gets them from the sheets of the symmetry instead, and the
    lift of the quotient is checked to give back d.

    Parameters:
        d: periodic diagram
        s: symmetry (defaults to the one attached to d)
    """
    s = s or d.symmetry
    if s is None:
        raise SymmetryError("Diagram carries no symmetry")
    validate_symmetry(d, s)
    m = s.order
    if not is_prime_power(m):
        raise ParameterError(f"Quotients need a prime power order, got {m}")

    crossing_rep = [min(s.crossing_image(c, k) for k in range(m)) for c in range(d.n)]
    reps = sorted(set(crossing_rep))
    index_of = {c: i for i, c in enumerate(reps)}
    edge_rep = {e: min(s.edge_image(e, k) for k in range(m)) for e in d.edges}

    crossings = []
    for c in reps:
        crossing = d.crossings[c]
        crossings.append((tuple(edge_rep[e] for e in crossing.edges), crossing.sign))
    parity: Dict[int, int] = {}
    winding: Dict[int, int] = {}
    for e, rep in edge_rep.items():
        parity[rep] = (parity.get(rep, 0) + d.ray_parity[e]) % 2
        winding[rep] = winding.get(rep, 0) + d.ray_winding[e]
    if not d.windings_given:
        winding = _sheet_windings(d, s, crossing_rep, parity)

    loop_rep = [min(s.loop_image(i, k) for k in range(m)) for i in range(len(d.free_loops))]
    loop_reps = sorted(set(loop_rep))
    loops = [d.free_loops[i] for i in loop_reps]

    quotient = build_diagram(crossings, loops, parity, winding)
    if not d.windings_given:
        try:
            lifted, _ = lift_diagram(quotient, m)
        except DiagramError:
            lifted = None
        if lifted is None or find_isomorphism(lifted, d) is None:
            raise DiagramError("The ray parities do not determine the quotient windings; give ray_winding")
    maps = OrbitMaps(
        crossing_map=tuple(index_of[r] for r in crossing_rep),
        edge_map=dict(edge_rep),
        loop_map=tuple(loop_reps.index(r) for r in loop_rep),
    )
    logger.info({"message": "Built quotient diagram", "order": m, "crossings": quotient.n})
    return quotient, maps


def lift_diagram(d: AnnularDiagram, p: int) -> Tuple[AnnularDiagram, PeriodicSymmetry]:
    """
    The p-fold lift of d along the annulus, with its rotation symmetry

    Edge copy (e, j) leaves crossing copy j and arrives at crossing copy j + w(e),
    where w is the ray winding. Copy j of crossing c has index c*p + j. Raises
    DiagramError when the windings let a resolution circle wind more than once.
    """
    if p < 2:
        raise ParameterError(f"Lift degree must be at least 2, got {p}")
    if any(d.ray_winding.values()):
        check_windings(d)
    rank = {e: i for i, e in enumerate(sorted(d.edges))}

    def copy_id(e: int, j: int) -> int:
        return rank[e] * p + (j % p) + 1

    crossings = []
    for crossing in d.crossings:
        for j in range(p):
            edges = []
            for pos, e in enumerate(crossing.edges):
                if pos in crossing.outgoing:
                    edges.append(copy_id(e, j))
                else:
                    edges.append(copy_id(e, j - d.ray_winding[e]))
            crossings.append((tuple(edges), crossing.sign))

    parity: Dict[int, int] = {}
    winding: Dict[int, int] = {}
    edge_perm: Dict[int, int] = {}
    for e in d.edges:
        for j in range(p):
            w = (j + d.ray_winding[e]) // p
            winding[copy_id(e, j)] = w
            parity[copy_id(e, j)] = w % 2
            edge_perm[copy_id(e, j)] = copy_id(e, j + 1)

    loops: List[int] = []
    loop_perm: List[int] = []
    for bit in d.free_loops:
        if bit == 1:
            loop_perm.append(len(loops))
            loops.append(1)
        else:
            start = len(loops)
            for j in range(p):
                loop_perm.append(start + (j + 1) % p)
                loops.append(0)

    symmetry = PeriodicSymmetry(
        order=p,
        crossing_perm=tuple(c * p + (j + 1) % p for c in range(d.n) for j in range(p)),
        edge_perm=edge_perm,
        loop_perm=tuple(loop_perm),
    )
    lifted = build_diagram(crossings, loops, parity, winding, symmetry)
    logger.info({"message": "Built lift", "degree": p, "crossings": lifted.n})
    return lifted, symmetry


def braid_period(word: Sequence[int]) -> int:
    """Largest m such that the word is an m-th power"""
    n = len(word)
    for m in range(n, 1, -1):
        if n % m == 0 and list(word) == list(word[: n // m]) * m:
            return m
    return 1


def braid_closure(
    strands: int,
    word: Sequence[int],
    periodic: bool = False,
    period: Optional[int] = None,
) -> AnnularDiagram:
    """
    Annular diagram of the closure of a braid around the axis

    Parameters:
        strands: number of strands
        word: letters +-i for the generator sigma_i and its inverse, 1 <= i < strands
        periodic: attach the rotation symmetry of a braid power
        period: the power m; inferred as the largest possible one when omitted
    """
    try:
        BraidRecord(strands=strands, word=list(word))
    except ValidationError as e:
        raise DiagramError(f"Malformed braid: {e}")
    current = list(range(1, strands + 1))
    next_id = strands + 1
    raw: List[Tuple[List[int], int]] = []
    tails: Dict[int, Tuple[int, int]] = {}
    for idx, letter in enumerate(word):
        i = abs(letter) - 1
        e_i, e_j = current[i], current[i + 1]
        f_i, f_j = next_id, next_id + 1
        next_id += 2
        if letter > 0:
            raw.append(([e_j, f_j, f_i, e_i], 1))
        else:
            raw.append(([e_i, e_j, f_j, f_i], -1))
        current[i], current[i + 1] = f_i, f_j
        tails[f_i] = (idx, i)
        tails[f_j] = (idx, i + 1)

    rename = {}
    loops = []
    for pos, final in enumerate(current):
        if final == pos + 1:
            loops.append(1)
        else:
            rename[final] = pos + 1
    used = sorted({rename.get(e, e) for edges, _ in raw for e in edges})
    compact = {e: i + 1 for i, e in enumerate(used)}

    def relabel(e: int) -> int:
        return compact[rename.get(e, e)]

    crossings = [(tuple(relabel(e) for e in edges), sign) for edges, sign in raw]
    closing = {compact[pos + 1] for pos in range(strands) if (pos + 1) in compact}
    parity = {e: (1 if e in closing else 0) for e in compact.values()}

    symmetry = None
    if periodic:
        m = period or braid_period(word)
        n = len(word)
        if m < 2 or n % m or list(word) != list(word[: n // m]) * m:
            raise DiagramError(f"Braid word is not a power of order {m}")
        shift = n // m
        tail_of = {relabel(e): tail for e, tail in tails.items()}
        edge_at = {tail: e for e, tail in tail_of.items()}
        edge_perm = {e: edge_at[((c + shift) % n, slot)] for e, (c, slot) in tail_of.items()}
        symmetry = PeriodicSymmetry(
            order=m,
            crossing_perm=tuple((c + shift) % n for c in range(n)),
            edge_perm=edge_perm,
            loop_perm=tuple(range(len(loops))),
        )
    # closed braids wind positively around the axis
    return build_diagram(crossings, loops, parity, parity, symmetry)


@dataclass(frozen=True)
class Isomorphism:
    crossing_map: Tuple[int, ...]
    edge_map: Mapping[int, int] = field(hash=False)
    loop_map: Tuple[int, ...] = ()


def find_isomorphism(
    a: AnnularDiagram,
    b: AnnularDiagram,
    sample_bound: Optional[int] = None,
) -> Optional[Isomorphism]:
    """
    Relabeling of a onto b, or None

    Crossing tuples must match position by position and signs must agree. Ray
    parities may differ, but every resolution circle must keep its triviality class.
    """
    if sample_bound is None:
        sample_bound = get_settings().symmetry_sample_bound
    if a.n != b.n or len(a.edges) != len(b.edges):
        return None
    if sorted(a.free_loops) != sorted(b.free_loops):
        return None
    if sorted(c.sign for c in a.crossings) != sorted(c.sign for c in b.crossings):
        return None

    loop_map = []
    for bit in a.free_loops:
        candidates = [j for j, other in enumerate(b.free_loops) if other == bit and j not in loop_map]
        loop_map.append(candidates[0])
    vertices = _check_vertices(a.n, sample_bound)

    def other_slot(d: AnnularDiagram, e: int, slot: Tuple[int, int]) -> Tuple[int, int]:
        first, second = d.edge_slots[e]
        return second if first == slot else first

    def propagate(cmap: Dict[int, int], emap: Dict[int, int], start: int, image: int) -> bool:
        queue = [(start, image)]
        used = set(cmap.values())
        while queue:
            c, c2 = queue.pop()
            if c in cmap:
                if cmap[c] != c2:
                    return False
                continue
            if c2 in used or a.crossings[c].sign != b.crossings[c2].sign:
                return False
            cmap[c] = c2
            used.add(c2)
            for pos in range(4):
                e, e2 = a.crossings[c].edges[pos], b.crossings[c2].edges[pos]
                if e in emap:
                    if emap[e] != e2:
                        return False
                    continue
                if e2 in emap.values():
                    return False
                emap[e] = e2
                nc, npos = other_slot(a, e, (c, pos))
                nc2, npos2 = other_slot(b, e2, (c2, pos))
                if npos != npos2:
                    return False
                queue.append((nc, nc2))
        return True

    def circles_agree(cmap: Dict[int, int], emap: Dict[int, int]) -> bool:
        for v in vertices:
            w = [0] * a.n
            for c, bit in enumerate(v):
                w[cmap[c]] = bit
            owner = {m: circle for circle in trace_circles(b, tuple(w)) for m in circle.members}
            for circle in trace_circles(a, v):
                first = circle.members[0]
                if first not in a.ray_parity:
                    continue
                image = owner[emap[first]]
                if image.trivial != circle.trivial or set(image.members) != {emap[x] for x in circle.members}:
                    return False
        return True

    def search(cmap: Dict[int, int], emap: Dict[int, int]) -> Optional[Isomorphism]:
        pending = [c for c in range(a.n) if c not in cmap]
        if not pending:
            if circles_agree(cmap, emap):
                return Isomorphism(tuple(cmap[c] for c in range(a.n)), dict(emap), tuple(loop_map))
            return None
        start = pending[0]
        taken = set(cmap.values())
        for image in range(b.n):
            if image in taken:
                continue
            trial_c, trial_e = dict(cmap), dict(emap)
            if propagate(trial_c, trial_e, start, image):
                found = search(trial_c, trial_e)
                if found is not None:
                    return found
        return None

    return search({}, {})
