"""
The cube of resolutions: circles, labeled generators, TQFT moves and surgery surfaces.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .core.errors import InconsistencyError
from .core.unionfind import UnionFind
from .diagram import AnnularDiagram, OrbitMaps, Vertex, trace_circles

logger = logging.getLogger(__name__)

PLUS, MINUS = 1, -1


@dataclass(frozen=True)
class Circle:
    id: int
    edges: Tuple[int, ...]
    trivial: bool


@dataclass(frozen=True)
class Arc:
    """Surgery arc at a 0-resolved crossing, touching the circles of its two strands"""
    crossing: int
    circles: Tuple[int, int]


@dataclass(frozen=True)
class ResolutionConfig:
    v: Vertex
    circles: Tuple[Circle, ...]
    arcs: Tuple[Arc, ...]
    diagram: AnnularDiagram = field(compare=False, repr=False)

    @cached_property
    def circle_ids(self) -> Tuple[int, ...]:
        return tuple(c.id for c in self.circles)

    @cached_property
    def owner(self) -> Dict[int, int]:
        """Edge or loop id -> id of the circle through it"""
        return {e: c.id for c in self.circles for e in c.edges}

    @cached_property
    def trivial(self) -> Dict[int, bool]:
        return {c.id: c.trivial for c in self.circles}

    def circle_of(self, member: int) -> int:
        return self.owner[member]


def resolve(d: AnnularDiagram, v: Vertex) -> ResolutionConfig:
    """
    Resolve every crossing of d according to v

    Parameters:
        d: the diagram
        v: resolution vector, one bit per crossing
    """
    if len(v) != d.n:
        raise ValueError(f"Resolution vector has {len(v)} bits, diagram has {d.n} crossings")
    circles = tuple(Circle(c.id, c.members, c.trivial) for c in trace_circles(d, tuple(v)))
    owner = {e: c.id for c in circles for e in c.edges}
    arcs = tuple(
        Arc(i, (owner[crossing.edges[0]], owner[crossing.edges[2]]))
        for i, (crossing, bit) in enumerate(zip(d.crossings, v))
        if bit == 0
    )
    return ResolutionConfig(tuple(v), circles, arcs, d)


def circle_counts(cfg: ResolutionConfig) -> Tuple[int, int]:
    """(nontrivial, trivial) circle counts"""
    trivial = sum(1 for c in cfg.circles if c.trivial)
    return len(cfg.circles) - trivial, trivial


@dataclass(frozen=True)
class LabeledGenerator:
    v: Vertex
    circles: Tuple[int, ...]
    labels: Tuple[int, ...]
    i: int
    q: int
    k: int

    @property
    def key(self) -> Tuple[Vertex, Tuple[int, ...]]:
        return self.v, self.labels

    @property
    def label_map(self) -> Dict[int, int]:
        return dict(zip(self.circles, self.labels))

    def __str__(self) -> str:
        bits = "".join(map(str, self.v))
        signs = "".join("+" if x > 0 else "-" for x in self.labels)
        return f"{bits}:{signs}"


def gradings(cfg: ResolutionConfig, labels: Sequence[int], n_plus: int, n_minus: int) -> Tuple[int, int, int]:
    """(i, q, k) of the labeling ``labels`` of cfg's circles"""
    height = sum(cfg.v)
    i = height - n_minus
    q = sum(labels) + height + n_plus - 2 * n_minus
    k = sum(x for c, x in zip(cfg.circles, labels) if not c.trivial)
    return i, q, k


def labeled(cfg: ResolutionConfig, labels: Sequence[int]) -> LabeledGenerator:
    d = cfg.diagram
    i, q, k = gradings(cfg, labels, d.n_plus, d.n_minus)
    return LabeledGenerator(cfg.v, cfg.circle_ids, tuple(labels), i, q, k)


def generators_at(cfg: ResolutionConfig) -> List[LabeledGenerator]:
    return [labeled(cfg, labels) for labels in product((PLUS, MINUS), repeat=len(cfg.circles))]


def generators(d: AnnularDiagram) -> List[LabeledGenerator]:
    """
    All labeled generators of the cube of d

    Ordered by v lexicographically, then by labels with + before - in circle id order.
    """
    result: List[LabeledGenerator] = []
    for v in product((0, 1), repeat=d.n):
        result.extend(generators_at(resolve(d, v)))
    return result


def tqft_images(
    src: ResolutionConfig,
    dst: ResolutionConfig,
    crossing: int,
    labels: Mapping[int, int],
) -> List[Dict[int, int]]:
    """
    Merge/split images of a labeling across the cube edge that flips ``crossing``

    Merge: ++ -> +, +- and -+ -> -, -- -> 0. Split: + -> (+,-) + (-,+), - -> (-,-).
    Circles away from the crossing keep their ids and labels.
    """
    a, b, c, _ = src.diagram.crossings[crossing].edges
    first, second = src.circle_of(a), src.circle_of(c)
    passive = {cid: x for cid, x in labels.items() if cid not in (first, second)}
    if first != second:
        la, lc = labels[first], labels[second]
        if la == MINUS and lc == MINUS:
            return []
        merged = dict(passive)
        merged[dst.circle_of(a)] = PLUS if la == PLUS and lc == PLUS else MINUS
        return [merged]
    left, right = dst.circle_of(a), dst.circle_of(b)
    if left == right:
        raise InconsistencyError(f"Surgery at crossing {crossing} neither merges nor splits")
    if labels[first] == PLUS:
        return [{**passive, left: PLUS, right: MINUS}, {**passive, left: MINUS, right: PLUS}]
    return [{**passive, left: MINUS, right: MINUS}]


def flip(v: Vertex, positions) -> Vertex:
    w = list(v)
    for pos in positions:
        w[pos] = 1 - w[pos]
    return tuple(w)


@dataclass(frozen=True)
class SurfaceComponent:
    genus: int
    bottom: Tuple[int, ...]
    top: Tuple[int, ...]
    arcs: Tuple[int, ...]


@dataclass(frozen=True)
class SurgerySurface:
    components: Tuple[SurfaceComponent, ...]
    order: Tuple[int, ...]

    @property
    def genera(self) -> Tuple[Tuple[int, int, int], ...]:
        """Order-independent summary: sorted (genus, #bottom, #top) per component"""
        return tuple(sorted((c.genus, len(c.bottom), len(c.top)) for c in self.components))


def surgery_surface(
    cfg: ResolutionConfig,
    order: Optional[Sequence[int]] = None,
    upto: Optional[int] = None,
) -> SurgerySurface:
    """
    Trace surface of surgering cfg's arcs

    Parameters:
        cfg: the starting configuration
        order: permutation of arc indices (cfg.arcs positions); defaults to the natural order
        upto: surger only the first ``upto`` arcs of the order
    """
    if order is None:
        order = tuple(range(len(cfg.arcs)))
    order = tuple(order)
    if sorted(order) != list(range(len(cfg.arcs))):
        raise ValueError("order must be a permutation of the arcs")
    if upto is None:
        upto = len(order)
    if upto > len(order):
        raise ValueError(f"Cannot surger {upto} of {len(order)} arcs")
    d = cfg.diagram
    chosen = [cfg.arcs[i].crossing for i in order[:upto]]
    top = resolve(d, flip(cfg.v, chosen))

    uf = UnionFind(e for circle in cfg.circles for e in circle.edges)
    for circle in cfg.circles:
        for e in circle.edges[1:]:
            uf.union(circle.edges[0], e)
    for c in chosen:
        edges = d.crossings[c].edges
        uf.union(edges[0], edges[2])

    parts: Dict[int, Dict[str, list]] = {}
    for circle in cfg.circles:
        parts.setdefault(uf.find(circle.edges[0]), {"bottom": [], "top": [], "arcs": []})["bottom"].append(circle.id)
    for circle in top.circles:
        parts[uf.find(circle.edges[0])]["top"].append(circle.id)
    for c in chosen:
        parts[uf.find(d.crossings[c].edges[0])]["arcs"].append(c)

    components = []
    for part in parts.values():
        twice_genus = 2 + len(part["arcs"]) - len(part["bottom"]) - len(part["top"])
        if twice_genus < 0 or twice_genus % 2:
            raise InconsistencyError(f"Surface component with Euler data {part} has no integral genus")
        components.append(SurfaceComponent(
            twice_genus // 2,
            tuple(sorted(part["bottom"])),
            tuple(sorted(part["top"])),
            tuple(sorted(part["arcs"])),
        ))
    components.sort(key=lambda comp: comp.bottom[0])
    return SurgerySurface(tuple(components), order)


def lift_vertex(v: Vertex, maps: OrbitMaps) -> Vertex:
    return tuple(v[q] for q in maps.crossing_map)


def lift_generator(
    x: LabeledGenerator,
    quotient: AnnularDiagram,
    lifted: AnnularDiagram,
    maps: OrbitMaps,
) -> LabeledGenerator:
    """
    Symmetric lift of a quotient generator

    Every crossing copies its orbit's bit, and every lifted circle copies the label
    of the quotient circle below it.
    """
    below = resolve(quotient, x.v)
    above = resolve(lifted, lift_vertex(x.v, maps))
    labels = x.label_map
    lifted_labels = []
    for circle in above.circles:
        first = circle.edges[0]
        if first in lifted.ray_parity:
            image = below.circle_of(maps.edge_map[first])
        else:
            image = quotient.loop_ids[maps.loop_map[lifted.loop_ids.index(first)]]
        lifted_labels.append(labels[image])
    return labeled(above, lifted_labels)
