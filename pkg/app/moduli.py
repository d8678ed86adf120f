"""
Decorated resolution configurations and the two ways of counting their moduli.

A decorated configuration starts at a cube vertex v, surgers a set of
0-resolved crossings (its arcs), and carries a labeling of the starting
circles and one of the fully surgered circles. The count of maximal chains in
its labeled poset along a fixed surgery order is compared against the closed
surface evaluation: cap the bottom (+ undotted, - dotted) and the top
(+ dotted, - undotted), then multiply over components: a sphere with one dot
is 1, an undotted torus is 2, anything else is 0.
"""
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations, product
from math import prod
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .config.settings import get_settings
from .core.errors import IndexBoundError, InconsistencyError
from .core.linalg import Field
from .diagram import AnnularDiagram, Vertex
from .homology import khovanov_complex
from .models import CountingReport
from .resolution import (
    MINUS,
    PLUS,
    ResolutionConfig,
    SurfaceComponent,
    flip,
    generators_at,
    resolve,
    surgery_surface,
    tqft_images,
)

logger = logging.getLogger(__name__)

Labels = Tuple[int, ...]


@dataclass(frozen=True)
class DecoratedConfig:
    cfg: ResolutionConfig
    arcs: Tuple[int, ...]
    start: Labels
    end: Labels

    def __post_init__(self):
        zeros = {arc.crossing for arc in self.cfg.arcs}
        if len(set(self.arcs)) != len(self.arcs) or not set(self.arcs) <= zeros:
            raise ValueError(f"Arcs {self.arcs} are not distinct 0-resolved crossings of {self.cfg.v}")
        if len(self.start) != len(self.cfg.circles):
            raise ValueError("Start labeling does not cover the starting circles")
        if len(self.end) != len(self.top.circles):
            raise ValueError("End labeling does not cover the surgered circles")

    @property
    def index(self) -> int:
        return len(self.arcs)

    @cached_property
    def top(self) -> ResolutionConfig:
        return resolve(self.cfg.diagram, flip(self.cfg.v, self.arcs))

    def surface(self) -> Tuple[SurfaceComponent, ...]:
        position = {arc.crossing: i for i, arc in enumerate(self.cfg.arcs)}
        chosen = [position[c] for c in self.arcs]
        rest = [i for i in range(len(self.cfg.arcs)) if i not in set(chosen)]
        return surgery_surface(self.cfg, chosen + rest, upto=len(chosen)).components

    def __str__(self) -> str:
        def signs(labels: Labels) -> str:
            return "".join("+" if x == PLUS else "-" for x in labels)

        bits = "".join(map(str, self.cfg.v))
        return f"{bits}{list(self.arcs)}:{signs(self.start)}->{signs(self.end)}"


def decorated(d: AnnularDiagram, v: Vertex, arcs: Sequence[int], start: Sequence[int], end: Sequence[int]) -> DecoratedConfig:
    return DecoratedConfig(resolve(d, v), tuple(arcs), tuple(start), tuple(end))


PosetElement = Tuple[Tuple[int, ...], Labels]


@dataclass(frozen=True)
class ConfigPoset:
    """Labeled configurations between (D, start) and (top, end); covers are index-1 moves"""
    elements: Tuple[PosetElement, ...]
    covers: Tuple[Tuple[int, int], ...] = field(repr=False)

    @property
    def empty(self) -> bool:
        return not self.elements

    @property
    def middle(self) -> Tuple[PosetElement, ...]:
        return self.elements[1:-1]

    def maximal_chains(self) -> int:
        if self.empty:
            return 0
        paths = [0] * len(self.elements)
        paths[0] = 1
        for a, b in self.covers:
            paths[b] += paths[a]
        return paths[-1]


def _check_index(index: int, bound: Optional[int]) -> None:
    bound = bound if bound is not None else get_settings().poset_index_bound
    if index > bound:
        raise IndexBoundError(f"Configuration index {index} exceeds the bound {bound}")


def build_poset(dc: DecoratedConfig, index_bound: Optional[int] = None) -> ConfigPoset:
    """
    Every labeled intermediate configuration on some chain from the start to the end

    Elements are sorted by (#surgered arcs, arcs, labels), so the start is first
    and the end is last; covers point upwards.
    """
    _check_index(dc.index, index_bound)
    d = dc.cfg.diagram
    configs: Dict[Tuple[int, ...], ResolutionConfig] = {(): dc.cfg}

    def config(arcs: Tuple[int, ...]) -> ResolutionConfig:
        if arcs not in configs:
            configs[arcs] = resolve(d, flip(dc.cfg.v, arcs))
        return configs[arcs]

    start: PosetElement = ((), dc.start)
    up: Dict[PosetElement, List[PosetElement]] = {}
    layer = {start}
    for _ in range(dc.index):
        following = set()
        for arcs, labels in layer:
            src = config(arcs)
            moves = []
            for c in dc.arcs:
                if c in arcs:
                    continue
                upper = tuple(sorted(arcs + (c,)))
                dst = config(upper)
                images = tqft_images(src, dst, c, dict(zip(src.circle_ids, labels)))
                targets = [(upper, tuple(image[cid] for cid in dst.circle_ids)) for image in images]
                if len(set(targets)) != len(targets):
                    raise InconsistencyError(f"Index-1 move at crossing {c} has a moduli space with more than one point")
                moves.extend(targets)
            up[(arcs, labels)] = moves
            following.update(moves)
        layer = following

    end: PosetElement = (tuple(sorted(dc.arcs)), dc.end)
    if end not in layer:
        return ConfigPoset((), ())
    alive = {end}
    for element in sorted(up, key=lambda e: -len(e[0])):
        if any(t in alive for t in up[element]):
            alive.add(element)
    elements = tuple(sorted(alive, key=lambda e: (len(e[0]), e)))
    position = {e: i for i, e in enumerate(elements)}
    covers = tuple(
        (position[a], position[b])
        for a in elements if a in up
        for b in up[a] if b in position
    )
    return ConfigPoset(elements, tuple(sorted(covers)))


def _chains_along(dc: DecoratedConfig, order: Sequence[int]) -> int:
    d = dc.cfg.diagram
    src = dc.cfg
    counts: Dict[Labels, int] = {dc.start: 1}
    done: List[int] = []
    for c in order:
        done.append(c)
        dst = resolve(d, flip(dc.cfg.v, done))
        step: Dict[Labels, int] = {}
        for labels, count in counts.items():
            for image in tqft_images(src, dst, c, dict(zip(src.circle_ids, labels))):
                key = tuple(image[cid] for cid in dst.circle_ids)
                step[key] = step.get(key, 0) + count
        counts, src = step, dst
    return counts.get(dc.end, 0)


def count_pi0_chains(
    dc: DecoratedConfig,
    z: Optional[Sequence[int]] = None,
    order_check_index: Optional[int] = None,
) -> int:
    """
    Maximal chains of the poset restricted to the surgery order z

    Parameters:
        dc: decorated configuration
        z: order in which dc.arcs are surgered (defaults to dc.arcs as given)
        order_check_index: compare against every other order up to this index
    """
    z = tuple(z) if z is not None else dc.arcs
    if sorted(z) != sorted(dc.arcs):
        raise ValueError(f"{z} is not an ordering of the arcs {dc.arcs}")
    count = _chains_along(dc, z)
    bound = order_check_index if order_check_index is not None else get_settings().order_check_index
    if dc.index <= bound:
        for other in permutations(dc.arcs):
            if _chains_along(dc, other) != count:
                raise InconsistencyError(f"Chain count of {dc} depends on the surgery order ({z} vs {other})")
    return count


def _component_value(component: SurfaceComponent, start: Mapping[int, int], end: Mapping[int, int]) -> int:
    dots = sum(1 for c in component.bottom if start[c] == MINUS) + sum(1 for c in component.top if end[c] == PLUS)
    if component.genus == 0 and dots == 1:
        return 1
    if component.genus == 1 and dots == 0:
        return 2
    return 0


def _k(circles: Sequence[int], labels: Mapping[int, int], trivial: Mapping[int, bool]) -> int:
    return sum(labels[c] for c in circles if not trivial[c])


def theta(dc: DecoratedConfig) -> int:
    start = dict(zip(dc.cfg.circle_ids, dc.start))
    end = dict(zip(dc.top.circle_ids, dc.end))
    return prod(_component_value(component, start, end) for component in dc.surface())


def annular_theta(dc: DecoratedConfig) -> int:
    """theta, with every component whose nontrivial boundary changes k set to zero"""
    start = dict(zip(dc.cfg.circle_ids, dc.start))
    end = dict(zip(dc.top.circle_ids, dc.end))
    value = 1
    for component in dc.surface():
        if _k(component.bottom, start, dc.cfg.trivial) != _k(component.top, end, dc.top.trivial):
            return 0
        value *= _component_value(component, start, end)
    return value


def genus_one_components(dc: DecoratedConfig) -> int:
    return sum(1 for component in dc.surface() if component.genus == 1)


def split_components(dc: DecoratedConfig) -> List[DecoratedConfig]:
    """
    One configuration per surface component, surgering only that component's arcs

    The circles outside a piece keep their starting labels.
    """
    start = dict(zip(dc.cfg.circle_ids, dc.start))
    end = dict(zip(dc.top.circle_ids, dc.end))
    pieces = []
    for component in dc.surface():
        arcs = tuple(c for c in dc.arcs if c in component.arcs)
        top = resolve(dc.cfg.diagram, flip(dc.cfg.v, arcs))
        labels = {**start, **{c: end[c] for c in component.top}}
        pieces.append(DecoratedConfig(dc.cfg, arcs, dc.start, tuple(labels[c] for c in top.circle_ids)))
    return pieces


def enumerate_configs(d: AnnularDiagram, max_index: int, min_index: int = 1) -> Iterator[DecoratedConfig]:
    """Every decorated configuration of d with min_index <= index <= max_index"""
    for v in product((0, 1), repeat=d.n):
        cfg = resolve(d, v)
        zeros = [arc.crossing for arc in cfg.arcs]
        for size in range(min_index, min(max_index, len(zeros)) + 1):
            for arcs in combinations(zeros, size):
                top = resolve(d, flip(v, arcs))
                for start in product((PLUS, MINUS), repeat=len(cfg.circles)):
                    for end in product((PLUS, MINUS), repeat=len(top.circles)):
                        yield DecoratedConfig(cfg, arcs, start, end)


def sample_configs(d: AnnularDiagram, count: int, max_index: int, seed: int = 0) -> Iterator[DecoratedConfig]:
    """
    count seeded random decorated configurations of d with index in 1..max_index

    Half of the end labelings are drawn from the labelings reachable along the
    arcs, so that nonzero moduli are well represented.
    """
    if not d.n:
        raise ValueError("A diagram without crossings has no decorated configurations")
    rng = random.Random(seed)
    emitted = 0
    while emitted < count:
        cfg = resolve(d, tuple(rng.randint(0, 1) for _ in range(d.n)))
        zeros = [arc.crossing for arc in cfg.arcs]
        if not zeros:
            continue
        arcs = tuple(rng.sample(zeros, rng.randint(1, min(max_index, len(zeros)))))
        start = tuple(rng.choice((PLUS, MINUS)) for _ in cfg.circles)
        top = resolve(d, flip(cfg.v, arcs))
        reachable = _reachable(cfg, arcs, start) if rng.random() < 0.5 else []
        if reachable:
            end = rng.choice(reachable)
        else:
            end = tuple(rng.choice((PLUS, MINUS)) for _ in top.circles)
        emitted += 1
        yield DecoratedConfig(cfg, arcs, start, end)


def _reachable(cfg: ResolutionConfig, arcs: Sequence[int], start: Labels) -> List[Labels]:
    d = cfg.diagram
    src, layer, done = cfg, {start}, []
    for c in arcs:
        done.append(c)
        dst = resolve(d, flip(cfg.v, done))
        layer = {
            tuple(image[cid] for cid in dst.circle_ids)
            for labels in layer
            for image in tqft_images(src, dst, c, dict(zip(src.circle_ids, labels)))
        }
        src = dst
    return sorted(layer)


def index_one_consistency(d: AnnularDiagram) -> List[str]:
    """Index-1 theta values against the entries of the differential over Q; returns the mismatches"""
    cx = khovanov_complex(d, Field(0))
    entries: Dict[Tuple[tuple, tuple], int] = {}
    for block in cx.blocks.values():
        for i, elems in block.basis.items():
            following = block.basis.get(i + 1, ())
            for x, image in zip(elems, block.images(i)):
                for j, value in image.items():
                    entries[(x.key, following[j].key)] = abs(value)

    mismatches = []
    for v in product((0, 1), repeat=d.n):
        cfg = resolve(d, v)
        for arc in cfg.arcs:
            top = resolve(d, flip(v, [arc.crossing]))
            for x in generators_at(cfg):
                for y in generators_at(top):
                    dc = DecoratedConfig(cfg, (arc.crossing,), x.labels, y.labels)
                    expected = entries.get((x.key, y.key), 0)
                    if theta(dc) != expected:
                        mismatches.append(f"{dc}: theta {theta(dc)}, differential {expected}")
    return mismatches


def verify_counting(
    d: AnnularDiagram, max_index: int = 5, samples: Optional[int] = None, seed: int = 0
) -> CountingReport:
    """
    Compare chain counts with theta on every decorated configuration of d up to max_index

    With samples set, only that many seeded random configurations are checked.

    Also checks the power-of-two law, the product law over split pieces,
    annular_theta against theta, and the index-1 differential consistency.
    """
    _check_index(max_index, None)
    histogram: Dict[int, int] = {}
    mismatches: List[str] = []
    configs = nonzero = 0
    configs_iter = enumerate_configs(d, max_index) if samples is None else sample_configs(d, samples, max_index, seed)
    for dc in configs_iter:
        configs += 1
        chains = count_pi0_chains(dc)
        value = theta(dc)
        histogram[value] = histogram.get(value, 0) + 1
        if chains != value:
            mismatches.append(f"{dc}: chains {chains}, theta {value}")
        if value:
            nonzero += 1
            if value != 2 ** genus_one_components(dc):
                mismatches.append(f"{dc}: theta {value} breaks the genus law")
        if prod(theta(piece) for piece in split_components(dc)) != value:
            mismatches.append(f"{dc}: theta is not the product over components")
        balanced = _k(dc.cfg.circle_ids, dict(zip(dc.cfg.circle_ids, dc.start)), dc.cfg.trivial) == _k(
            dc.top.circle_ids, dict(zip(dc.top.circle_ids, dc.end)), dc.top.trivial
        )
        if annular_theta(dc) != (value if balanced else 0):
            mismatches.append(f"{dc}: annular theta disagrees with theta")
    mismatches.extend(index_one_consistency(d))
    logger.info({"message": "Counting sweep", "configs": configs, "nonzero": nonzero, "mismatches": len(mismatches)})
    return CountingReport(
        max_index=max_index,
        configs=configs,
        nonzero=nonzero,
        theta_histogram=dict(sorted(histogram.items())),
        mismatches=mismatches,
        verdict="fail" if mismatches else "pass",
    )
