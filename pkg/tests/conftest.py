import random
from pathlib import Path
from typing import List, Tuple

import pytest

from app.config.settings import get_settings
from app.core.unionfind import UnionFind
from app.diagram import AnnularDiagram, braid_closure, build_diagram, lift_diagram, parse_diagram

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def load(name: str) -> AnnularDiagram:
    return parse_diagram((CORPUS / f"{name}.json").read_text(encoding="utf-8"))


def components(d: AnnularDiagram) -> List[List[int]]:
    """Edge sets of the link components"""
    uf = UnionFind(d.edges)
    for crossing in d.crossings:
        a, b, c, e = crossing.edges
        uf.union(a, c)
        uf.union(b, e)
    return uf.groups()


def reverse_component(d: AnnularDiagram, edge: int) -> AnnularDiagram:
    """d with the orientation of the component through edge reversed; windings change sign on it"""
    flipped = next(set(group) for group in components(d) if edge in group)
    crossings = []
    for crossing in d.crossings:
        a, b, c, e = crossing.edges
        under, over = a in flipped, b in flipped
        edges = (c, e, a, b) if under else (a, b, c, e)
        sign = crossing.sign if under == over else -crossing.sign
        crossings.append((edges, sign))
    winding = {e: -w if e in flipped else w for e, w in d.ray_winding.items()}
    return build_diagram(crossings, d.free_loops, d.ray_parity, winding)


def random_periodic_diagrams(
    seed: int, count: int, max_crossings: int = 10, reverse: bool = False
) -> List[Tuple[AnnularDiagram, int, AnnularDiagram]]:
    """
    (lift, p, base) triples: p-fold lifts of random braid closures

    With reverse set, each component of a base is reversed with probability 1/2,
    which gives antiparallel strands and negative windings.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        strands = rng.choice([2, 3])
        p = rng.choice([2, 3])
        length = rng.randint(1, max_crossings // p)
        word = [rng.choice([1, -1]) * rng.randint(1, strands - 1) for _ in range(length)]
        base = braid_closure(strands, word)
        if reverse:
            for group in components(base):
                if rng.random() < 0.5:
                    base = reverse_component(base, group[0])
        lifted, _ = lift_diagram(base, p)
        out.append((lifted, p, base))
    return out


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def hopf2() -> AnnularDiagram:
    return load("hopf2")


@pytest.fixture
def hopf_quotient() -> AnnularDiagram:
    return load("hopf-quotient")


@pytest.fixture
def trefoil() -> AnnularDiagram:
    return load("trefoil-3periodic")


@pytest.fixture
def unlink2() -> AnnularDiagram:
    return load("unlink2")


@pytest.fixture
def unknot() -> AnnularDiagram:
    return load("unknot")
