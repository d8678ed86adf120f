from collections import Counter

import pytest

from app.diagram import quotient_diagram
from app.resolution import (
    MINUS,
    PLUS,
    Arc,
    circle_counts,
    generators,
    labeled,
    lift_generator,
    resolve,
    surgery_surface,
    tqft_images,
)


def grading_counts(d):
    return Counter((g.i, g.q, g.k) for g in generators(d))


def test_hopf_quotient_generators(hopf_quotient):
    assert grading_counts(hopf_quotient) == Counter({
        (0, 3, 2): 1,
        (0, 1, 0): 2,
        (0, -1, -2): 1,
        (1, 3, 0): 1,
        (1, 1, 0): 1,
    })


def test_hopf2_generators(hopf2):
    assert grading_counts(hopf2) == Counter({
        (0, 4, 2): 1,
        (0, 2, 0): 2,
        (0, 0, -2): 1,
        (1, 4, 0): 2,
        (1, 2, 0): 2,
        (2, 6, 0): 1,
        (2, 4, 0): 2,
        (2, 2, 0): 1,
    })


def test_generator_order(hopf_quotient):
    names = [str(g) for g in generators(hopf_quotient)]
    assert names == ["0:++", "0:+-", "0:-+", "0:--", "1:+", "1:-"]


def test_resolve_arcs(hopf2):
    cfg = resolve(hopf2, (0, 0))
    assert cfg.circle_ids == (1, 2)
    assert cfg.arcs == (Arc(0, (1, 2)), Arc(1, (1, 2)))
    assert circle_counts(cfg) == (2, 0)
    assert resolve(hopf2, (1, 1)).arcs == ()
    assert circle_counts(resolve(hopf2, (1, 1))) == (0, 2)


def test_resolve_checks_length(hopf2):
    with pytest.raises(ValueError):
        resolve(hopf2, (0,))


def test_split_images(hopf2):
    src, dst = resolve(hopf2, (1, 0)), resolve(hopf2, (1, 1))
    assert tqft_images(src, dst, 1, {1: PLUS}) == [{1: PLUS, 2: MINUS}, {1: MINUS, 2: PLUS}]
    assert tqft_images(src, dst, 1, {1: MINUS}) == [{1: MINUS, 2: MINUS}]


def test_merge_images(hopf2):
    src, dst = resolve(hopf2, (0, 0)), resolve(hopf2, (1, 0))
    assert tqft_images(src, dst, 0, {1: PLUS, 2: PLUS}) == [{1: PLUS}]
    assert tqft_images(src, dst, 0, {1: PLUS, 2: MINUS}) == [{1: MINUS}]
    assert tqft_images(src, dst, 0, {1: MINUS, 2: PLUS}) == [{1: MINUS}]
    assert tqft_images(src, dst, 0, {1: MINUS, 2: MINUS}) == []


def test_ladybug_surface(unlink2):
    cfg = resolve(unlink2, (0, 0))
    assert len(cfg.circles) == 1
    assert len(cfg.arcs) == 2
    full = surgery_surface(cfg)
    assert full.genera == ((1, 1, 1),)
    half = surgery_surface(cfg, order=(1, 0), upto=1)
    assert half.genera == ((0, 1, 2),)
    assert half.components[0].arcs == (1,)


def test_surface_rejects_bad_order(unlink2):
    cfg = resolve(unlink2, (0, 0))
    with pytest.raises(ValueError):
        surgery_surface(cfg, order=(0, 0))


def test_merge_surface_is_a_pair_of_pants(hopf2):
    surface = surgery_surface(resolve(hopf2, (0, 0)), upto=1)
    assert surface.genera == ((0, 2, 1),)


def test_lift_generator(hopf2):
    quotient, maps = quotient_diagram(hopf2)
    top = labeled(resolve(quotient, (0,)), (PLUS, PLUS))
    lifted = lift_generator(top, quotient, hopf2, maps)
    assert (lifted.v, lifted.labels) == ((0, 0), (PLUS, PLUS))
    assert (lifted.i, lifted.q, lifted.k) == (0, 4, 2)

    mixed = lift_generator(labeled(resolve(quotient, (0,)), (PLUS, MINUS)), quotient, hopf2, maps)
    assert mixed.labels == (PLUS, MINUS)
    assert (mixed.q, mixed.k) == (2, 0)

    high = lift_generator(labeled(resolve(quotient, (1,)), (PLUS,)), quotient, hopf2, maps)
    assert high.v == (1, 1)
    assert (high.i, high.q, high.k) == (2, 6, 0)
