import pytest

from app.core.errors import IndexBoundError
from app.moduli import (
    annular_theta,
    build_poset,
    count_pi0_chains,
    decorated,
    enumerate_configs,
    genus_one_components,
    index_one_consistency,
    sample_configs,
    split_components,
    theta,
    verify_counting,
)
from app.resolution import MINUS, PLUS
from conftest import random_periodic_diagrams


@pytest.fixture
def ladybug(unlink2):
    return decorated(unlink2, (0, 0), (0, 1), (PLUS,), (MINUS,))


def test_ladybug_poset(ladybug):
    poset = build_poset(ladybug)
    assert len(poset.middle) == 4
    assert poset.elements[0] == ((), (PLUS,))
    assert poset.elements[-1] == ((0, 1), (MINUS,))
    assert poset.maximal_chains() == 4


def test_ladybug_counts(ladybug):
    assert str(ladybug) == "00[0, 1]:+->-"
    assert count_pi0_chains(ladybug) == 2
    assert count_pi0_chains(ladybug, z=(1, 0)) == 2
    assert theta(ladybug) == 2
    assert annular_theta(ladybug) == 2
    assert genus_one_components(ladybug) == 1


def test_ladybug_with_dotted_ends_vanishes(unlink2):
    dc = decorated(unlink2, (0, 0), (0, 1), (MINUS,), (PLUS,))
    assert build_poset(dc).empty
    assert build_poset(dc).maximal_chains() == 0
    assert count_pi0_chains(dc) == 0
    assert theta(dc) == 0


def test_merge_then_split(hopf2):
    dc = decorated(hopf2, (0, 0), (0, 1), (PLUS, PLUS), (PLUS, MINUS))
    assert count_pi0_chains(dc) == theta(dc) == 1
    assert [piece.arcs for piece in split_components(dc)] == [(0, 1)]


def test_annular_theta_needs_balanced_k(hopf2):
    # both starting circles are nontrivial, both final ones trivial
    dc = decorated(hopf2, (0, 0), (0, 1), (PLUS, MINUS), (MINUS, MINUS))
    assert theta(dc) == 1
    assert annular_theta(dc) == 1
    unbalanced = decorated(hopf2, (0, 0), (0, 1), (PLUS, PLUS), (PLUS, MINUS))
    assert annular_theta(unbalanced) == 0


def test_enumerate_configs(hopf2):
    assert sum(1 for _ in enumerate_configs(hopf2, 2)) == 48
    assert sum(1 for _ in enumerate_configs(hopf2, 1)) == 32


def test_index_bound(ladybug):
    with pytest.raises(IndexBoundError):
        build_poset(ladybug, index_bound=1)


def test_arcs_must_be_zero_resolved(hopf2):
    with pytest.raises(ValueError):
        decorated(hopf2, (1, 0), (0,), (PLUS,), (PLUS, PLUS))


def test_chain_order_must_use_the_arcs(ladybug):
    with pytest.raises(ValueError):
        count_pi0_chains(ladybug, z=(0, 0))


def test_index_one_matches_the_differential(hopf2, unlink2, trefoil):
    for d in (hopf2, unlink2, trefoil):
        assert index_one_consistency(d) == []


@pytest.mark.parametrize("name", ["hopf2", "unlink2", "trefoil"])
def test_counting_sweep(name, request):
    d = request.getfixturevalue(name)
    report = verify_counting(d, max_index=3)
    assert report.verdict == "pass", report.mismatches[:5]
    assert set(report.theta_histogram) <= {0, 1, 2}
    assert report.nonzero > 0


def test_sampled_configs(trefoil):
    sampled = list(sample_configs(trefoil, 50, max_index=2, seed=3))
    assert len(sampled) == 50
    assert all(1 <= dc.index <= 2 for dc in sampled)
    assert [str(dc) for dc in sample_configs(trefoil, 50, max_index=2, seed=3)] == [str(dc) for dc in sampled]


def test_randomized_counting_sweep(monkeypatch):
    monkeypatch.setenv("PERKH_ORDER_CHECK_INDEX", "3")
    triples = random_periodic_diagrams(seed=11, count=10, max_crossings=8, reverse=True)
    diagrams = [d for lifted, _, base in triples for d in (lifted, base)]
    configs, histogram = 0, {}
    for seed, d in enumerate(diagrams):
        assert d.n <= 8
        report = verify_counting(d, max_index=5, samples=500, seed=seed)
        assert report.verdict == "pass", report.mismatches[:5]
        configs += report.configs
        for value, n in report.theta_histogram.items():
            histogram[value] = histogram.get(value, 0) + n
    assert configs >= 10_000
    assert set(histogram) <= {0, 1, 2, 4}
    assert histogram.get(1) and histogram.get(2)
