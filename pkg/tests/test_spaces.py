"""Space descriptors: axioms, enumeration order, levels, pairing, oracles."""

import itertools
from fractions import Fraction as F

import pytest

import natspace as ns
from natspace.dots import DyadicInterval as D, Isolated, MAX, Seq
from natspace.spaces import _STD_BUILDERS, baire_rank, baire_unrank

STD_NAMES = sorted(_STD_BUILDERS)


@pytest.mark.parametrize("name", STD_NAMES)
def test_std_space_axioms_depth_60(name):
    report = ns.validate_space(ns.std_space(name), 60)
    assert report.ok, str(report)


def test_product_space_axioms(sigmaR):
    prod = ns.product((sigmaR, sigmaR))
    assert ns.validate_space(prod, 60).ok


def test_extended_space_axioms(ext01):
    assert ns.validate_space(ext01, 120).ok


def test_frozen_enumeration_prefixes(sigma01, sigmaR, ext01):
    assert [sigma01.enumerate_dot(i) for i in range(7)] == [
        D(0, 1), D(0, 2), D(1, 2), D(2, 2), D(0, 3), D(1, 3), D(2, 3),
    ]
    assert [sigmaR.enumerate_dot(i) for i in range(5)] == [
        MAX, D(0, 0), D(1, 0), D(0, 1), D(-1, 0),
    ]
    assert [ext01.enumerate_dot(i) for i in range(4)] == [
        D(0, 1), Isolated(1), D(0, 2), Isolated(2),
    ]


def test_index_of_inverts_enumeration(sigma01):
    for i in range(200):
        assert sigma01.index_of(sigma01.enumerate_dot(i)) == i


def test_unit_fan_level_sizes(sigma01):
    # grade g holds the 2^(g+1)-1 half-overlapping dyadic dots
    for g in range(1, 7):
        assert len(list(sigma01.level(g))) == 2 ** (g + 1) - 1


def test_unit_fan_same_grade_apartness(sigma01):
    # overlapping grid: same-grade dots are apart iff indices differ by >= 3
    lev = list(sigma01.level(2))
    for a, b in itertools.combinations(lev, 2):
        assert sigma01.apart(a, b) == (abs(a.n - b.n) >= 3)


def test_extended_isolated_dots(ext01):
    assert ext01.refines(Isolated(5), Isolated(2))
    assert not ext01.refines(Isolated(2), Isolated(5))
    assert ext01.apart(Isolated(2), D(0, 2))
    assert ext01.is_isolated(Isolated(3))


def test_rational_enum_frozen_prefix():
    assert list(itertools.islice(ns.rational_enum(), 8)) == [
        F(0), F(1), F(1, 2), F(-1), F(1, 3), F(-1, 2), F(2), F(1, 4),
    ]


def test_dense_points_frozen_prefix():
    assert [ns.unit_interval_dense_points(i) for i in range(8)] == [
        F(0), F(1), F(1, 2), F(1, 4), F(3, 4), F(1, 8), F(3, 8), F(5, 8),
    ]


def test_metric_spread_axioms():
    spread = ns.metric_to_spread(
        ns.rational_points_oracle(ns.unit_interval_dense_points)
    )
    assert ns.validate_space(spread, 80).ok


def test_baire_rank_inverts_enumeration(baire):
    for i in range(2000):
        d = baire.enumerate_dot(i)
        assert baire_rank(d) == i
        assert baire_unrank(i) == d


def test_baire_rank_monotone_under_extension(baire):
    for i in range(200):
        d = baire.enumerate_dot(i)
        for s in (0, 1, 5):
            assert baire_rank(Seq(d.syms + (s,))) > baire_rank(d)


def test_baire_rank_large_round_trip():
    r = 10**30
    assert baire_rank(baire_unrank(r)) == r


def test_unknown_space_name_rejected():
    with pytest.raises(ValueError):
        ns.std_space("no_such_space")
