"""Star finiteness, splitting depths, Urysohn separators, the metric."""

from fractions import Fraction as F

import pytest

import natspace as ns
from natspace.dots import DyadicInterval as D, Isolated, Seq
from natspace.metric import MetricDefect

import oracles


def test_star_reports_frozen(sigmaR, sigma01):
    r = ns.is_star_finite(sigmaR, 6)
    assert r.ok and r.max_star == 5 and r.max_per_side == 3
    r = ns.is_star_finite(sigma01, 6)
    assert r.ok and r.max_star == 4 and r.max_per_side == 3


def test_star_set_frozen(sigma01):
    assert set(ns.star_set(sigma01, 1, D(0, 3))) == {D(0, 3), D(1, 3), D(2, 3)}
    # interior dots see both sides
    assert set(ns.star_set(sigma01, 1, D(3, 3))) == {
        D(1, 3), D(2, 3), D(3, 3), D(4, 3), D(5, 3)
    }


def test_star_relation_via_middleman(sigma01):
    # [0,1/4] and [1/4,1/2] connect through [1/8,3/8] in two steps
    assert ns.star_relation(sigma01, 2, D(0, 3), D(2, 3))
    assert not ns.star_relation(sigma01, 1, D(0, 3), D(3, 3))


def test_splitting_depth_frozen(sigma01, cantor_space):
    A, B = (D(0, 3),), (D(6, 3),)
    assert ns.splitting_depth(sigma01, A, B) == 3
    assert not ns.check_splitting(sigma01, A, B, 2)
    assert ns.check_splitting(sigma01, A, B, 3)
    assert ns.splitting_depth(cantor_space, (Seq((0,)),), (Seq((1,)),)) == 1


def test_splitting_depth_matches_oracle(sigma01):
    A, B = (D(0, 3),), (D(6, 3),)
    segsA = [(F(0), F(1, 4))]
    segsB = [(F(3, 4), F(1))]
    assert oracles.splitting_depth_oracle(segsA, segsB) == 3


def test_splitting_requires_apart_sets(sigma01):
    with pytest.raises(MetricDefect):
        ns.splitting_depth(sigma01, (D(0, 3),), (D(1, 3),))


def test_subfan_levels(sigmaR):
    p = ns.rational_to_point(F(1, 3))
    sub = ns.subfan_Wx(sigmaR, p, 6)
    assert [len(lv) for lv in sub.wx_levels] == [1, 5, 6, 7, 8, 9, 10]
    assert ns.validate_space(sub, 7).ok


def test_urysohn_fan_frozen_values(sigma01):
    f = ns.urysohn_fan(sigma01, D(0, 3), D(6, 3), max_level_grade=12)
    pa = ns.canonical_point(sigma01, D(0, 3))
    pb = ns.canonical_point(sigma01, D(6, 3))
    pm = ns.canonical_point(sigma01, D(3, 3))
    assert f.value_bounds(pa, 3, 40) == (F(0), F(1, 27))
    assert f.value_bounds(pb, 3, 40) == (F(26, 27), F(1))
    assert f.value_bounds(pm, 1, 40) == (F(1, 3), F(2, 3))
    assert f.builder.t[:2] == [2, 3]


def test_urysohn_fan_requires_apart_pair(sigma01):
    with pytest.raises(MetricDefect):
        ns.urysohn_fan(sigma01, D(0, 3), D(2, 3))


def test_urysohn_spread_frozen_values(sigmaR):
    g = ns.urysohn_spread(sigmaR, D(0, 1), D(4, 1), depth_budget=2)
    qa = ns.rational_to_point(F(1, 2))
    qb = ns.rational_to_point(F(5, 2))
    qm = ns.rational_to_point(F(3, 2))
    assert g.value_bounds(qa, 2, 40) == (F(0), F(1, 9))
    assert g.value_bounds(qb, 2, 40) == (F(8, 9), F(1))
    assert g.value_bounds(qm, 1, 40) == (F(1, 3), F(2, 3))
    # classification cut off by the depth budget is surfaced, not hidden
    assert len(g.pending()) == 2


def test_pair_stream_frozen_prefix(metric_ev):
    pairs = [metric_ev.pair(m) for m in range(11)]
    assert pairs[0] == (Isolated(1), D(0, 2))
    assert pairs[3] == (Isolated(2), D(0, 3))
    assert pairs[9] == (Isolated(2), D(6, 3))
    assert pairs[10] == (D(0, 3), D(3, 3))
    # the isolated-dot terms come first within each grade
    for m in range(10):
        assert pairs[m][0] in (Isolated(1), Isolated(2))


def test_metric_digit_goals():
    assert [ns.metric_digit_goal(p) for p in (1, 2, 4, 6, 10)] == [2, 3, 4, 6, 8]


def test_metric_frozen_value(metric_ev, ext01):
    x = ns.canonical_point(ext01, D(0, 3))
    y = ns.canonical_point(ext01, D(6, 3))
    lo, hi = ns.evaluate_metric(metric_ev, x, y, 6)
    assert lo == F(107, 192)
    assert hi == F(1799, 2592)
    assert ns.evaluate_metric(metric_ev, y, x, 6) == (lo, hi)


def test_metric_self_distance_contract(metric_ev, ext01):
    x = ns.canonical_point(ext01, D(3, 3))
    lo, hi = ns.evaluate_metric(metric_ev, x, x, 4)
    assert lo == 0
    # the stated width contract holds up to precision 4 (the digit cap)
    assert hi <= F(1, 4)
