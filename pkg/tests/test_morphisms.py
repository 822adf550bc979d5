"""Dot-level morphisms: arithmetic, codecs, line calls, diagonalization."""

import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

import natspace as ns
from natspace.dots import DyadicInterval as D, Seq, endpoints

import oracles

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=32)


def _binary_value(op: str, bits: int, a: F, b: F) -> tuple:
    f = ns.arith(op)
    p = ns.pair_point(ns.rational_to_point(a), ns.rational_to_point(b))
    img = ns.apply_point(f, p)
    return endpoints(ns.approximate(img, bits))


@given(rationals, rationals)
@settings(max_examples=25, deadline=None)
def test_add_matches_rational_oracle(a, b):
    lo, hi = _binary_value("add", 12, a, b)
    assert lo <= a + b <= hi


@given(rationals, rationals)
@settings(max_examples=25, deadline=None)
def test_mul_matches_rational_oracle(a, b):
    lo, hi = _binary_value("mul", 12, a, b)
    assert lo <= a * b <= hi


@given(rationals, rationals)
@settings(max_examples=20, deadline=None)
def test_min_max_match_rational_oracle(a, b):
    lo, hi = _binary_value("min", 12, a, b)
    assert lo <= min(a, b) <= hi
    lo, hi = _binary_value("max", 12, a, b)
    assert lo <= max(a, b) <= hi


@given(rationals)
@settings(max_examples=20, deadline=None)
def test_unary_ops_match_rational_oracle(a):
    for op, val in (("neg", -a), ("abs", abs(a))):
        f = ns.arith(op)
        img = ns.apply_point(f, ns.rational_to_point(a))
        lo, hi = endpoints(ns.approximate(img, 12))
        assert lo <= val <= hi
    f = ns.arith("scalar", F(3, 2))
    img = ns.apply_point(f, ns.rational_to_point(a))
    lo, hi = endpoints(ns.approximate(img, 12))
    assert lo <= a * F(3, 2) <= hi


@pytest.mark.parametrize("op", ["neg", "abs", "add", "mul", "min", "max"])
def test_arith_morphism_laws(op):
    assert ns.check_morphism(ns.arith(op), 40).ok


def test_codec_and_cantor_morphism_laws():
    enc, dec = ns.nary_codec(3)
    assert ns.check_morphism(enc, 60).ok
    assert dec is not None and ns.check_morphism(dec, 60).ok
    assert ns.check_morphism(ns.cantor_function(), 60).ok
    assert ns.check_morphism(ns.doubling(), 60).ok


def test_round_hull_maximal_containing_dot():
    d = ns.round_hull(F(1, 3), F(5, 12))
    lo, hi = endpoints(d)
    assert lo <= F(1, 3) and F(5, 12) <= hi
    # deepest containing dyadic dot (the grade-4 grid still has one)
    assert d == D(5, 4)


def test_cantor_digit_rule_matches_oracle_depth_6():
    cf = ns.cantor_function()
    for depth in range(1, 7):
        for syms in itertools.product((0, 1, 2), repeat=depth):
            img = cf.map(Seq(syms))
            assert img.syms == oracles.cantor_digit_rule(syms)


def test_line_call_verdicts():
    assert ns.line_call(ns.rational_to_point(F(1, 100)), 8) == "IN"
    assert ns.line_call(ns.rational_to_point(F(-3, 100)), 8) == "OUT"
    assert ns.line_call(ns.rational_to_point(F(1, 100000)), 8) == "LET"


def test_line_call_explicit_shrinking_stream(sigmaR):
    # the halving stream [-1,1], [-1/2,1/2], ... pinned around zero
    dots = [D(-1, m) for m in range(0, 10)]
    p = ns.point_from_prefix(sigmaR, dots)
    assert ns.line_call(p, 8) == "LET"


def test_compose_chain_agrees_pointwise():
    f = ns.compose(ns.arith("abs"), ns.arith("neg"))
    p = ns.rational_to_point(F(-7, 5))
    lo, hi = endpoints(ns.approximate(ns.apply_point(f, p), 10))
    assert lo <= F(7, 5) <= hi


def test_code_point_round_trip(baire):
    g = ns.identity(baire)
    Fc = ns.constant_code_morphism(g)
    code = ns.code_point_of(g)
    # the constant-code morphism reproduces g's code on every input
    d = Fc.map(Seq((0, 1, 0, 2)))
    assert d == code.dot(4)


def test_diagonalize_identity_code(baire):
    from conftest import spread_point

    g = ns.identity(baire)
    diag = ns.diagonalize(ns.constant_code_morphism(g))
    p = spread_point(baire, Seq((1, 0)))
    fp = ns.apply_point(diag.morphism, p)
    gp = ns.apply_point(g, p)
    assert isinstance(ns.point_apart(fp, gp, 25), ns.Apart)


def test_diagonalize_output_is_lawful(baire):
    # the flipped morphism is itself monotone along prefix extension
    g = ns.identity(baire)
    diag = ns.diagonalize(ns.constant_code_morphism(g))
    prev = None
    for k in range(0, 6):
        out = diag.morphism.map(Seq((0,) * k))
        if prev is not None and prev.syms:
            assert out.extends(prev)
        prev = out
