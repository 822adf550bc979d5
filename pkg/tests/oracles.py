"""Independent oracles used to freeze expected values.

Everything here is computed from first principles with exact rational
arithmetic -- no imports from the package under test -- so the test suite
checks the library against independently derived answers.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

# ---------------------------------------------------------------------------
# Random expression generator + exact rational evaluator (the eval oracle).
# Grammar:
#   expr   := term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := rational | '-' factor | min(e,e) | max(e,e) | abs(e) | (expr)
# ---------------------------------------------------------------------------


def random_expression(rng: random.Random, depth: int = 3) -> Tuple[str, Fraction]:
    """A random grammar-valid expression and its exact rational value.

    Values stay small (|value| well under 2^16) because terminals are small
    and multiplication nesting is bounded by the depth parameter.
    """

    def rational() -> Tuple[str, Fraction]:
        num = rng.randint(0, 40)
        if rng.random() < 0.5:
            den = rng.randint(1, 12)
            return f"{num}/{den}", Fraction(num, den)
        return str(num), Fraction(num)

    def factor(d: int) -> Tuple[str, Fraction]:
        r = rng.random()
        if d <= 0 or r < 0.40:
            return rational()
        if r < 0.55:
            t, v = factor(d - 1)
            return f"-{t}", -v
        if r < 0.70:
            t1, v1 = expr(d - 1)
            t2, v2 = expr(d - 1)
            return f"min({t1}, {t2})", min(v1, v2)
        if r < 0.85:
            t1, v1 = expr(d - 1)
            t2, v2 = expr(d - 1)
            return f"max({t1}, {t2})", max(v1, v2)
        t, v = expr(d - 1)
        if rng.random() < 0.5:
            return f"abs({t})", abs(v)
        return f"({t})", v

    def term(d: int) -> Tuple[str, Fraction]:
        t, v = factor(d)
        for _ in range(rng.randint(0, 2)):
            t2, v2 = factor(d - 1)
            t, v = f"{t} * {t2}", v * v2
        return t, v

    def expr(d: int) -> Tuple[str, Fraction]:
        t, v = term(d)
        for _ in range(rng.randint(0, 2)):
            op = rng.choice(["+", "-"])
            t2, v2 = term(d - 1)
            t = f"{t} {op} {t2}"
            v = v + v2 if op == "+" else v - v2
        return t, v

    return expr(depth)


# ---------------------------------------------------------------------------
# Classical Cantor function (devil's staircase) at exact rationals.
# ---------------------------------------------------------------------------


def cantor_classical(q: Fraction, max_digits: int = 64) -> Fraction:
    """The Cantor function value at q in [0,1].

    Exact whenever the greedy ternary expansion of q terminates or hits a
    digit 1 within max_digits (true for every ternary rational via the
    terminating expansion); raises otherwise.
    """
    if not 0 <= q <= 1:
        raise ValueError("cantor_classical needs q in [0,1]")
    value = Fraction(0)
    x = q
    for i in range(1, max_digits + 1):
        if x == 0:
            return value
        x *= 3
        d = int(x)  # floor: greedy terminating expansion
        if d == 3:  # q == 1 exactly
            d, x = 2, Fraction(1)
        x -= d
        if d == 1:
            return value + Fraction(1, 2**i)
        value += Fraction(d // 2, 2**i)
    raise ValueError(f"ternary expansion of {q} did not resolve")


def cantor_digit_rule(ternary: Sequence[int]) -> Tuple[int, ...]:
    """The digit-level, length-preserving Cantor rule: halve 0/2 digits
    until the first 1 (which maps to 1), zeros afterwards."""
    out: List[int] = []
    seen_one = False
    for d in ternary:
        if seen_one:
            out.append(0)
        elif d == 1:
            out.append(1)
            seen_one = True
        else:
            out.append(d // 2)
    return tuple(out)


# ---------------------------------------------------------------------------
# Exact union-coverage sweep for closed rational intervals.
# ---------------------------------------------------------------------------


def union_covers(
    segments: Sequence[Tuple[Fraction, Fraction]],
    lo: Fraction,
    hi: Fraction,
) -> bool:
    """True iff the union of the closed segments contains [lo, hi]."""
    cursor = lo
    for s_lo, s_hi in sorted(segments):
        if s_lo > cursor:
            return False
        cursor = max(cursor, s_hi)
        if cursor >= hi:
            return True
    return cursor >= hi


# ---------------------------------------------------------------------------
# Brute-force splitting oracle on the dyadic unit fan.
# Grade-g dots are [n/2^(g+1), (n+2)/2^(g+1)] for n = 0 .. 2^(g+1)-2.
# Two closed intervals "touch" iff they are not strictly disjoint.
# ---------------------------------------------------------------------------


def dyadic_unit_dots(grade: int) -> List[Tuple[Fraction, Fraction]]:
    m = grade + 1
    return [
        (Fraction(n, 2**m), Fraction(n + 2, 2**m)) for n in range(2**m - 1)
    ]


def _touches(a: Tuple[Fraction, Fraction], b: Tuple[Fraction, Fraction]) -> bool:
    return not (a[1] < b[0] or b[1] < a[0])


def splitting_holds(
    A: Sequence[Tuple[Fraction, Fraction]],
    B: Sequence[Tuple[Fraction, Fraction]],
    grade: int,
) -> bool:
    """True iff every grade-`grade` dot touching (a refinement of) some A
    element is strictly disjoint from every one touching some B element."""
    dots = dyadic_unit_dots(grade)
    ta = [d for d in dots if any(_touches(d, a) for a in A)]
    tb = [d for d in dots if any(_touches(d, b) for b in B)]
    return all(not _touches(x, y) for x in ta for y in tb)


def splitting_depth_oracle(
    A: Sequence[Tuple[Fraction, Fraction]],
    B: Sequence[Tuple[Fraction, Fraction]],
    max_grade: int = 16,
) -> Optional[int]:
    for g in range(1, max_grade + 1):
        if splitting_holds(A, B, g):
            return g
    return None


# ---------------------------------------------------------------------------
# Sign oracle for line calls.
# ---------------------------------------------------------------------------


def sign_call(limit: Fraction, threshold_exp: int) -> Optional[str]:
    """The forced verdict when the limit clears the threshold, else None."""
    eps = Fraction(1, 2**threshold_exp)
    if limit > eps:
        return "IN"
    if limit < -eps:
        return "OUT"
    return None
