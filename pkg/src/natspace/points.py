"""Points: lazy refining dot streams with materialized choice moduli.

A point is a stream p0 >= p1 >= ... of dots that eventually strictly refines
and chooses between every apart dot pair.  The choice modulus is an explicit
function from apart-pair indices (the space's frozen pair enumeration) to
stream indices; every constructor supplies one (the default is a bounded
search, which terminates on every lawful point).

Streams are materialized into a shared prefix cache as they are consumed, so
a single Point can be read by several consumers.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Optional, Tuple, Union

from .dots import Dot, MaxDot, Seq, endpoints
from .spaces import Space, SpaceDefect

STRICTNESS_BOUND = 4  # declared liveness contract for shipped constructors
DEFAULT_MODULUS_BUDGET = 4096


class PointDefect(Exception):
    """A point stream violated its liveness contract."""


class Point:
    def __init__(
        self,
        space: Space,
        dots: Union[Iterable[Dot], Callable[[], Iterator[Dot]]],
        choice_modulus: Optional[Callable[[int], int]] = None,
        steps_for_grade: Optional[Callable[[int], int]] = None,
        strictness_bound: Optional[int] = None,
        name: str = "",
    ):
        self.space = space
        self._factory = dots if callable(dots) else (lambda it=dots: iter(it))
        self._iter: Optional[Iterator[Dot]] = None
        self._prefix: List[Dot] = []
        self._modulus = choice_modulus
        self._modulus_cache: dict = {}
        self.steps_for_grade = steps_for_grade or (
            lambda g: STRICTNESS_BOUND * (g + 1) + 16
        )
        self.strictness_bound = strictness_bound
        self.name = name
        self._lock = threading.RLock()

    # -- stream access -------------------------------------------------------

    def dot(self, k: int) -> Dot:
        with self._lock:
            if self._iter is None:
                self._iter = self._factory()
            while len(self._prefix) <= k:
                try:
                    d = next(self._iter)
                except StopIteration:
                    raise PointDefect(
                        f"point {self.name or '<anon>'}: stream exhausted at "
                        f"index {len(self._prefix)} (requested {k})"
                    )
                if self._prefix and not self.space.refines(d, self._prefix[-1]):
                    raise PointDefect(
                        f"point {self.name or '<anon>'}: dot {d!r} does not "
                        f"refine previous {self._prefix[-1]!r}"
                    )
                self._prefix.append(d)
                if self.strictness_bound is not None:
                    b = self.strictness_bound
                    if len(self._prefix) > b and all(
                        self._prefix[-i] == self._prefix[-i - 1] for i in range(1, b + 1)
                    ):
                        raise PointDefect(
                            f"point {self.name or '<anon>'}: no strict refinement "
                            f"within {b} steps at prefix length {len(self._prefix)}"
                        )
            return self._prefix[k]

    def prefix(self, k: int) -> Tuple[Dot, ...]:
        self.dot(k - 1)
        return tuple(self._prefix[:k])

    # -- choice modulus ------------------------------------------------------

    def choice_modulus(self, pair_index: int, budget: int = DEFAULT_MODULUS_BUDGET) -> int:
        """A stream index whose dot is apart from one side of the idx-th
        apart pair of the space."""
        if pair_index in self._modulus_cache:
            return self._modulus_cache[pair_index]
        if self._modulus is not None:
            k = self._modulus(pair_index)
        else:
            a, b = self.space.apart_pair(pair_index)
            k = self._search_modulus(a, b, budget)
        a, b = self.space.apart_pair(pair_index)
        d = self.dot(k)
        if not (self.space.apart(d, a) or self.space.apart(d, b)):
            raise PointDefect(
                f"point {self.name or '<anon>'}: modulus {k} for pair "
                f"({a!r},{b!r}) does not choose"
            )
        self._modulus_cache[pair_index] = k
        return k

    def _search_modulus(self, a: Dot, b: Dot, budget: int) -> int:
        for k in range(budget):
            d = self.dot(k)
            if self.space.apart(d, a) or self.space.apart(d, b):
                return k
        raise PointDefect(
            f"point {self.name or '<anon>'}: no choice between {a!r} and {b!r} "
            f"within budget {budget}"
        )

    def __repr__(self) -> str:
        return f"Point({self.space.name}, {self.name or '...'})"


@dataclass(frozen=True)
class Apart:
    witness_index: int


@dataclass(frozen=True)
class Unknown:
    budget_spent: int


ApartVerdict = Union[Apart, Unknown]


@dataclass(frozen=True)
class Yes:
    m: int


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def approximate(p: Point, grade: int) -> Dot:
    """First stream dot with grade >= requested grade (consumes the stream)."""
    if p.space.spraid_info is None:
        raise SpaceDefect(f"{p.space.name}: approximate needs a graded space")
    max_steps = p.steps_for_grade(grade)
    for k in range(max_steps + 1):
        d = p.dot(k)
        if p.space.grade(d) >= grade:
            return d
    raise PointDefect(
        f"point {p.name or '<anon>'}: grade {grade} not reached within "
        f"{max_steps} steps; stalled prefix ends at {p.dot(max_steps)!r}"
    )


def point_apart(p: Point, q: Point, budget: int) -> ApartVerdict:
    """Semi-decide apartness of two points of the same space."""
    for k in range(budget + 1):
        if p.space.apart(p.dot(k), q.dot(k)):
            return Apart(k)
    return Unknown(budget)


def point_in_dot(p: Point, a: Dot, budget: int) -> Union[Yes, Unknown]:
    """Semi-decide strict membership of a point in a dot's hull."""
    for m in range(budget + 1):
        if p.space.strictly_refines(p.dot(m), a):
            return Yes(m)
    return Unknown(budget)


def canonical_point(space: Space, a: Dot, search_limit: int = 500_000) -> Point:
    """The deterministic point x^a: every next dot is the least-enumeration-
    index strict refinement of the current dot."""

    def gen() -> Iterator[Dot]:
        cur = a
        yield cur
        while True:
            for i in range(search_limit):
                d = space.enumerate_dot(i)
                if space.strictly_refines(d, cur):
                    cur = d
                    break
            else:
                raise SpaceDefect(
                    f"{space.name}: no strict refinement of {cur!r} within "
                    f"{search_limit} enumerated dots (space defect)"
                )
            yield cur

    return Point(space, gen, strictness_bound=STRICTNESS_BOUND, name=f"canon({a!r})")


def ancestor_at(space: Space, d: Dot, g: int, under: Optional[Dot] = None) -> Dot:
    """A grade-g dot c with d <= c (and c <= under when given); deterministic
    first hit of a breadth-first predecessor walk."""
    cur_grade = space.grade(d)
    if cur_grade < g:
        raise ValueError(f"dot {d!r} has grade {cur_grade} < {g}")
    frontier = [d]
    seen = {d}
    while frontier:
        if space.grade(frontier[0]) == g:
            for c in frontier:
                if under is None or space.refines(c, under):
                    return c
            raise SpaceDefect(f"no grade-{g} ancestor of {d!r} under {under!r}")
        nxt: List[Dot] = []
        nseen = set()
        for x in frontier:
            for pr in space.predecessors(x):
                if pr not in nseen:
                    nseen.add(pr)
                    nxt.append(pr)
        frontier = nxt
    raise SpaceDefect(f"predecessor walk from {d!r} died out before grade {g}")


def successor_normalize(p: Point) -> Point:
    """The equivalent successor point: grade(result_k) = k for every k."""
    space = p.space
    if space.spraid_info is None:
        raise SpaceDefect(f"{space.name}: successor_normalize needs grades")

    def gen() -> Iterator[Dot]:
        prev: Optional[Dot] = None
        k = 0  # stream position in p
        for g in itertools.count(0):
            budget = p.steps_for_grade(g)
            while space.grade(p.dot(k)) < g:
                k += 1
                if k > budget + 1:
                    raise PointDefect(
                        f"successor_normalize: grade {g} not reached within "
                        f"{budget} steps of {p!r}"
                    )
            q = ancestor_at(space, p.dot(k), g, under=prev)
            prev = q
            yield q

    return Point(
        space,
        gen,
        strictness_bound=STRICTNESS_BOUND,
        steps_for_grade=lambda g: g + 1,
        name=f"norm({p.name})",
    )


def rational_to_point(q: Fraction) -> Point:
    """The standard embedding of a rational into sigma_R: at each exponent m
    the dot [n/2^m,(n+2)/2^m] with n = floor(q*2^m - 1/2), which places q in
    the middle half; successive dots are successors."""
    from .spaces import std_space
    from .dots import DyadicInterval

    q = Fraction(q)
    space = std_space("sigma_R")

    def gen() -> Iterator[Dot]:
        for m in itertools.count(0):
            n = math.floor(q * 2**m - Fraction(1, 2))
            yield DyadicInterval(n, m)

    pt = Point(
        space,
        gen,
        steps_for_grade=lambda g: g + 1,
        strictness_bound=STRICTNESS_BOUND,
        name=f"rat({q})",
    )

    def modulus(pair_index: int) -> int:
        a, b = space.apart_pair(pair_index)
        gap = _gap(a, b)
        # a dot of width < gap cannot touch both sides of the gap
        m = 0
        while Fraction(2, 2**m) >= gap:
            m += 1
        k = m
        # the width-based bound may land on a dot still touching one side;
        # finish with the direct search from there
        while True:
            d = pt.dot(k)
            if space.apart(d, a) or space.apart(d, b):
                return k
            k += 1

    pt._modulus = modulus
    return pt


def _gap(a: Dot, b: Dot) -> Fraction:
    from .dots import interval_gap

    return interval_gap(a, b)


def point_to_rational_bounds(p: Point, grade: int) -> Tuple[Fraction, Fraction]:
    """Endpoints of approximate(p, grade) for interval-space points."""
    if not p.space.interval_like:
        raise SpaceDefect(f"{p.space.name}: not an interval space")
    d = approximate(p, grade)
    return endpoints(d)


def point_from_prefix(space: Space, dots: Iterable[Dot], name: str = "") -> Point:
    """A point backed by a finite prefix; consuming past it is a defect (used
    by the CLI to read point-prefix files)."""
    return Point(space, tuple(dots), name=name or "prefix")
