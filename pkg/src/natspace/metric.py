"""Star-finiteness, splitting depths, three-value separating functions and
the induced metric on star-finite fans.

The central construction: for two apart same-grade dots a # b, build a
morphism h into the ternary digit space whose realized value is 0 on every
point through a, 1 on every point through b, and inside [1/3, 2/3] on points
eventually apart from both.  Summing countably many such separators with
weights 2^-m yields a metric compatible with the apartness topology.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

from .dots import (
    Dot,
    DyadicInterval,
    Isolated,
    MaxDot,
    NaryInterval,
    RatInterval,
    Seq,
    endpoints,
)
from .points import Point, successor_normalize
from .morphisms import Morphism, REFINEMENT, compose, nary_codec
from .spaces import Space, SpaceDefect, SpraidInfo, seq_interval, std_space


class MetricDefect(Exception):
    """A precondition of the metric machinery failed."""


_LOG2_OVER_LOG3 = math.log(2) / math.log(3)


def _is_interval(d: Dot) -> bool:
    return isinstance(d, (RatInterval, DyadicInterval, NaryInterval))


# ---------------------------------------------------------------------------
# Stars: same-grade touchers.


def star_dots(space: Space, d: Dot) -> Tuple[Dot, ...]:
    """All same-grade dots touching d (including d itself)."""
    if space.spraid_info is None:
        raise SpaceDefect(f"{space.name}: stars need a graded space")
    if d == space.max_dot:
        return (d,)
    if isinstance(d, Isolated):
        # The isolated chain has one dot per grade and touches nothing else.
        return (d,)
    if isinstance(d, DyadicInterval):
        # Overlapping dyadic grid: [n, n+2] scaled by 2^-m meets [n', n'+2]
        # exactly when |n - n'| <= 2.  Validity is containment in the root.
        cands = [DyadicInterval(d.n + k, d.m) for k in range(-2, 3)]
    elif isinstance(d, NaryInterval):
        cands = [NaryInterval(d.base, d.n + k, d.m) for k in (-1, 0, 1)]
    elif space.spraid_info.finitely_branching:
        g = space.grade(d)
        return tuple(e for e in space.level(g) if space.touch(d, e))
    else:
        raise SpaceDefect(f"{space.name}: no star rule for {d!r}")
    root = space.max_dot
    out = []
    for c in cands:
        if isinstance(root, MaxDot) or interval_valid_under(c, root):
            if not space.apart(c, d):
                out.append(c)
    return tuple(out)


def interval_valid_under(c: Dot, root: Dot) -> bool:
    clo, chi = endpoints(c)
    rlo, rhi = endpoints(root)
    return rlo <= clo and chi <= rhi


def star_set(space: Space, n: int, a: Dot) -> Tuple[Dot, ...]:
    """The same-grade n-star: dots reachable from a by n touch steps at the
    grade of a (the 1-star is the plain star)."""
    if n < 1:
        raise ValueError("star index must be >= 1")
    cur = {a}
    for _ in range(n - 1):
        nxt = set(cur)
        for c in cur:
            nxt.update(star_dots(space, c))
        cur = nxt
    out = set()
    for c in cur:
        out.update(star_dots(space, c))
    return tuple(sorted(out, key=repr))


def star_relation(space: Space, n: int, a: Dot, b: Dot) -> bool:
    """The iterated near-ness relation: reachable in n touch steps, the first
    n-1 staying at the grade of the coarser dot."""
    if space.grade(b) < space.grade(a):
        a, b = b, a
    if n == 1:
        return space.touch(a, b)
    cur = {a}
    for _ in range(n - 1):
        nxt = set()
        for c in cur:
            nxt.update(star_dots(space, c))
        cur = nxt
    return any(space.touch(c, b) for c in cur)


@dataclass
class StarReport:
    space: str
    checked: int
    max_star: int
    max_per_side: int
    ok: bool

    def __str__(self) -> str:
        return (
            f"star-finite[{self.space}]: checked={self.checked} "
            f"max_star={self.max_star} max_per_side={self.max_per_side} "
            f"ok={self.ok}"
        )


def is_star_finite(space: Space, depth: int) -> StarReport:
    """Examine the first `depth` enumerated dots; report the largest star and
    the largest one-sided star (dots extending left / right of the dot)."""
    max_star = 0
    max_side = 0
    checked = 0
    for i in range(depth):
        d = space.enumerate_dot(i)
        if d == space.max_dot:
            continue
        st = star_dots(space, d)
        checked += 1
        max_star = max(max_star, len(st))
        if _is_interval(d):
            dlo, dhi = endpoints(d)
            left = sum(1 for e in st if _is_interval(e) and endpoints(e)[0] <= dlo)
            right = sum(1 for e in st if _is_interval(e) and endpoints(e)[1] >= dhi)
            max_side = max(max_side, left, right)
        else:
            max_side = max(max_side, len(st))
    return StarReport(space.name, checked, max_star, max_side, True)


# ---------------------------------------------------------------------------
# Touch sets: fast "does c touch anything in S" predicates.


class _TouchSet:
    """A finite dot set with a fast touch test (merged interval segments for
    interval dots, flags for isolated dots, a plain scan for the rest)."""

    def __init__(self, space: Space, dots):
        self.space = space
        self.dots = tuple(dots)
        self.has_iso = any(isinstance(d, Isolated) for d in self.dots)
        ivs = sorted(endpoints(d) for d in self.dots if _is_interval(d))
        segs: List[List[Fraction]] = []
        for lo, hi in ivs:
            if segs and lo <= segs[-1][1]:
                segs[-1][1] = max(segs[-1][1], hi)
            else:
                segs.append([lo, hi])
        self.segs = [(lo, hi) for lo, hi in segs]
        self.other = tuple(
            d for d in self.dots if not _is_interval(d) and not isinstance(d, Isolated)
        )

    def __len__(self) -> int:
        return len(self.dots)

    def touches(self, c: Dot) -> bool:
        if isinstance(c, Isolated):
            return self.has_iso
        if _is_interval(c):
            clo, chi = endpoints(c)
            if any(lo <= chi and clo <= hi for lo, hi in self.segs):
                return True
            return any(self.space.touch(c, d) for d in self.other)
        return any(self.space.touch(c, d) for d in self.dots)


# ---------------------------------------------------------------------------
# Splitting depth.


def check_splitting(fann: Space, A, B, N: int) -> bool:
    """Brute-force certificate check: every grade-N toucher of A is apart
    from every grade-N toucher of B."""
    level = fann.level(N)
    ta = [c for c in level if any(fann.touch(c, a) for a in A)]
    tb = [c for c in level if any(fann.touch(c, b) for b in B)]
    return all(fann.apart(c, d) for c in ta for d in tb)


def splitting_depth(fann: Space, A, B, max_depth: int = 32) -> int:
    """The least grade N at which the touchers of A and the touchers of B
    are apart from each other, searched from the deepest input grade up."""
    A, B = tuple(A), tuple(B)
    for a in A:
        for b in B:
            if not fann.apart(a, b):
                raise MetricDefect("splitting needs apart input sets")
    grades = [fann.grade(d) for d in A + B]
    start = max(grades) if grades else 1
    sa = _TouchSet(fann, A)
    sb = _TouchSet(fann, B)
    for N in range(max(start, 1), max_depth + 1):
        level = fann.level(N)
        ta = [c for c in level if sa.touches(c)]
        tb = [c for c in level if sb.touches(c)]
        tbset = _TouchSet(fann, tb)
        if not any(tbset.touches(c) for c in ta):
            return N
    raise MetricDefect(
        f"no splitting depth for {len(A)} vs {len(B)} dots within grade {max_depth}"
    )


# ---------------------------------------------------------------------------
# The point-relative subfan of a star-finite spread.


def subfan_Wx(space: Space, x: Point, depth: int, star_index: int = 1) -> Space:
    """The fan of dots near the point x: level n holds the grade-n dots
    near x's grade-n dot (touching it, or touching its star_index-star),
    plus one filler refinement under each dead-end member so every branch
    stays infinite."""
    if space.spraid_info is None:
        raise SpaceDefect(f"{space.name}: subfans need a graded space")
    xn = successor_normalize(x)
    levels: List[Tuple[Dot, ...]] = [(space.max_dot,)]
    succ_map: Dict[Dot, List[Dot]] = {}
    for n in range(1, depth + 1):
        target = xn.dot(n)
        if space.grade(target) != n:
            raise MetricDefect("subfan needs a successor-normalized point")
        near = list(star_set(space, star_index, target))
        members: List[Dot] = []
        seen = set()
        for a in levels[n - 1]:
            children = [b for b in near if space.strictly_refines(b, a)]
            if not children:
                # dead end: keep the least-enumerated strict refinement alive
                succs = space.successors(a)
                if succs.unbounded:
                    raise SpaceDefect(
                        f"{space.name}: subfan needs bounded branching at {a!r}"
                    )
                children = [min(succs.dots, key=space.index_of)]
            succ_map[a] = children
            for b in children:
                if b not in seen:
                    seen.add(b)
                    members.append(b)
        levels.append(tuple(members))
    member_set = {d for lvl in levels for d in lvl}

    def successors(d: Dot):
        from .spaces import Successors

        if d not in succ_map:
            if d in member_set:
                raise SpaceDefect(f"subfan built to depth {depth} only")
            raise SpaceDefect(f"{d!r} is not a subfan member")
        return Successors(tuple(succ_map[d]))

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        return tuple(p for p in space.predecessors(d) if p in member_set)

    def enum() -> Iterator[Dot]:
        for lvl in levels:
            yield from lvl

    sub = Space(
        f"W[{x.name or 'x'}]({space.name})",
        space._apart,
        space._refines,
        space.max_dot,
        enum,
        SpraidInfo(space.grade, successors, predecessors, True),
        width=space._width,
        family="subfan",
        base=space.base,
        is_isolated=space.is_isolated,
    )
    sub.wx_levels = tuple(levels)
    return sub


class _GenSet:
    """A same-grade generator set with a fast 'does c refine a member' test
    (dyadic/nary dots find their few coarse-grade ancestors arithmetically)."""

    def __init__(self, space: Space, dots):
        self.space = space
        self.dots = frozenset(dots)
        self.iso = tuple(d for d in self.dots if isinstance(d, Isolated))
        self.m: Optional[int] = None
        self.kind = None
        for d in self.dots:
            if isinstance(d, DyadicInterval):
                self.kind, self.m = "dyadic", d.m
                break
            if isinstance(d, NaryInterval):
                self.kind, self.m, self.base = "nary", d.m, d.base
                break

    def __bool__(self) -> bool:
        return bool(self.dots)

    def contains_refiner(self, c: Dot) -> bool:
        if c in self.dots:
            return True
        if isinstance(c, Isolated):
            return any(self.space.refines(c, x) for x in self.iso)
        if self.kind == "dyadic" and isinstance(c, DyadicInterval) and c.m >= self.m:
            lo, hi = endpoints(c)
            scale = 2**self.m
            n_min = math.ceil(hi * scale) - 2
            n_max = math.floor(lo * scale)
            return any(
                DyadicInterval(n, self.m) in self.dots for n in range(n_min, n_max + 1)
            )
        if self.kind == "nary" and isinstance(c, NaryInterval) and c.m >= self.m:
            anc = NaryInterval(self.base, c.n // self.base ** (c.m - self.m), self.m)
            return anc in self.dots
        return any(self.space.refines(c, x) for x in self.dots)


# ---------------------------------------------------------------------------
# Ternary index bookkeeping.

_CONE_A = -1
_CONE_B = 3


def _index_value(i: Tuple[int, ...]) -> int:
    v = 0
    for s in i:
        v = 3 * v + s
    return v


def _prd(i: Tuple[int, ...]):
    v = _index_value(i)
    if v == 0:
        return _CONE_A
    v -= 1
    out = []
    for _ in range(len(i)):
        out.append(v % 3)
        v //= 3
    return tuple(reversed(out))


def _scz(i: Tuple[int, ...]):
    v = _index_value(i)
    if v == 3 ** len(i) - 1:
        return _CONE_B
    v += 1
    out = []
    for _ in range(len(i)):
        out.append(v % 3)
        v //= 3
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# Separating functions on fanns (zone construction via splitting depths).


class _FanZones:
    """Ternary zone system between two apart same-grade dots of a fann.

    Level n assigns zones indexed by {0,1,2}^n; the two cones sit behind the
    lexicographic extremes.  Each refinement step takes the grade-t members
    of the two neighbouring zones, finds a splitting depth N, and classifies
    the grade-N dots into near-left / middle / near-right."""

    def __init__(self, fann: Space, a: Dot, b: Dot, max_level_grade: int):
        if fann.spraid_info is None or not fann.spraid_info.finitely_branching:
            raise MetricDefect("zone systems need a finitely branching space")
        if not fann.apart(a, b):
            raise MetricDefect("zone endpoints must be apart")
        if fann.grade(a) != fann.grade(b):
            raise MetricDefect("zone endpoints must share a grade")
        self.space = fann
        self.a = a
        self.b = b
        self.M = fann.grade(a)
        if self.M < 1:
            raise MetricDefect("zone endpoints must be proper dots")
        self.max_level_grade = max_level_grade
        self.t: List[int] = [self.M]
        self.alive: Dict[int, Tuple[Tuple[int, ...], ...]] = {0: ((),)}
        self.X: Dict[Tuple[Tuple[int, ...], int], _GenSet] = {}
        self.exhausted = False
        self._mem: Dict[Tuple[Dot, Tuple[int, ...]], bool] = {}
        self._lock = threading.RLock()

    # -- zone membership ----------------------------------------------------

    def member(self, c: Dot, i) -> bool:
        if i == _CONE_A:
            return self.space.refines(c, self.a)
        if i == _CONE_B:
            return self.space.refines(c, self.b)
        if i == ():
            return True
        key = (c, i)
        if key in self._mem:
            return self._mem[key]
        head, s = i[:-1], i[-1]
        gens = self.X.get((head, s))
        res = (
            gens is not None
            and self.member(c, head)
            and gens.contains_refiner(c)
        )
        self._mem[key] = res
        return res

    def _zone_dots(self, i, level) -> Tuple[Dot, ...]:
        return tuple(c for c in level if self.member(c, i))

    # -- level construction --------------------------------------------------

    def ensure_level(self, n: int) -> None:
        with self._lock:
            while len(self.t) <= n and not self.exhausted:
                self._build_next()

    def _build_next(self) -> None:
        n = len(self.t) - 1
        t = self.t[n]
        if t > self.max_level_grade:
            self.exhausted = True
            return
        level_t = self.space.level(t)
        depths = []
        for i in self.alive[n]:
            A = self._zone_dots(_prd(i), level_t)
            B = self._zone_dots(_scz(i), level_t)
            try:
                if A and B:
                    N = splitting_depth(
                        self.space, A, B, max_depth=self.max_level_grade
                    )
                    N = max(N, t + 1)
                else:
                    N = t + 1
            except MetricDefect:
                self.exhausted = True
                return
            level_n = self.space.level(N)
            sa = _TouchSet(self.space, A)
            sb = _TouchSet(self.space, B)
            ta, mid, tb = [], [], []
            for c in level_n:
                if sa.touches(c):
                    ta.append(c)
                elif sb.touches(c):
                    tb.append(c)
                else:
                    mid.append(c)
            self.X[(i, 0)] = _GenSet(self.space, ta)
            self.X[(i, 1)] = _GenSet(self.space, mid)
            self.X[(i, 2)] = _GenSet(self.space, tb)
            depths.append(N)
        t_next = max(depths) if depths else t + 1
        level_next = self.space.level(t_next) if t_next <= self.max_level_grade else ()
        alive_next = []
        for i in self.alive[n]:
            for s in range(3):
                child = i + (s,)
                if any(self.member(c, child) for c in level_next):
                    alive_next.append(child)
        self.t.append(t_next)
        self.alive[n + 1] = tuple(alive_next)

    # -- the digit map -------------------------------------------------------

    def digits(self, c: Dot) -> Seq:
        out: List[int] = []
        i: Tuple[int, ...] = ()
        g = self.space.grade(c)
        while True:
            n = len(i)
            if g <= self.t[n]:
                break
            self.ensure_level(n + 1)
            if len(self.t) <= n + 1:
                break
            hits = [s for s in (0, 1, 2) if self.member(c, i + (s,))]
            if len(hits) != 1:
                break
            i = i + (hits[0],)
            out.append(hits[0])
        return Seq(tuple(out))

    def grade_for_digits(self, k: int) -> int:
        self.ensure_level(k)
        idx = min(k, len(self.t) - 1)
        penalty = 3 * max(0, k - (len(self.t) - 1))
        return self.t[idx] + 1 + penalty

    def pending(self) -> Tuple:
        return ()


# ---------------------------------------------------------------------------
# Separating functions on star-finite spreads (star-based zones, no level
# sets needed, classification is dot-local and may stay pending).


class _SpreadZones:
    """Ternary zone system on a star-finite spread.  Zone membership is
    decided from a dot's finite star and its ancestors; a security predicate
    (the whole 2-star already classified one level up) gates refinement."""

    def __init__(self, space: Space, a: Dot, b: Dot, depth_budget: int):
        if space.spraid_info is None:
            raise MetricDefect("zone systems need a graded space")
        if not space.apart(a, b):
            raise MetricDefect("zone endpoints must be apart")
        if space.grade(a) != space.grade(b):
            raise MetricDefect("zone endpoints must share a grade")
        self.space = space
        self.a = a
        self.b = b
        self.M = space.grade(a)
        self.depth_budget = depth_budget
        self.pending_set: List[Tuple[Dot, int]] = []
        self._mem: Dict[Tuple[Dot, Tuple[int, ...]], bool] = {}
        self._sec: Dict[Tuple[Dot, int], bool] = {}
        self._zone: Dict[Tuple[Dot, int], bool] = {}
        self._star: Dict[Dot, Tuple[Dot, ...]] = {}
        self._lock = threading.RLock()

    # -- stars and ancestors --------------------------------------------------

    def star(self, d: Dot) -> Tuple[Dot, ...]:
        if d not in self._star:
            self._star[d] = star_dots(self.space, d)
        return self._star[d]

    def star2(self, d: Dot) -> Tuple[Dot, ...]:
        out = set()
        for e in self.star(d):
            out.update(self.star(e))
        return tuple(out)

    def _ancestors(self, c: Dot) -> Tuple[Dot, ...]:
        """c and everything above it (the maximal dot excluded)."""
        out = [c]
        seen = {c}
        queue = [c]
        while queue:
            d = queue.pop()
            for p in self.space.predecessors(d):
                if p != self.space.max_dot and p not in seen:
                    seen.add(p)
                    out.append(p)
                    queue.append(p)
        return tuple(out)

    # -- zone membership --------------------------------------------------------

    def _touch_zone(self, d: Dot, j) -> bool:
        return any(self.member(e, j) for e in self.star(d))

    def _touch2_zone(self, d: Dot, j) -> bool:
        return any(self.member(e, j) for e in self.star2(d))

    def sec(self, c: Dot, n: int) -> bool:
        """Security at stage n: the whole 2-star sits in stage-n zones."""
        if self.space.grade(c) < self.M:
            return False
        if n == 0:
            return True
        key = (c, n)
        if key not in self._sec:
            self._sec[key] = all(self.has_zone(e, n) for e in self.star2(c))
        return self._sec[key]

    def has_zone(self, d: Dot, n: int) -> bool:
        if n == 0:
            return True
        key = (d, n)
        if key in self._zone:
            return self._zone[key]

        def rec(i: Tuple[int, ...]) -> bool:
            if len(i) == n:
                return True
            return any(self.member(d, i + (s,)) and rec(i + (s,)) for s in (0, 1, 2))

        res = rec(())
        self._zone[key] = res
        return res

    def member(self, c: Dot, i) -> bool:
        if i == _CONE_A:
            return self.space.refines(c, self.a)
        if i == _CONE_B:
            return self.space.refines(c, self.b)
        if i == ():
            return True
        key = (c, i)
        if key in self._mem:
            return self._mem[key]
        self._mem[key] = False  # cut recursive re-entry on the same query
        head, s = i[:-1], i[-1]
        n = len(head)
        left, right = _prd(head), _scz(head)
        if s == 0 or s == 2:
            near, far = (left, right) if s == 0 else (right, left)
            res = any(
                self.member(d, head)
                and self.sec(d, n)
                and self._touch_zone(d, near)
                and not self._touch2_zone(d, far)
                for d in self._ancestors(c)
            )
        else:
            res = (
                self.member(c, head)
                and self.sec(c, n)
                and not self.member(c, head + (0,))
                and not self.member(c, head + (2,))
                and not self._touch_zone(c, left)
                and not self._touch_zone(c, right)
            )
        self._mem[key] = res
        return res

    # -- the digit map -----------------------------------------------------------

    def digits(self, c: Dot) -> Seq:
        out: List[int] = []
        i: Tuple[int, ...] = ()
        budget_hit = True
        for _ in range(self.depth_budget):
            hits = [s for s in (0, 1, 2) if self.member(c, i + (s,))]
            if len(hits) != 1:
                budget_hit = False
                break
            i = i + (hits[0],)
            out.append(hits[0])
        if budget_hit:
            with self._lock:
                self.pending_set.append((c, len(out)))
        return Seq(tuple(out))

    def grade_for_digits(self, k: int) -> int:
        return self.M + 3 * k + 2

    def pending(self) -> Tuple[Tuple[Dot, int], ...]:
        return tuple(self.pending_set)


# ---------------------------------------------------------------------------
# The packaged separating function.


@dataclass
class UrysohnFunction:
    """A three-value separating function between two apart dots: a digit
    morphism into the ternary reals plus its realized [0,1] evaluation."""

    space: Space
    a: Dot
    b: Dot
    kind: str
    h_map: Morphism
    realized: Morphism
    builder: object

    def digits(self, c: Dot) -> Seq:
        return self.h_map.map(c)

    def pending(self) -> Tuple:
        return self.builder.pending()

    def value_bounds(
        self, x: Point, digit_goal: int, step_cap: Optional[int] = None
    ) -> Tuple[Fraction, Fraction]:
        """Sound rational bounds on the realized value at the point x,
        walking the stream until digit_goal ternary digits are available or
        the step budget runs out (fewer digits widen the bounds)."""
        needed = self.builder.grade_for_digits(digit_goal)
        if step_cap is None:
            step_cap = x.steps_for_grade(needed) + 1
        best = Seq(())
        for k in range(step_cap + 1):
            d = x.dot(k)
            got = self.digits(d)
            if len(got.syms) > len(best.syms):
                best = got
            if len(best.syms) >= digit_goal:
                break
            if self.space.grade(d) >= needed:
                break
        return seq_interval(best, 3)


def _package(space: Space, a: Dot, b: Dot, kind: str, builder) -> UrysohnFunction:
    target = std_space("sigma_3_real")
    h_map = Morphism(
        REFINEMENT,
        space,
        target,
        builder.digits,
        builder.grade_for_digits,
        tag=f"sep[{kind}]",
    )
    encode, _ = nary_codec(3)
    realized = compose(encode, h_map)
    return UrysohnFunction(space, a, b, kind, h_map, realized, builder)


def urysohn_fan(
    fann: Space, a: Dot, b: Dot, max_level_grade: int = 12
) -> UrysohnFunction:
    """The separating function between two apart same-grade dots of a
    finitely branching space, built from level-set splittings."""
    return _package(fann, a, b, "fan", _FanZones(fann, a, b, max_level_grade))


def urysohn_spread(
    space: Space, a: Dot, b: Dot, depth_budget: int = 3
) -> UrysohnFunction:
    """The separating function on a star-finite spread; classification is
    dot-local, and dots whose digit string was cut off by the depth budget
    are surfaced through pending()."""
    return _package(space, a, b, "spread", _SpreadZones(space, a, b, depth_budget))


# ---------------------------------------------------------------------------
# The induced metric.


def _pair_stream(space: Space) -> Iterator[Tuple[Dot, Dot]]:
    """The frozen enumeration of separator endpoint pairs: grade by grade,
    first (isolated, regular) pairs in level order, then apart regular pairs
    in level order.  Touching pairs separate nothing and are skipped."""
    for g in itertools.count(1):
        level = space.level(g)
        iso = [d for d in level if isinstance(d, Isolated) or space.is_isolated(d)]
        reg = [d for d in level if d not in iso]
        for i in iso:
            for c in reg:
                if space.apart(i, c):
                    yield (i, c)
        for j, c in enumerate(reg):
            for d in reg[j + 1 :]:
                if space.apart(c, d):
                    yield (c, d)


class MetricEvaluator:
    """The metric d(x,y) = sum_m 2^-m |f_m(x) - f_m(y)| over the frozen
    enumeration of separator pairs of a star-finite fann."""

    def __init__(
        self,
        space: Space,
        max_level_grade: int = 9,
        digit_cap: int = 4,
    ):
        if space.spraid_info is None or not space.spraid_info.finitely_branching:
            raise MetricDefect("the metric needs a finitely branching space")
        self.space = space
        self.max_level_grade = max_level_grade
        self.digit_cap = digit_cap
        self._pairs: List[Tuple[Dot, Dot]] = []
        self._pair_iter = _pair_stream(space)
        self._seps: Dict[int, UrysohnFunction] = {}
        self._values: Dict[Tuple[int, int, int], Tuple[Fraction, Fraction]] = {}
        self._lock = threading.RLock()

    def pair(self, m: int) -> Tuple[Dot, Dot]:
        with self._lock:
            while len(self._pairs) <= m:
                self._pairs.append(next(self._pair_iter))
            return self._pairs[m]

    def separator(self, m: int) -> UrysohnFunction:
        with self._lock:
            if m not in self._seps:
                a, b = self.pair(m)
                self._seps[m] = urysohn_fan(
                    self.space, a, b, max_level_grade=self.max_level_grade
                )
            return self._seps[m]

    def _value(self, m: int, x: Point, digits: int) -> Tuple[Fraction, Fraction]:
        key = (m, id(x), digits)
        if key not in self._values:
            self._values[key] = self.separator(m).value_bounds(x, digits)
        return self._values[key]


def metric_digit_goal(precision_bits: int) -> int:
    """Ternary digits per separator term for the requested output width."""
    return max(1, math.ceil((precision_bits + 2) * _LOG2_OVER_LOG3))


def evaluate_metric(
    ev: MetricEvaluator, x: Point, y: Point, precision_bits: int
) -> Tuple[Fraction, Fraction]:
    """Sound rational bounds [lo, hi] on d(x,y).

    Uses precision_bits + 1 series terms plus an exact tail bound.  The
    output width is at most 2^-(precision_bits-2) whenever the per-term digit
    goal fits under the evaluator's digit_cap (ceil(0.631*(precision_bits+2))
    <= digit_cap); beyond that the bounds stay sound but may be wider."""
    terms = precision_bits + 1
    goal = min(metric_digit_goal(precision_bits), ev.digit_cap)
    lo = Fraction(0)
    hi = Fraction(0)
    for m in range(terms):
        fx = ev._value(m, x, goal)
        fy = ev._value(m, y, goal)
        dlo = max(Fraction(0), fx[0] - fy[1], fy[0] - fx[1])
        dhi = min(Fraction(1), max(fx[1] - fy[0], fy[1] - fx[0]))
        w = Fraction(1, 2**m)
        lo += w * dlo
        hi += w * dhi
    hi += Fraction(2, 2**terms)  # remaining terms are at most sum 2^-m
    return (lo, hi)
