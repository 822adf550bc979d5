"""Pre-natural spaces: countable dot universes with decidable apartness and
refinement, plus the concrete spaces the rest of the library is built on.

A space descriptor bundles the two decidable relations, the maximal dot, a
frozen enumeration of the dot universe, and (for graded spaces) the
grade/successor structure.  Enumeration orders are canonical and frozen:
sequence spaces are length-then-lexicographic, interval dot systems use an
(m, n)-diagonal with zigzag n, and the maximal dot is always index 0.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

from .dots import (
    MAX,
    Ball,
    Dot,
    DyadicInterval,
    Isolated,
    MaxDot,
    NaryInterval,
    RatInterval,
    Seq,
    TupleDot,
    endpoints,
    interval_contains,
    intervals_apart,
)


class SpaceDefect(Exception):
    """A shipped-space contract was violated (missing refinement, stalled
    search, inconsistent oracle...)."""


def zigzag(j: int) -> int:
    """0, 1, -1, 2, -2, ... - the frozen signed-integer enumeration."""
    return (j + 1) // 2 if j % 2 == 1 else -(j // 2)


@dataclass(frozen=True)
class Successors:
    """Successor listing: a bounded prefix, plus a generator when the full
    set is infinite (infinitely branching node)."""

    dots: Tuple[Dot, ...]
    unbounded: bool = False
    more: Optional[Callable[[int], Dot]] = None  # k-th successor, k >= 0

    def prefix(self, count: int) -> Tuple[Dot, ...]:
        if not self.unbounded:
            return self.dots
        assert self.more is not None
        return tuple(self.more(k) for k in range(count))


@dataclass(frozen=True)
class SpraidInfo:
    grade: Callable[[Dot], int]
    successors: Callable[[Dot], Successors]
    predecessors: Callable[[Dot], Tuple[Dot, ...]]
    finitely_branching: bool


class Space:
    """A pre-natural space descriptor.

    Immutable after construction except for internal enumeration/memo caches,
    which are lock-protected so descriptors are safely shareable.
    """

    def __init__(
        self,
        name: str,
        apart: Callable[[Dot, Dot], bool],
        refines: Callable[[Dot, Dot], bool],
        max_dot: Dot,
        enum_factory: Callable[[], Iterator[Dot]],
        spraid_info: Optional[SpraidInfo] = None,
        width: Optional[Callable[[Dot], Fraction]] = None,
        family: str = "generic",
        base: Optional[int] = None,
        is_isolated: Optional[Callable[[Dot], bool]] = None,
    ):
        self.name = name
        self._apart = apart
        self._refines = refines
        self.max_dot = max_dot
        self._enum_factory = enum_factory
        self.spraid_info = spraid_info
        self._width = width
        self.family = family
        self.base = base
        self.is_isolated = is_isolated or (lambda d: False)
        self._lock = threading.RLock()
        self._enum_cache: List[Dot] = []
        self._enum_iter: Optional[Iterator[Dot]] = None
        self._index_cache: dict = {}
        self._pair_cache: List[Tuple[Dot, Dot]] = []
        self._level_cache: dict = {}

    # -- relations ---------------------------------------------------------

    def apart(self, a: Dot, b: Dot) -> bool:
        return self._apart(a, b)

    def touch(self, a: Dot, b: Dot) -> bool:
        return not self._apart(a, b)

    def refines(self, b: Dot, a: Dot) -> bool:
        """True iff b is a refinement of a (b below a)."""
        return self._refines(b, a)

    def strictly_refines(self, b: Dot, a: Dot) -> bool:
        return b != a and self._refines(b, a)

    # -- enumeration -------------------------------------------------------

    def enumerate_dot(self, i: int) -> Dot:
        with self._lock:
            if self._enum_iter is None:
                self._enum_iter = self._enum_factory()
            while len(self._enum_cache) <= i:
                self._enum_cache.append(next(self._enum_iter))
            return self._enum_cache[i]

    def index_of(self, d: Dot, limit: int = 500_000) -> int:
        """Enumeration index of a dot (mu-search with cache)."""
        with self._lock:
            if d in self._index_cache:
                return self._index_cache[d]
        i = len(self._enum_cache)
        # walk already-cached prefix first
        for j, e in enumerate(self._enum_cache):
            self._index_cache.setdefault(e, j)
        if d in self._index_cache:
            return self._index_cache[d]
        while i < limit:
            e = self.enumerate_dot(i)
            self._index_cache.setdefault(e, i)
            if e == d:
                return i
            i += 1
        raise SpaceDefect(f"{self.name}: dot {d!r} not found in first {limit} enumerated dots")

    def apart_pair(self, idx: int) -> Tuple[Dot, Dot]:
        """The idx-th apart dot pair (diagonal over the dot enumeration)."""
        with self._lock:
            if not hasattr(self, "_pair_iter"):
                self._pair_iter = self._apart_pair_gen()
            while len(self._pair_cache) <= idx:
                self._pair_cache.append(next(self._pair_iter))
            return self._pair_cache[idx]

    def _apart_pair_gen(self) -> Iterator[Tuple[Dot, Dot]]:
        for j in itertools.count(1):
            ej = self.enumerate_dot(j)
            for i in range(j):
                ei = self.enumerate_dot(i)
                if self._apart(ei, ej):
                    yield (ei, ej)

    # -- graded structure ----------------------------------------------------

    def grade(self, d: Dot) -> int:
        if self.spraid_info is None:
            raise SpaceDefect(f"{self.name}: no grade structure")
        return self.spraid_info.grade(d)

    def successors(self, d: Dot) -> Successors:
        if self.spraid_info is None:
            raise SpaceDefect(f"{self.name}: no successor structure")
        return self.spraid_info.successors(d)

    def predecessors(self, d: Dot) -> Tuple[Dot, ...]:
        if self.spraid_info is None:
            raise SpaceDefect(f"{self.name}: no predecessor structure")
        return self.spraid_info.predecessors(d)

    def level(self, g: int) -> Tuple[Dot, ...]:
        """All grade-g dots of a finitely branching graded space."""
        if self.spraid_info is None or not self.spraid_info.finitely_branching:
            raise SpaceDefect(f"{self.name}: level sets need a finitely branching space")
        with self._lock:
            if g in self._level_cache:
                return self._level_cache[g]
        if g == 0:
            out: Tuple[Dot, ...] = (self.max_dot,)
        else:
            prev = self.level(g - 1)
            seen = []
            seen_set = set()
            for d in prev:
                for s in self.successors(d).dots:
                    if s not in seen_set:
                        seen_set.add(s)
                        seen.append(s)
            out = tuple(seen)
        with self._lock:
            self._level_cache[g] = out
        return out

    def width(self, d: Dot) -> Fraction:
        if self._width is None:
            raise SpaceDefect(f"{self.name}: dots have no width")
        return self._width(d)

    @property
    def interval_like(self) -> bool:
        return self._width is not None

    def __repr__(self) -> str:
        return f"Space({self.name})"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    space: str
    depth: int
    entries: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries

    def __str__(self) -> str:
        head = f"validate {self.space} depth={self.depth}: "
        if self.ok:
            return head + "ok"
        return head + f"{len(self.entries)} violation(s)\n" + "\n".join(
            "  " + e for e in self.entries
        )


def validate_space(space: Space, depth: int) -> ValidationReport:
    """Check the pre-natural axioms on the first `depth` enumerated dots.

    Violations are report entries, not failures.  Uses bitset rows so the
    triple checks (monotonicity, transitivity) cost O(depth^2) word ops.
    """
    if depth < 1:
        raise ValueError("depth >= 1 required")
    rep = ValidationReport(space.name, depth)
    dots = [space.enumerate_dot(i) for i in range(depth)]
    n = len(dots)
    apart_row = [0] * n  # bit j of apart_row[i]: dots[j] # dots[i]
    ref_row = [0] * n  # bit j of ref_row[i]: dots[j] refines dots[i]
    for i in range(n):
        di = dots[i]
        if space.apart(di, di):
            rep.entries.append(f"antireflexivity: {di!r} # {di!r}")
        if not space.refines(di, di):
            rep.entries.append(f"reflexivity: not {di!r} <= {di!r}")
        if not space.refines(di, space.max_dot):
            rep.entries.append(f"max dot: {di!r} does not refine max")
        for j in range(n):
            if space.apart(dots[j], di):
                apart_row[i] |= 1 << j
            if space.refines(dots[j], di):
                ref_row[i] |= 1 << j
    for i in range(n):
        for j in range(i + 1, n):
            aij = bool(apart_row[i] & (1 << j))
            aji = bool(apart_row[j] & (1 << i))
            if aij != aji:
                rep.entries.append(f"symmetry: {dots[i]!r} vs {dots[j]!r}")
            rij = bool(ref_row[i] & (1 << j))
            rji = bool(ref_row[j] & (1 << i))
            if rij and rji:
                rep.entries.append(f"antisymmetry: {dots[i]!r} <=> {dots[j]!r}")
    for i in range(n):
        row = ref_row[i]
        j = 0
        r = row
        while r:
            if r & 1:
                # dots[j] refines dots[i]
                bad_mono = apart_row[i] & ~apart_row[j]
                if bad_mono:
                    k = bad_mono.bit_length() - 1
                    rep.entries.append(
                        f"monotonicity: {dots[j]!r} <= {dots[i]!r}, "
                        f"{dots[k]!r} # {dots[i]!r} but not # {dots[j]!r}"
                    )
                bad_trans = ref_row[j] & ~row
                if bad_trans:
                    k = bad_trans.bit_length() - 1
                    rep.entries.append(
                        f"transitivity: {dots[k]!r} <= {dots[j]!r} <= {dots[i]!r} "
                        f"but not {dots[k]!r} <= {dots[i]!r}"
                    )
            r >>= 1
            j += 1
    return rep


# ---------------------------------------------------------------------------
# Concrete spaces
# ---------------------------------------------------------------------------


def _dyadic_apart(a: Dot, b: Dot) -> bool:
    if isinstance(a, MaxDot) or isinstance(b, MaxDot):
        return False
    return intervals_apart(a, b)


def _dyadic_refines(b: Dot, a: Dot) -> bool:
    if isinstance(a, MaxDot):
        return True
    if isinstance(b, MaxDot):
        return False
    return interval_contains(a, b)


def _sigma_r() -> Space:
    def grade(d: Dot) -> int:
        return 0 if isinstance(d, MaxDot) else d.m + 1

    def successors(d: Dot) -> Successors:
        if isinstance(d, MaxDot):
            return Successors((), True, lambda k: DyadicInterval(zigzag(k), 0))
        return Successors(
            tuple(DyadicInterval(2 * d.n + i, d.m + 1) for i in range(3))
        )

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        if isinstance(d, MaxDot):
            return ()
        if d.m == 0:
            return (MAX,)
        if d.n % 2 == 0:
            return (
                DyadicInterval(d.n // 2 - 1, d.m - 1),
                DyadicInterval(d.n // 2, d.m - 1),
            )
        return (DyadicInterval((d.n - 1) // 2, d.m - 1),)

    def enum() -> Iterator[Dot]:
        yield MAX
        for d in itertools.count(0):
            for m in range(d + 1):
                yield DyadicInterval(zigzag(d - m), m)

    return Space(
        "sigma_R",
        _dyadic_apart,
        _dyadic_refines,
        MAX,
        enum,
        SpraidInfo(grade, successors, predecessors, False),
        width=lambda d: d.width,
        family="dyadic",
    )


def _sigma_01() -> Space:
    max_dot = DyadicInterval(0, 1)

    def valid(n: int, m: int) -> bool:
        return m >= 1 and 0 <= n and n + 2 <= 2**m

    def grade(d: Dot) -> int:
        return d.m - 1

    def successors(d: Dot) -> Successors:
        return Successors(
            tuple(DyadicInterval(2 * d.n + i, d.m + 1) for i in range(3))
        )

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        if d == max_dot:
            return ()
        if d.n % 2 == 0:
            cands = [(d.n // 2 - 1, d.m - 1), (d.n // 2, d.m - 1)]
        else:
            cands = [((d.n - 1) // 2, d.m - 1)]
        return tuple(DyadicInterval(n, m) for (n, m) in cands if valid(n, m))

    def enum() -> Iterator[Dot]:
        for m in itertools.count(1):
            for n in range(2**m - 1):
                yield DyadicInterval(n, m)

    return Space(
        "sigma_[0,1]",
        _dyadic_apart,
        _dyadic_refines,
        max_dot,
        enum,
        SpraidInfo(grade, successors, predecessors, True),
        width=lambda d: d.width,
        family="dyadic01",
    )


def _nary_r(base: int, name: str) -> Space:
    def grade(d: Dot) -> int:
        return 0 if isinstance(d, MaxDot) else d.m + 1

    def successors(d: Dot) -> Successors:
        if isinstance(d, MaxDot):
            return Successors((), True, lambda k: NaryInterval(base, zigzag(k), 0))
        return Successors(
            tuple(NaryInterval(base, base * d.n + i, d.m + 1) for i in range(base))
        )

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        if isinstance(d, MaxDot):
            return ()
        if d.m == 0:
            return (MAX,)
        return (NaryInterval(base, d.n // base, d.m - 1),)

    def enum() -> Iterator[Dot]:
        yield MAX
        for d in itertools.count(0):
            for m in range(d + 1):
                yield NaryInterval(base, zigzag(d - m), m)

    return Space(
        name,
        _dyadic_apart,
        _dyadic_refines,
        MAX,
        enum,
        SpraidInfo(grade, successors, predecessors, False),
        width=lambda d: d.width,
        family="nary",
        base=base,
    )


def _nary_01(base: int, name: str) -> Space:
    max_dot = NaryInterval(base, 0, 0)

    def grade(d: Dot) -> int:
        return d.m

    def successors(d: Dot) -> Successors:
        return Successors(
            tuple(NaryInterval(base, base * d.n + i, d.m + 1) for i in range(base))
        )

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        if d.m == 0:
            return ()
        return (NaryInterval(base, d.n // base, d.m - 1),)

    def enum() -> Iterator[Dot]:
        for m in itertools.count(0):
            for n in range(base**m):
                yield NaryInterval(base, n, m)

    return Space(
        name,
        _dyadic_apart,
        _dyadic_refines,
        max_dot,
        enum,
        SpraidInfo(grade, successors, predecessors, True),
        width=lambda d: d.width,
        family="nary01",
        base=base,
    )


def _seq_apart(a: Dot, b: Dot) -> bool:
    return not (a.extends(b) or b.extends(a))


def _seq_refines(b: Dot, a: Dot) -> bool:
    return b.extends(a)


def _baire() -> Space:
    def grade(d: Dot) -> int:
        return len(d.syms)

    def successors(d: Dot) -> Successors:
        return Successors((), True, lambda k: Seq(d.syms + (k,)))

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        return (Seq(d.syms[:-1]),) if d.syms else ()

    return Space(
        "baire",
        _seq_apart,
        _seq_refines,
        Seq(()),
        baire_enum,
        SpraidInfo(grade, successors, predecessors, False),
        family="seq",
    )


def baire_enum() -> Iterator[Dot]:
    """Frozen bijection N <-> N*: growing cap, length-then-lex within a cap.

    A sequence has weight max(len, max(sym)+1); it is emitted at cap = weight.
    The rank satisfies rank(a) <= rank(a * b).
    """
    yield Seq(())
    for cap in itertools.count(1):
        for ln in range(1, cap + 1):
            for syms in itertools.product(range(cap), repeat=ln):
                weight = max(ln, max(syms) + 1)
                if weight == cap:
                    yield Seq(syms)


def _baire_weight_count(ln: int, w: int) -> int:
    """Sequences of length ln over range(w) with weight exactly w."""
    if ln == w:
        return w**ln
    return w**ln - (w - 1) ** ln


def _baire_cap_total(w: int) -> int:
    return sum(_baire_weight_count(ln, w) for ln in range(1, w + 1))


def baire_rank(d: Seq) -> int:
    """Closed-form rank of a finite sequence in the frozen baire enumeration
    (monotone along extension: rank(a) <= rank(a*b))."""
    s = d.syms
    if not s:
        return 0
    ln = len(s)
    w = max(ln, max(s) + 1)
    r = 1 + sum(_baire_cap_total(c) for c in range(1, w))
    r += sum(_baire_weight_count(l, w) for l in range(1, ln))
    if ln == w:
        pos = 0
        for x in s:
            pos = pos * w + x
    else:
        lex = 0
        for x in s:
            lex = lex * w + x
        # drop lex-smaller tuples that never use the top symbol w-1
        excl = 0
        clean = True
        for i, x in enumerate(s):
            if clean:
                excl += min(x, w - 1) * (w - 1) ** (ln - 1 - i)
            if x == w - 1:
                clean = False
        pos = lex - excl
    return r + pos


def baire_unrank(r: int) -> Seq:
    """Inverse of baire_rank."""
    if r < 0:
        raise ValueError("rank must be >= 0")
    if r == 0:
        return Seq(())
    r -= 1
    w = 1
    while r >= _baire_cap_total(w):
        r -= _baire_cap_total(w)
        w += 1
    ln = 1
    while r >= _baire_weight_count(ln, w):
        r -= _baire_weight_count(ln, w)
        ln += 1
    syms: List[int] = []
    has_top = False
    for i in range(ln):
        rest = ln - 1 - i
        for x in range(w):
            if ln == w or has_top or x == w - 1:
                cnt = w**rest
            else:
                cnt = w**rest - (w - 1) ** rest
            if r < cnt:
                syms.append(x)
                has_top = has_top or x == w - 1
                break
            r -= cnt
        else:
            raise AssertionError("unrank digit search fell through")
    return Seq(tuple(syms))


def _sigma_k(k: int, name: str, apart=None, family: str = "seq") -> Space:
    def grade(d: Dot) -> int:
        return len(d.syms)

    def successors(d: Dot) -> Successors:
        return Successors(tuple(Seq(d.syms + (i,)) for i in range(k)))

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        return (Seq(d.syms[:-1]),) if d.syms else ()

    def enum() -> Iterator[Dot]:
        for ln in itertools.count(0):
            for syms in itertools.product(range(k), repeat=ln):
                yield Seq(syms)

    width = None
    if family == "seq_real":
        width = lambda d: Fraction(1, k ** len(d.syms))  # noqa: E731
    return Space(
        name,
        apart or _seq_apart,
        _seq_refines,
        Seq(()),
        enum,
        SpraidInfo(grade, successors, predecessors, True),
        width=width,
        family=family,
        base=k,
    )


def seq_interval(d: Seq, base: int) -> Tuple[Fraction, Fraction]:
    """The base-b interval [val, val + b^-len] a digit string denotes."""
    val = 0
    for s in d.syms:
        val = val * base + s
    lo = Fraction(val, base ** len(d.syms))
    return (lo, lo + Fraction(1, base ** len(d.syms)))


def _sigma_k_real(k: int, name: str) -> Space:
    def apart(a: Dot, b: Dot) -> bool:
        alo, ahi = seq_interval(a, k)
        blo, bhi = seq_interval(b, k)
        return ahi < blo or bhi < alo

    return _sigma_k(k, name, apart=apart, family="seq_real")


def _chain(k: int, name: str) -> Space:
    """The k-point space: k disjoint constant-digit chains under the root."""

    def grade(d: Dot) -> int:
        return len(d.syms)

    def successors(d: Dot) -> Successors:
        if not d.syms:
            return Successors(tuple(Seq((i,)) for i in range(k)))
        return Successors((Seq(d.syms + (d.syms[0],)),))

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        return (Seq(d.syms[:-1]),) if d.syms else ()

    def enum() -> Iterator[Dot]:
        yield Seq(())
        for ln in itertools.count(1):
            for i in range(k):
                yield Seq((i,) * ln)

    def is_isolated(d: Dot) -> bool:
        return bool(d.syms)

    return Space(
        name,
        _seq_apart,
        _seq_refines,
        Seq(()),
        enum,
        SpraidInfo(grade, successors, predecessors, True),
        family="chain",
        base=k,
        is_isolated=is_isolated,
    )


def rational_enum() -> Iterator[Fraction]:
    """Frozen enumeration of the rationals: diagonal over (zigzag num, den)."""
    seen = set()
    for t in itertools.count(0):
        for j in range(t + 1):
            num = zigzag(j)
            den = t - j + 1
            q = Fraction(num, den)
            if q not in seen:
                seen.add(q)
                yield q


def _r_rat() -> Space:
    def apart(a: Dot, b: Dot) -> bool:
        if isinstance(a, MaxDot) or isinstance(b, MaxDot):
            return False
        return intervals_apart(a, b)

    def refines(b: Dot, a: Dot) -> bool:
        if isinstance(a, MaxDot):
            return True
        if isinstance(b, MaxDot):
            return False
        return interval_contains(a, b)

    def enum() -> Iterator[Dot]:
        yield MAX
        rats: List[Fraction] = []
        gen = rational_enum()

        def rat(i: int) -> Fraction:
            while len(rats) <= i:
                rats.append(next(gen))
            return rats[i]

        for t in itertools.count(1):
            for i in range(t + 1):
                lo, hi = rat(i), rat(t - i)
                if lo < hi:
                    yield RatInterval(lo, hi)

    return Space(
        "R_rat",
        apart,
        refines,
        MAX,
        enum,
        None,
        width=lambda d: d.hi - d.lo,
        family="rat",
    )


_STD_BUILDERS: dict = {
    "R_rat": _r_rat,
    "sigma_R": _sigma_r,
    "sigma_[0,1]": _sigma_01,
    "R_bin": lambda: _nary_r(2, "R_bin"),
    "R_ter": lambda: _nary_r(3, "R_ter"),
    "R_dec": lambda: _nary_r(10, "R_dec"),
    "[0,1]_bin": lambda: _nary_01(2, "[0,1]_bin"),
    "[0,1]_ter": lambda: _nary_01(3, "[0,1]_ter"),
    "baire": _baire,
    "cantor": lambda: _sigma_k(2, "cantor"),
    "T2": lambda: _chain(2, "T2"),
    "T3": lambda: _chain(3, "T3"),
    # internal names used by morphisms/encodings/metric:
    "sigma_2": lambda: _sigma_k(2, "sigma_2"),
    "sigma_3": lambda: _sigma_k(3, "sigma_3"),
    "sigma_2_real": lambda: _sigma_k_real(2, "sigma_2_real"),
    "sigma_3_real": lambda: _sigma_k_real(3, "sigma_3_real"),
}

_STD_CACHE: dict = {}
_STD_LOCK = threading.Lock()


def std_space(name: str) -> Space:
    """The named standard space (descriptors are cached and shared)."""
    with _STD_LOCK:
        if name not in _STD_CACHE:
            if name not in _STD_BUILDERS:
                raise ValueError(f"unknown space name {name!r}")
            _STD_CACHE[name] = _STD_BUILDERS[name]()
        return _STD_CACHE[name]


def successors(space: Space, a: Dot) -> Successors:
    return space.successors(a)


def predecessors(space: Space, a: Dot) -> Tuple[Dot, ...]:
    return space.predecessors(a)


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InfiniteFactors:
    """An infinite factor list: factory(i) is the i-th factor space."""

    factory: Callable[[int], Space]


def product(factors, kind: str = "sigma") -> Space:
    """Product space over a finite factor list (or InfiniteFactors).

    Kinds: "simple" (coordinatewise refinement), "sigma" (graded product of
    graded factors; equal coordinate grades), "circ" (strict on isolated
    coordinates), "strict" (strict on all coordinates).  Apartness is always
    existence of an apart coordinate pair.
    """
    if kind not in ("simple", "sigma", "circ", "strict"):
        raise ValueError(f"unknown product kind {kind!r}")
    if isinstance(factors, InfiniteFactors):
        return _infinite_sigma(factors)
    factors = list(factors)
    n = len(factors)
    if kind == "sigma":
        for f in factors:
            if f.spraid_info is None:
                raise ValueError("sigma product needs graded factors")

    def apart(a: Dot, b: Dot) -> bool:
        return any(
            factors[i].apart(a.items[i], b.items[i])
            for i in range(min(len(a.items), len(b.items)))
        )

    def refines_simple(b: Dot, a: Dot) -> bool:
        if len(b.items) < len(a.items):
            return False
        return all(factors[i].refines(b.items[i], a.items[i]) for i in range(len(a.items)))

    if kind == "circ":

        def refines(b: Dot, a: Dot) -> bool:
            if b == a:
                return True
            if not refines_simple(b, a):
                return False
            return all(
                b.items[i] != a.items[i]
                for i in range(len(a.items))
                if factors[i].is_isolated(a.items[i])
            )

    elif kind == "strict":

        def refines(b: Dot, a: Dot) -> bool:
            if b == a:
                return True
            if len(b.items) < len(a.items):
                return False
            return all(
                factors[i].strictly_refines(b.items[i], a.items[i])
                for i in range(len(a.items))
            )

    else:
        refines = refines_simple

    max_dot = TupleDot(tuple(f.max_dot for f in factors))
    info = None
    width = None
    if kind == "sigma":

        def grade(d: Dot) -> int:
            return factors[0].grade(d.items[0])

        def succs(d: Dot) -> Successors:
            per = [factors[i].successors(d.items[i]) for i in range(n)]
            if any(s.unbounded for s in per):

                def more(k: int) -> Dot:
                    # diagonal over the per-coordinate successor indices
                    idxs = _tuple_unrank(k, n)
                    return TupleDot(
                        tuple(
                            per[i].more(idxs[i]) if per[i].unbounded else per[i].dots[
                                idxs[i] % len(per[i].dots)
                            ]
                            for i in range(n)
                        )
                    )

                return Successors((), True, more)
            return Successors(
                tuple(TupleDot(c) for c in itertools.product(*(s.dots for s in per)))
            )

        def preds(d: Dot) -> Tuple[Dot, ...]:
            per = [factors[i].predecessors(d.items[i]) for i in range(n)]
            return tuple(TupleDot(c) for c in itertools.product(*per))

        info = SpraidInfo(
            grade, succs, preds, all(f.spraid_info.finitely_branching for f in factors)
        )
        if all(f.interval_like for f in factors):
            width = lambda d: max(factors[i].width(d.items[i]) for i in range(n))  # noqa: E731

    def enum() -> Iterator[Dot]:
        yield max_dot
        for t in itertools.count(1):
            for idxs in _compositions(t, n):
                items = tuple(factors[i].enumerate_dot(idxs[i]) for i in range(n))
                d = TupleDot(items)
                if d == max_dot:
                    continue
                if kind == "sigma":
                    gs = {factors[i].grade(items[i]) for i in range(n)}
                    if len(gs) != 1:
                        continue
                yield d

    sp = Space(
        f"product[{kind}](" + ",".join(f.name for f in factors) + ")",
        apart,
        refines,
        max_dot,
        enum,
        info,
        width=width,
        family="product",
    )
    sp.factors = tuple(factors)
    return sp


def _compositions(total: int, n: int) -> Iterator[Tuple[int, ...]]:
    """All n-tuples of naturals summing to total (lexicographic)."""
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


def _tuple_unrank(k: int, n: int) -> Tuple[int, ...]:
    """The k-th n-tuple of naturals in the diagonal-by-total order."""
    for t in itertools.count(0):
        for tup in _compositions(t, n):
            if k == 0:
                return tup
            k -= 1
    raise AssertionError


def _infinite_sigma(factors: InfiniteFactors) -> Space:
    """Infinite sigma product: grade-n dots are n-tuples of grade-n dots."""
    fac = factors.factory

    def apart(a: Dot, b: Dot) -> bool:
        return any(
            fac(i).apart(a.items[i], b.items[i])
            for i in range(min(len(a.items), len(b.items)))
        )

    def refines(b: Dot, a: Dot) -> bool:
        if len(b.items) < len(a.items):
            return False
        return all(fac(i).refines(b.items[i], a.items[i]) for i in range(len(a.items)))

    max_dot = TupleDot(())

    def grade(d: Dot) -> int:
        return len(d.items)

    def succs(d: Dot) -> Successors:
        g = len(d.items)
        per = [fac(i).successors(d.items[i]) for i in range(g)]
        new_levels = _graded_level(fac(g), g + 1)
        if any(s.unbounded for s in per) or new_levels is None:
            raise SpaceDefect("infinite sigma product: successors not materializable")
        combos = itertools.product(*(s.dots for s in per), new_levels)
        return Successors(tuple(TupleDot(c) for c in combos))

    def preds(d: Dot) -> Tuple[Dot, ...]:
        g = len(d.items)
        if g == 0:
            return ()
        per = [fac(i).predecessors(d.items[i]) for i in range(g - 1)]
        # dropping the last coordinate, each remaining one steps up a grade
        return tuple(TupleDot(c) for c in itertools.product(*per)) if g > 1 else (max_dot,)

    def enum() -> Iterator[Dot]:
        yield max_dot
        for g in itertools.count(1):
            levels = [_graded_level(fac(i), g) for i in range(g)]
            if any(lv is None for lv in levels):
                return
            for combo in itertools.product(*levels):
                yield TupleDot(combo)

    def fin_branching() -> bool:
        return fac(0).spraid_info.finitely_branching

    info = SpraidInfo(grade, succs, preds, fin_branching())
    return Space(
        "product[sigma](infinite)", apart, refines, max_dot, enum, info, family="product"
    )


def _graded_level(space: Space, g: int):
    if space.spraid_info is None or not space.spraid_info.finitely_branching:
        return None
    return space.level(g)


# ---------------------------------------------------------------------------
# Direct limit R^infinity
# ---------------------------------------------------------------------------


def direct_limit_Romega() -> Space:
    """Eventually-vanishing real sequences: finite tuples of rational
    intervals; excess coordinates of the refining (longer) dot must contain 0,
    and a longer dot is apart from a shorter one when an excess coordinate
    excludes 0."""

    zero = Fraction(0)

    def apart(a: Dot, b: Dot) -> bool:
        short, long_ = (a, b) if len(a.items) <= len(b.items) else (b, a)
        nn = len(short.items)
        for i in range(nn):
            if intervals_apart(short.items[i], long_.items[i]):
                return True
        for i in range(nn, len(long_.items)):
            lo, hi = endpoints(long_.items[i])
            if zero < lo or hi < zero:
                return True
        return False

    def refines(b: Dot, a: Dot) -> bool:
        if len(b.items) < len(a.items):
            return False
        for i in range(len(a.items)):
            if not interval_contains(a.items[i], b.items[i]):
                return False
        for i in range(len(a.items), len(b.items)):
            lo, hi = endpoints(b.items[i])
            if not (lo <= zero <= hi):
                return False
        return True

    def enum() -> Iterator[Dot]:
        yield TupleDot(())
        rat = std_space("R_rat")
        for t in itertools.count(1):
            for ln in range(1, t + 1):
                budget = t - ln
                for idxs in _compositions(budget, ln):
                    # R_rat enumeration index 0 is MAX; shift past it
                    items = tuple(rat.enumerate_dot(i + 1) for i in idxs)
                    yield TupleDot(items)

    return Space(
        "R^omega", apart, refines, TupleDot(()), enum, None, family="dirlim"
    )


# ---------------------------------------------------------------------------
# Metric-to-spread
# ---------------------------------------------------------------------------

BELOW = "below"
ABOVE = "above"


class DistanceOracle:
    """Two-sided distance comparisons over an enumerated dense point set.

    compare(i, j, q, slack) answers BELOW when d(a_i,a_j) < q, or ABOVE when
    d(a_i,a_j) > q - slack (either answer is acceptable in the overlap).
    """

    def __init__(self, compare: Callable[[int, int, Fraction, Fraction], str],
                 dense_point_count: Optional[int] = None):
        self._compare = compare
        self.dense_point_count = dense_point_count

    def compare(self, i: int, j: int, q: Fraction, slack: Fraction) -> str:
        ans = self._compare(i, j, q, slack)
        if ans not in (BELOW, ABOVE):
            raise SpaceDefect(f"oracle answer {ans!r} not below/above")
        return ans


def rational_points_oracle(points: Callable[[int], Fraction],
                           count: Optional[int] = None) -> DistanceOracle:
    """Exact oracle for a rational dense point enumeration: BELOW iff d < q."""

    def compare(i: int, j: int, q: Fraction, slack: Fraction) -> str:
        d = abs(points(i) - points(j))
        return BELOW if d < q else ABOVE

    return DistanceOracle(compare, count)


def unit_interval_dense_points(i: int) -> Fraction:
    """Frozen dense enumeration of [0,1]: 0, 1, then odd k/2^j by level."""
    if i == 0:
        return Fraction(0)
    if i == 1:
        return Fraction(1)
    i -= 2
    j = 1
    while i >= 2 ** (j - 1):
        i -= 2 ** (j - 1)
        j += 1
    return Fraction(2 * i + 1, 2**j)


def metric_to_spread(oracle: DistanceOracle) -> Space:
    """The spread of dyadic-radius balls over an oracle-given metric.

    refines(Ball(n,s), Ball(m,t)) is decided by one oracle call with
    q = 2^-t - 2^-s (slack 2^-2s); apart with q = 2^-s + 2^-t + 2^-s-t
    (slack 2^-s-t-1).  Answers are memoized so both relations are stable,
    and cross-checked for consistency.
    """
    memo: dict = {}
    bounds: dict = {}  # (i,j) -> [max certified lower bound, min certified upper bound]
    lock = threading.RLock()

    def ask(i: int, j: int, s: int, t: int, is_ref: bool) -> str:
        # q and slack are determined by (s, t, is_ref); keying the memo on
        # the integer exponents keeps cache hits free of Fraction hashing.
        if i > j:
            i, j = j, i
        key = (i, j, s, t, is_ref)
        with lock:
            if key in memo:
                return memo[key]
            if is_ref:
                q = Fraction(1, 2**s) - Fraction(1, 2**t)
                slack = Fraction(1, 2 ** (2 * t))
            else:
                q = (
                    Fraction(1, 2**s)
                    + Fraction(1, 2**t)
                    + Fraction(1, 2 ** (s + t))
                )
                slack = Fraction(1, 2 ** (s + t + 1))
            ans = oracle.compare(i, j, q, slack)
            # BELOW(q) certifies d < q; ABOVE(q) certifies d > q - slack.
            # Keep the tightest certified bounds per pair; any crossing is
            # an inconsistent oracle.
            lohi = bounds.setdefault((i, j), [None, None])
            if ans == BELOW:
                if lohi[0] is not None and q <= lohi[0]:
                    raise SpaceDefect(
                        f"inconsistent oracle on pair ({i},{j}): "
                        f"below {q} vs certified lower bound {lohi[0]}"
                    )
                if lohi[1] is None or q < lohi[1]:
                    lohi[1] = q
            else:
                low = q - slack
                if lohi[1] is not None and lohi[1] <= low:
                    raise SpaceDefect(
                        f"inconsistent oracle on pair ({i},{j}): "
                        f"above {q}-{slack} vs certified upper bound {lohi[1]}"
                    )
                if lohi[0] is None or low > lohi[0]:
                    lohi[0] = low
            memo[key] = ans
            return ans

    def refines(b: Dot, a: Dot) -> bool:
        if isinstance(a, MaxDot):
            return True
        if isinstance(b, MaxDot):
            return False
        if b == a:
            return True
        if b.s <= a.s:
            return False
        return ask(b.i, a.i, a.s, b.s, True) == BELOW

    def apart(a: Dot, b: Dot) -> bool:
        if isinstance(a, MaxDot) or isinstance(b, MaxDot):
            return False
        if a == b:
            return False
        return ask(a.i, b.i, a.s, b.s, False) == ABOVE

    cnt = oracle.dense_point_count

    def enum() -> Iterator[Dot]:
        yield MAX
        for t in itertools.count(0):
            for s in range(t + 1):
                n = t - s
                if cnt is not None and n >= cnt:
                    continue
                yield Ball(n, s)

    return Space("metric_spread", apart, refines, MAX, enum, None, family="metric")


# ---------------------------------------------------------------------------
# Isolated-point extension
# ---------------------------------------------------------------------------


def extend_with_isolated_point(space: Space) -> Space:
    """Add the chain iso(1) > iso(2) > ... under the maximal dot, apart from
    every non-maximal original dot; grades are preserved, grd(iso(k)) = k."""
    if space.spraid_info is None:
        raise ValueError("isolated-point extension needs a graded space")
    inner = space.spraid_info
    max_dot = space.max_dot

    def apart(a: Dot, b: Dot) -> bool:
        ia, ib = isinstance(a, Isolated), isinstance(b, Isolated)
        if ia and ib:
            return False
        if ia:
            return b != max_dot
        if ib:
            return a != max_dot
        return space.apart(a, b)

    def refines(b: Dot, a: Dot) -> bool:
        ia, ib = isinstance(a, Isolated), isinstance(b, Isolated)
        if ia and ib:
            return b.k >= a.k
        if ib:
            return a == max_dot
        if ia:
            return False
        return space.refines(b, a)

    def grade(d: Dot) -> int:
        return d.k if isinstance(d, Isolated) else inner.grade(d)

    def succs(d: Dot) -> Successors:
        if isinstance(d, Isolated):
            return Successors((Isolated(d.k + 1),))
        s = inner.successors(d)
        if d == max_dot:
            if s.unbounded:
                return Successors(
                    (), True, lambda k: Isolated(1) if k == 0 else s.more(k - 1)
                )
            return Successors(s.dots + (Isolated(1),))
        return s

    def preds(d: Dot) -> Tuple[Dot, ...]:
        if isinstance(d, Isolated):
            return (max_dot,) if d.k == 1 else (Isolated(d.k - 1),)
        return inner.predecessors(d)

    def enum() -> Iterator[Dot]:
        k = 0
        base_iter = None

        def base(i):
            return space.enumerate_dot(i)

        for i in itertools.count(0):
            if i % 2 == 0:
                yield base(i // 2)
            else:
                k += 1
                yield Isolated(k)

    def is_isolated(d: Dot) -> bool:
        return isinstance(d, Isolated) or space.is_isolated(d)

    return Space(
        space.name + "^+",
        apart,
        refines,
        max_dot,
        enum,
        SpraidInfo(grade, succs, preds, inner.finitely_branching),
        width=space._width,
        family="extended",
        base=space.base,
        is_isolated=is_isolated,
    )
