"""Basic dots: the finite-information approximations all spaces are built from.

A dot is a tagged value interpreted by its space: an interval (rational,
dyadic, or n-ary), a finite symbol sequence, a tuple, a trail, a metric ball
index, an isolated-point marker, or the maximal dot.  Dots are immutable and
compared by canonical form; a dyadic dot is never stored as a rational
interval (the overlapping-interval structure of the dyadic spaces depends on
dot identity).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple as Tup


class Dot:
    """Base class for all dot variants (value types, hash/eq by fields)."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class MaxDot(Dot):
    """The maximal dot; every dot of a space refines it."""

    def __repr__(self) -> str:
        return "MAX"


MAX = MaxDot()


@dataclass(frozen=True, slots=True)
class RatInterval(Dot):
    """Closed rational interval [lo, hi] with lo < hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not self.lo < self.hi:
            raise ValueError(f"RatInterval needs lo < hi, got [{self.lo}, {self.hi}]")

    def __repr__(self) -> str:
        return f"[{self.lo},{self.hi}]"


@dataclass(frozen=True, slots=True)
class DyadicInterval(Dot):
    """The dyadic dot [n/2^m, (n+2)/2^m]; width 2^(1-m)."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("DyadicInterval needs m >= 0")

    @property
    def lo(self) -> Fraction:
        return Fraction(self.n, 2**self.m)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.n + 2, 2**self.m)

    @property
    def width(self) -> Fraction:
        return Fraction(2, 2**self.m)

    def __repr__(self) -> str:
        return f"[{self.lo},{self.hi}]d"


@dataclass(frozen=True, slots=True)
class NaryInterval(Dot):
    """The n-ary dot [n/base^m, (n+1)/base^m]; width base^(-m)."""

    base: int
    n: int
    m: int

    def __post_init__(self) -> None:
        if self.base < 2:
            raise ValueError("NaryInterval needs base >= 2")
        if self.m < 0:
            raise ValueError("NaryInterval needs m >= 0")

    @property
    def lo(self) -> Fraction:
        return Fraction(self.n, self.base**self.m)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.n + 1, self.base**self.m)

    @property
    def width(self) -> Fraction:
        return Fraction(1, self.base**self.m)

    def __repr__(self) -> str:
        return f"[{self.lo},{self.hi}]@{self.base}"


@dataclass(frozen=True, slots=True)
class Seq(Dot):
    """A finite sequence of natural-number symbols (Baire/Cantor-style dot)."""

    syms: Tup[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "syms", tuple(int(s) for s in self.syms))
        if any(s < 0 for s in self.syms):
            raise ValueError("Seq symbols must be naturals")

    def __len__(self) -> int:
        return len(self.syms)

    def extends(self, other: "Seq") -> bool:
        """True iff self = other * tail (self refines other)."""
        n = len(other.syms)
        return len(self.syms) >= n and self.syms[:n] == other.syms

    def __repr__(self) -> str:
        return "<" + ",".join(str(s) for s in self.syms) + ">"


@dataclass(frozen=True, slots=True)
class TupleDot(Dot):
    """A finite tuple of dots (product and direct-limit spaces)."""

    items: Tup[Dot, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self) -> int:
        return len(self.items)

    def __repr__(self) -> str:
        return "(" + ",".join(repr(d) for d in self.items) + ")"


@dataclass(frozen=True, slots=True)
class Ball(Dot):
    """The metric ball B(a_i, 2^-s) around the i-th dense point."""

    i: int
    s: int

    def __repr__(self) -> str:
        return f"B({self.i},2^-{self.s})"


@dataclass(frozen=True, slots=True)
class Trail(Dot):
    """A strict refinement chain d_0 > d_1 > ... (dot of a trail space)."""

    items: Tup[Dot, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self) -> int:
        return len(self.items)

    @property
    def last(self) -> Dot:
        return self.items[-1]

    def extends(self, other: "Trail") -> bool:
        n = len(other.items)
        return len(self.items) >= n and self.items[:n] == other.items

    def __repr__(self) -> str:
        return "T(" + ";".join(repr(d) for d in self.items) + ")"


@dataclass(frozen=True, slots=True)
class Isolated(Dot):
    """The k-th dot on the isolated-point chain of an extended space."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("Isolated needs k >= 1")

    def __repr__(self) -> str:
        return f"iso({self.k})"


# ---------------------------------------------------------------------------
# Interval views: every interval-like dot exposes exact rational endpoints.
# ---------------------------------------------------------------------------


def endpoints(d: Dot) -> Tup[Fraction, Fraction]:
    """Exact rational endpoints of an interval-like dot."""
    if isinstance(d, (RatInterval, DyadicInterval, NaryInterval)):
        return (d.lo, d.hi)
    raise TypeError(f"dot {d!r} has no interval endpoints")


def _int_endpoints(d: Dot):
    """(lo_num, hi_num, den) with integer den > 0, or None for general dots.

    Avoids Fraction construction (and its gcd) on the dyadic/n-ary hot path.
    """
    if type(d) is DyadicInterval:
        return d.n, d.n + 2, 1 << d.m
    if type(d) is NaryInterval:
        return d.n, d.n + 1, d.base**d.m
    return None


def intervals_apart(a: Dot, b: Dot) -> bool:
    """Strict disjointness; shared endpoints mean touching, not apart."""
    fa, fb = _int_endpoints(a), _int_endpoints(b)
    if fa is not None and fb is not None:
        alo, ahi, ad = fa
        blo, bhi, bd = fb
        return ahi * bd < blo * ad or bhi * ad < alo * bd
    alo, ahi = endpoints(a)
    blo, bhi = endpoints(b)
    return ahi < blo or bhi < alo


def interval_contains(outer: Dot, inner: Dot) -> bool:
    """Endpoint containment: inner refines outer."""
    fo, fi = _int_endpoints(outer), _int_endpoints(inner)
    if fo is not None and fi is not None:
        olo, ohi, od = fo
        ilo, ihi, idn = fi
        return olo * idn <= ilo * od and ihi * od <= ohi * idn
    olo, ohi = endpoints(outer)
    ilo, ihi = endpoints(inner)
    return olo <= ilo and ihi <= ohi


def interval_gap(a: Dot, b: Dot) -> Fraction:
    """Distance between two interval dots (0 when they touch)."""
    alo, ahi = endpoints(a)
    blo, bhi = endpoints(b)
    if ahi < blo:
        return blo - ahi
    if bhi < alo:
        return alo - bhi
    return Fraction(0)


# ---------------------------------------------------------------------------
# JSON serialization (bit-exact round trip).
# ---------------------------------------------------------------------------


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _frac_parse(s: str) -> Fraction:
    return Fraction(s)


def dot_to_json(d: Dot) -> dict:
    """Serialize a dot to its canonical JSON object form."""
    if isinstance(d, MaxDot):
        return {"kind": "max"}
    if isinstance(d, DyadicInterval):
        return {"kind": "dyadic", "n": d.n, "m": d.m}
    if isinstance(d, RatInterval):
        return {"kind": "rat", "lo": _frac_str(d.lo), "hi": _frac_str(d.hi)}
    if isinstance(d, NaryInterval):
        return {"kind": "nary", "base": d.base, "n": d.n, "m": d.m}
    if isinstance(d, Seq):
        return {"kind": "seq", "syms": list(d.syms)}
    if isinstance(d, TupleDot):
        return {"kind": "tuple", "items": [dot_to_json(x) for x in d.items]}
    if isinstance(d, Ball):
        return {"kind": "ball", "i": d.i, "s": d.s}
    if isinstance(d, Trail):
        return {"kind": "trail", "items": [dot_to_json(x) for x in d.items]}
    if isinstance(d, Isolated):
        return {"kind": "iso", "k": d.k}
    raise TypeError(f"unserializable dot {d!r}")


def dot_from_json(obj: dict) -> Dot:
    """Parse the canonical JSON object form back into a dot."""
    kind = obj["kind"]
    if kind == "max":
        return MAX
    if kind == "dyadic":
        return DyadicInterval(int(obj["n"]), int(obj["m"]))
    if kind == "rat":
        return RatInterval(_frac_parse(obj["lo"]), _frac_parse(obj["hi"]))
    if kind == "nary":
        return NaryInterval(int(obj["base"]), int(obj["n"]), int(obj["m"]))
    if kind == "seq":
        return Seq(tuple(obj["syms"]))
    if kind == "tuple":
        return TupleDot(tuple(dot_from_json(x) for x in obj["items"]))
    if kind == "ball":
        return Ball(int(obj["i"]), int(obj["s"]))
    if kind == "trail":
        return Trail(tuple(dot_from_json(x) for x in obj["items"]))
    if kind == "iso":
        return Isolated(int(obj["k"]))
    raise ValueError(f"unknown dot kind {kind!r}")
