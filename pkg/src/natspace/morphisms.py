"""Dot-level morphisms: the general algebra (laws, composition, validation)
and the concrete maps (interval arithmetic, the Cantor function, n-ary
codecs, line calls, and the Baire diagonalization).

A refinement morphism is a total dot-to-dot map that reflects apartness,
preserves refinement, and sends point streams to point streams (law (iii) is
discharged by a liveness bound: target grade g needs source grade
liveness(g)).  A trail morphism consumes strict-descent trails instead of
single dots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

from .dots import (
    MAX,
    Dot,
    DyadicInterval,
    MaxDot,
    NaryInterval,
    Seq,
    Trail,
    TupleDot,
    endpoints,
)
from .points import Point, PointDefect, approximate
from .spaces import Space, SpaceDefect, product, std_space

REFINEMENT = "refinement"
TRAIL = "trail"


class MorphismDefect(Exception):
    pass


@dataclass
class Morphism:
    kind: str
    source: Space
    target: Space
    map: Callable[[Dot], Dot]
    liveness: Callable[[int], int]
    tag: str = ""
    parts: Tuple = ()
    # optional: per-point liveness refinement (used by magnitude-dependent ops)
    dynamic_liveness: Optional[Callable[[Point], Callable[[int], int]]] = None

    def __call__(self, d: Dot) -> Dot:
        return self.map(d)

    def __repr__(self) -> str:
        return f"Morphism({self.tag or self.kind}: {self.source.name}->{self.target.name})"


def identity(space: Space) -> Morphism:
    return Morphism(REFINEMENT, space, space, lambda d: d, lambda g: g, tag="id")


# ---------------------------------------------------------------------------
# Applying morphisms to points
# ---------------------------------------------------------------------------


def strict_trail_of(space: Space, dots: Tuple[Dot, ...]) -> Tuple[Dot, ...]:
    """The strict-descent subsequence (each kept dot strictly refines the
    previous kept dot)."""
    out: List[Dot] = []
    for d in dots:
        if not out or space.strictly_refines(d, out[-1]):
            out.append(d)
    return tuple(out)


def apply_point(f: Morphism, p: Point) -> Point:
    """The image point: maps the stream dot by dot (refinement kind) or maps
    growing strict trails of the stream (trail kind)."""
    liveness = f.liveness
    if f.dynamic_liveness is not None:
        liveness = f.dynamic_liveness(p)

    if f.kind == REFINEMENT:

        def gen():
            for k in itertools.count(0):
                yield f.map(p.dot(k))

    else:

        def gen():
            for k in itertools.count(0):
                trail = strict_trail_of(p.space, p.prefix(k + 1))
                yield f.map(Trail(trail))

    def steps(g: int) -> int:
        return p.steps_for_grade(liveness(g)) + 1

    return Point(f.target, gen, steps_for_grade=steps, name=f"{f.tag or 'f'}({p.name})")


def compose(g: Morphism, f: Morphism) -> Morphism:
    """Composition g after f; trail inputs are lifted through f trail-wise."""
    if f.target is not g.source and f.target.name != g.source.name:
        raise MorphismDefect(
            f"compose: {f!r} targets {f.target.name}, {g!r} expects {g.source.name}"
        )
    tag = f"({g.tag or 'g'} . {f.tag or 'f'})"
    live = lambda gr: f.liveness(g.liveness(gr))  # noqa: E731

    if f.kind == REFINEMENT and g.kind == REFINEMENT:
        return Morphism(
            REFINEMENT, f.source, g.target, lambda d: g.map(f.map(d)), live,
            tag=tag, parts=(g, f),
        )
    if f.kind == TRAIL and g.kind == REFINEMENT:
        return Morphism(
            TRAIL, f.source, g.target, lambda t: g.map(f.map(t)), live,
            tag=tag, parts=(g, f),
        )

    # g is a trail morphism: lift f to trails of its target
    def lifted(t: Dot) -> Dot:
        items = t.items
        if f.kind == REFINEMENT:
            imgs = tuple(f.map(d) for d in items)
        else:
            imgs = tuple(f.map(Trail(items[: i + 1])) for i in range(len(items)))
        return g.map(Trail(strict_trail_of(f.target, imgs)))

    return Morphism(TRAIL, f.source, g.target, lifted, live, tag=tag, parts=(g, f))


# ---------------------------------------------------------------------------
# Law checking
# ---------------------------------------------------------------------------


@dataclass
class MorphismReport:
    morphism: str
    depth: int
    entries: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries

    def __str__(self) -> str:
        head = f"check {self.morphism} depth={self.depth}: "
        return head + ("ok" if self.ok else f"{len(self.entries)} violation(s)\n"
                       + "\n".join("  " + e for e in self.entries))


def _trail_samples(space: Space, depth: int) -> List[Trail]:
    """A deterministic sample of trail dots: strict-descent chains grown from
    enumerated dots via successor walks."""
    out: List[Trail] = []
    for i in range(depth):
        d = space.enumerate_dot(i)
        if d == space.max_dot:
            continue
        chain = [d]
        while len(chain) < 4:
            s = space.successors(chain[-1]).prefix(2)
            if not s:
                break
            chain.append(s[0])
        for ln in range(1, len(chain) + 1):
            out.append(Trail(tuple(chain[:ln])))
            if len(out) >= depth:
                return out
    return out


def check_morphism(f: Morphism, depth: int) -> MorphismReport:
    """Laws (i) and (ii) on enumerated dot pairs; law (iii) on sampled
    canonical points (stream stays refining, grades grow)."""
    if depth < 1:
        raise ValueError("depth >= 1 required")
    rep = MorphismReport(f.tag or repr(f), depth)
    if f.kind == REFINEMENT:
        dots: List[Dot] = [f.source.enumerate_dot(i) for i in range(depth)]
        src_apart = f.source.apart
        src_ref = f.source.refines
    else:
        from .encodings import trail_space

        tsp = trail_space(f.source)
        dots = list(_trail_samples(f.source, depth))
        src_apart = tsp.apart
        src_ref = tsp.refines
    imgs = [f.map(d) for d in dots]
    for i, a in enumerate(dots):
        for j, b in enumerate(dots):
            if i == j:
                continue
            if f.target.apart(imgs[i], imgs[j]) and not src_apart(a, b):
                rep.entries.append(
                    f"law (i): f({a!r})={imgs[i]!r} # f({b!r})={imgs[j]!r} "
                    f"but sources touch"
                )
            if src_ref(a, b) and not f.target.refines(imgs[i], imgs[j]):
                rep.entries.append(
                    f"law (ii): {a!r} <= {b!r} but f-images "
                    f"{imgs[i]!r} !<= {imgs[j]!r}"
                )
    # law (iii), spot check: image streams of sampled canonical points refine
    if f.kind == REFINEMENT and f.source.spraid_info is not None:
        from .points import canonical_point

        samples = [f.source.max_dot]
        for i in range(1, depth):
            d = f.source.enumerate_dot(i)
            if d != f.source.max_dot:
                samples.append(d)
                break
        for a in samples:
            p = canonical_point(f.source, a)
            q = apply_point(f, p)
            try:
                prev = None
                for k in range(6):
                    d = q.dot(k)
                    if prev is not None and not f.target.refines(d, prev):
                        rep.entries.append(f"law (iii): image stream of {a!r} not refining")
                    prev = d
            except PointDefect as e:
                rep.entries.append(f"law (iii): {e}")
    return rep


# ---------------------------------------------------------------------------
# Interval arithmetic on sigma_R
# ---------------------------------------------------------------------------


def sigma_rr() -> Space:
    """The shared sigma product sigma_R x sigma_R (arith binary source)."""
    global _SIGMA_RR
    if _SIGMA_RR is None:
        s = std_space("sigma_R")
        _SIGMA_RR = product([s, s], "sigma")
    return _SIGMA_RR


_SIGMA_RR: Optional[Space] = None


def round_hull(lo: Fraction, hi: Fraction, m_hint: int = 0) -> Dot:
    """The dyadic dot with maximal exponent m containing [lo,hi], least n as
    tie-break; MaxDot when no dot contains the hull.  Zero-width hulls round
    at exponent m_hint+1 so output grade tracks input grade."""
    if hi < lo:
        raise ValueError("empty hull")
    if hi == lo:
        m = m_hint + 1
        n = math.ceil(hi * 2**m) - 2
        return DyadicInterval(n, m)

    def fits(m: int) -> Optional[int]:
        n_min = math.ceil(hi * 2**m) - 2
        n_max = math.floor(lo * 2**m)
        return n_min if n_min <= n_max else None

    if fits(0) is None:
        return MAX
    m = 0
    while fits(m + 1) is not None:
        m += 1
    return DyadicInterval(fits(m), m)


def _hull_neg(lo, hi):
    return (-hi, -lo)


def _hull_abs(lo, hi):
    if lo >= 0:
        return (lo, hi)
    if hi <= 0:
        return (-hi, -lo)
    return (Fraction(0), max(-lo, hi))


def _hull_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _hull_mul(a, b):
    ps = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return (min(ps), max(ps))


def _hull_min(a, b):
    return (min(a[0], b[0]), min(a[1], b[1]))


def _hull_max(a, b):
    return (max(a[0], b[0]), max(a[1], b[1]))


def arith(op: str, q: Optional[Fraction] = None) -> Morphism:
    """Exact interval arithmetic rounded into sigma_R.

    Unary ops (neg, abs, scalar) map sigma_R to itself; binary ops (add, mul,
    min, max) map the sigma product sigma_R x_s sigma_R to sigma_R.  The
    output is the rational hull of the operation's image, rounded to the
    maximal-exponent containing dyadic dot (MaxDot when the hull is too wide).
    """
    sr = std_space("sigma_R")
    unary = op in ("neg", "abs", "scalar")
    if op == "scalar":
        if q is None:
            raise ValueError("scalar needs a rational factor")
        q = Fraction(q)

    def hull_of(d: Dot):
        return endpoints(d)

    if unary:

        def fmap(d: Dot) -> Dot:
            if isinstance(d, MaxDot):
                return MAX
            lo, hi = hull_of(d)
            if op == "neg":
                lo, hi = _hull_neg(lo, hi)
            elif op == "abs":
                lo, hi = _hull_abs(lo, hi)
            else:
                lo, hi = sorted((q * lo, q * hi))
            return round_hull(lo, hi, d.m)

        if op == "neg":
            live = lambda g: g  # noqa: E731
        elif op == "abs":
            live = lambda g: g + 1  # noqa: E731
        else:
            shift = 0 if q == 0 else max(0, (abs(q).numerator // abs(q).denominator).bit_length())
            live = lambda g, s=shift: g + s + 2  # noqa: E731
        return Morphism(REFINEMENT, sr, sr, fmap, live, tag=op if op != "scalar" else f"scalar({q})")

    if op not in ("add", "mul", "min", "max"):
        raise ValueError(f"unknown arith op {op!r}")
    src = sigma_rr()
    hull_op = {"add": _hull_add, "mul": _hull_mul, "min": _hull_min, "max": _hull_max}[op]

    def fmap(d: Dot) -> Dot:
        a, b = d.items
        if isinstance(a, MaxDot) or isinstance(b, MaxDot):
            return MAX
        lo, hi = hull_op(hull_of(a), hull_of(b))
        return round_hull(lo, hi, max(a.m, b.m))

    if op == "mul":

        def dyn(p: Point) -> Callable[[int], int]:
            def live(g: int) -> int:
                d = p.dot(2)
                bound = Fraction(1)
                if isinstance(d, TupleDot):
                    for c in d.items:
                        if not isinstance(c, MaxDot):
                            lo, hi = endpoints(c)
                            bound = max(bound, abs(lo), abs(hi))
                off = (1 + math.ceil(bound)).bit_length() + 2
                return g + off

            return live

        return Morphism(
            REFINEMENT, src, sr, fmap, lambda g: g + 12, tag="mul", dynamic_liveness=dyn
        )

    return Morphism(REFINEMENT, src, sr, fmap, lambda g: g + 3, tag=op)


def pair_point(p: Point, r: Point) -> Point:
    """The sigma-product point of two sigma_R points (both successor
    normalized so coordinate grades align)."""
    from .points import successor_normalize

    src = sigma_rr()
    pn, rn = successor_normalize(p), successor_normalize(r)

    def gen():
        for k in itertools.count(0):
            yield TupleDot((pn.dot(k), rn.dot(k)))

    return Point(src, gen, steps_for_grade=lambda g: g + 1, name=f"({p.name},{r.name})")


# ---------------------------------------------------------------------------
# Cantor function, codecs, doubling
# ---------------------------------------------------------------------------


def cantor_function(real_apartness: bool = False) -> Morphism:
    """The Cantor function on digit strings: on {0,2}* digits map by
    min(d,1); past the first 1 everything flattens to 0s.  Length-preserving
    morphism sigma_3 -> sigma_2 (or the interval-apartness variants)."""
    src = std_space("sigma_3_real" if real_apartness else "sigma_3")
    tgt = std_space("sigma_2_real" if real_apartness else "sigma_2")

    def fmap(d: Dot) -> Dot:
        out: List[int] = []
        seen_one = False
        for s in d.syms:
            if seen_one:
                out.append(0)
            elif s == 1:
                seen_one = True
                out.append(1)
            else:
                out.append(min(s, 1))
        return Seq(tuple(out))

    return Morphism(REFINEMENT, src, tgt, fmap, lambda g: g, tag="f_can")


def nary_codec(base: int) -> Tuple[Morphism, Optional[Morphism]]:
    """The digit-string evaluation codec: encode maps base-b digit strings to
    the n-ary dots of [0,1]; for base 3, decode_ter is its exact inverse.
    Both are refinement morphisms after pulling the interval apartness back
    onto digit strings."""
    if base < 2:
        raise ValueError("base >= 2 required")
    if base == 2:
        seq_sp = std_space("sigma_2_real")
        tgt = std_space("[0,1]_bin")
    elif base == 3:
        seq_sp = std_space("sigma_3_real")
        tgt = std_space("[0,1]_ter")
    else:
        from .spaces import _nary_01, _sigma_k_real

        seq_sp = _sigma_k_real(base, f"sigma_{base}_real")
        tgt = _nary_01(base, f"[0,1]_base{base}")

    def enc(d: Dot) -> Dot:
        val = 0
        for s in d.syms:
            if s >= base:
                raise MorphismDefect(f"digit {s} out of range for base {base}")
            val = val * base + s
        return NaryInterval(base, val, len(d.syms))

    encode = Morphism(REFINEMENT, seq_sp, tgt, enc, lambda g: g, tag="nary_encode")

    decode = None
    if base == 3:

        def dec(d: Dot) -> Dot:
            digs: List[int] = []
            n = d.n
            for _ in range(d.m):
                digs.append(n % 3)
                n //= 3
            return Seq(tuple(reversed(digs)))

        decode = Morphism(REFINEMENT, tgt, seq_sp, dec, lambda g: g, tag="ter_decode")
    return encode, decode


def doubling() -> Morphism:
    """The doubling morphism sigma_2 -> sigma_3: every digit doubled."""
    src, tgt = std_space("sigma_2"), std_space("sigma_3")

    def fmap(d: Dot) -> Dot:
        return Seq(tuple(2 * s for s in d.syms))

    return Morphism(REFINEMENT, src, tgt, fmap, lambda g: g, tag="doubling")


# ---------------------------------------------------------------------------
# Line calls
# ---------------------------------------------------------------------------

IN, OUT, LET = "IN", "OUT", "LET"


def line_call(stream: Point, threshold_exponent: int) -> str:
    """Consume the measurement stream until the interval width is at most
    2^-threshold_exponent, then call IN (lo>0), OUT (hi<0) or LET (0 inside)."""
    if threshold_exponent < 1:
        raise ValueError("threshold_exponent >= 1 required")
    space = stream.space
    thr = Fraction(1, 2**threshold_exponent)
    budget = stream.steps_for_grade(threshold_exponent + 2)
    for k in range(budget + 1):
        d = stream.dot(k)
        if isinstance(d, MaxDot):
            continue
        if space.width(d) <= thr:
            lo, hi = endpoints(d)
            if lo > 0:
                return IN
            if hi < 0:
                return OUT
            return LET
    raise PointDefect(
        f"line_call: stream never reached width 2^-{threshold_exponent} "
        f"within {budget} steps"
    )


# ---------------------------------------------------------------------------
# Coded Baire morphisms and diagonalization
# ---------------------------------------------------------------------------


def seq_rank(space: Space, d: Seq) -> int:
    """The frozen pairing bijection: the baire enumeration rank (satisfies
    rank(a) <= rank(a*b)).  Closed form on the baire space itself."""
    if space.name == "baire":
        from .spaces import baire_rank

        return baire_rank(d)
    return space.index_of(d)


def seq_unrank(space: Space, r: int) -> Seq:
    """Inverse of seq_rank (closed form on the baire space)."""
    if space.name == "baire":
        from .spaces import baire_unrank

        return baire_unrank(r)
    d = space.enumerate_dot(r)
    if not isinstance(d, Seq):
        raise MorphismDefect(f"decoded non-sequence dot {d!r}")
    return d


@dataclass
class CodedBaireMorphism:
    """A Baire morphism together with the baire point coding it."""

    morphism: Morphism
    code: Point

    def decoded_pair(self, n: int) -> Tuple[Dot, Dot]:
        sp = self.morphism.source
        a = sp.enumerate_dot(n)
        return a, self.morphism.map(a)


def code_point_of(f: Morphism) -> Point:
    """The baire point coding a baire morphism: alpha(n) = rank(f(dot_n))."""
    sp = f.source

    def gen():
        syms: List[int] = []
        yield Seq(())
        for n in itertools.count(0):
            syms.append(seq_rank(sp, f.map(sp.enumerate_dot(n))))
            yield Seq(tuple(syms))

    return Point(sp, gen, steps_for_grade=lambda g: g + 1, name=f"code({f.tag})")


def constant_code_morphism(g: Morphism) -> Morphism:
    """The morphism baire->baire sending every point to the code of g (the
    canonical 'constant code' test inputs for diagonalization)."""
    sp = g.source
    alpha_cache: List[int] = []

    def alpha(n: int) -> int:
        while len(alpha_cache) <= n:
            i = len(alpha_cache)
            alpha_cache.append(seq_rank(sp, g.map(sp.enumerate_dot(i))))
        return alpha_cache[n]

    def fmap(b: Dot) -> Dot:
        return Seq(tuple(alpha(i) for i in range(len(b.syms))))

    return Morphism(REFINEMENT, sp, sp, fmap, lambda g_: g_, tag=f"constcode({g.tag})")


def diagonalize(F: Morphism) -> CodedBaireMorphism:
    """Given F: baire -> baire whose outputs code Baire morphisms, build the
    coded morphism f with f-tilde(p) apart from F(p)-tilde(p) on every point.

    For every input prefix b of rank n, the coded morphism's value on b sits
    at code position n; once the input dot a is long enough that F(a)
    determines that value for some prefix b, f flips its last symbol.  Ranks
    grow along extension, so resolution order is stable and f is lawful."""
    sp = F.source
    empty = Seq(())
    resolved: dict = {}  # b -> decoded value (final once F(a) reveals it)

    def resolve(b: Seq, code: Seq):
        """The coded morphism's value on b per the code prefix, or None when
        the prefix is still too short to tell."""
        if b in resolved:
            return resolved[b]
        idx = seq_rank(sp, b)
        if idx >= len(code.syms):
            return None
        out = seq_unrank(sp, code.syms[idx])
        if b.syms:
            zp = resolve(Seq(b.syms[:-1]), code)  # smaller rank: resolved too
            if zp is not None and zp != empty and not out.extends(zp):
                raise MorphismDefect(
                    f"diagonalize: F's code is not a morphism at {b!r}: "
                    f"{out!r} does not extend the parent value {zp!r}"
                )
        resolved[b] = out
        return out

    def flip(w: Seq) -> Seq:
        return Seq(w.syms[:-1] + (w.syms[-1] + 1,))

    def fmap(a: Dot) -> Dot:
        code = F.map(a)
        for i in range(len(a.syms) + 1):
            b = Seq(a.syms[:i])
            z = resolve(b, code)
            if z is None:
                return empty  # deeper prefixes have larger ranks: also unknown
            if z != empty:
                return Seq(flip(z).syms + a.syms[i:])
        return empty

    f = Morphism(REFINEMENT, sp, sp, fmap, lambda g: g + 2, tag="diag")
    return CodedBaireMorphism(f, code_point_of(f))
