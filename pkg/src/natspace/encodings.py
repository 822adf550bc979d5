"""Trail spaces, unglueing, trail-to-refinement compression, and the two
universality constructions: every enumerated space is encoded over Baire
sequences, and Cantor space surjects onto every finitely branching fann.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .dots import MAX, Dot, DyadicInterval, MaxDot, Seq, Trail
from .morphisms import REFINEMENT, TRAIL, Morphism, MorphismDefect
from .spaces import (
    Space,
    SpaceDefect,
    SpraidInfo,
    Successors,
    baire_enum,
    std_space,
)


class EncodingDefect(Exception):
    pass


# ---------------------------------------------------------------------------
# Trail spaces
# ---------------------------------------------------------------------------


def _check_chain(space: Space, t: Trail) -> None:
    for prev, cur in zip(t.items, t.items[1:]):
        if not space.strictly_refines(cur, prev):
            raise SpaceDefect(
                f"{space.name}: {t!r} is not a strict-descent trail "
                f"({cur!r} does not strictly refine {prev!r})"
            )


def trail_space(space: Space) -> Space:
    """The space of strict-descent trails: refinement is trail extension,
    apartness is last-dot apartness, the empty trail is maximal."""

    def apart(a: Dot, b: Dot) -> bool:
        _check_chain(space, a)
        _check_chain(space, b)
        if not a.items or not b.items:
            return False
        return space.apart(a.items[-1], b.items[-1])

    def refines(b: Dot, a: Dot) -> bool:
        _check_chain(space, a)
        _check_chain(space, b)
        return b.extends(a)

    def grade(d: Dot) -> int:
        return len(d.items)

    ext_cache: Dict[Trail, List[Dot]] = {}
    lock = threading.Lock()

    def _extensions(t: Trail, k: int) -> Dot:
        """The k-th one-step extension of t (underlying enumeration order)."""
        with lock:
            found = ext_cache.setdefault(t, [])
        last = t.items[-1] if t.items else space.max_dot
        i = 0 if not found else space.index_of(found[-1]) + 1
        while len(found) <= k:
            d = space.enumerate_dot(i)
            if space.strictly_refines(d, last):
                found.append(d)
            i += 1
        return Trail(t.items + (found[k],))

    def successors(t: Dot) -> Successors:
        return Successors((), True, lambda k: _extensions(t, k))

    def predecessors(t: Dot) -> Tuple[Dot, ...]:
        return (Trail(t.items[:-1]),) if t.items else ()

    def enum() -> Iterator[Dot]:
        yield Trail(())
        for cap in itertools.count(1):
            for ln in range(1, cap + 1):
                for idxs in itertools.product(range(1, cap + 1), repeat=ln):
                    if max(max(idxs), ln) != cap:
                        continue
                    dots = tuple(space.enumerate_dot(i) for i in idxs)
                    if all(
                        space.strictly_refines(b, a) for a, b in zip(dots, dots[1:])
                    ):
                        yield Trail(dots)

    return Space(
        f"trails({space.name})",
        apart,
        refines,
        Trail(()),
        enum,
        SpraidInfo(grade, successors, predecessors, False),
        family="trail",
    )


def id_str(space: Space) -> Morphism:
    """The trail identity: a trail maps to its last dot."""
    return Morphism(
        TRAIL,
        space,
        space,
        lambda t: t.items[-1] if t.items else space.max_dot,
        lambda g: g,
        tag="id_str",
    )


# ---------------------------------------------------------------------------
# Unglueing
# ---------------------------------------------------------------------------


def cover_trails(space: Space, a: Dot) -> List[Trail]:
    """All immediate-successor trails from a grade-1 dot down to a (the
    distinct unglued copies of a)."""
    if a == space.max_dot:
        return []
    preds = [p for p in space.predecessors(a) if p != space.max_dot]
    if not preds:
        return [Trail((a,))]
    out: List[Trail] = []
    for p in preds:
        for t in cover_trails(space, p):
            out.append(Trail(t.items + (a,)))
    return out


def unglue(space: Space) -> Space:
    """The unglued twin: dots are immediate-successor trails from grade 1, so
    every non-max dot has exactly one predecessor (a tree).  Apartness is
    last-dot apartness; grade is preserved."""
    if space.spraid_info is None:
        raise SpaceDefect(f"{space.name}: unglue needs spraid structure")

    def apart(a: Dot, b: Dot) -> bool:
        if not a.items or not b.items:
            return False
        return space.apart(a.items[-1], b.items[-1])

    def refines(b: Dot, a: Dot) -> bool:
        return b.extends(a)

    def grade(t: Dot) -> int:
        return len(t.items)

    def successors(t: Dot) -> Successors:
        base = t.items[-1] if t.items else space.max_dot
        succ = space.successors(base)
        if not succ.unbounded:
            return Successors(tuple(Trail(t.items + (s,)) for s in succ.dots))
        return Successors((), True, lambda k: Trail(t.items + (succ.more(k),)))

    def predecessors(t: Dot) -> Tuple[Dot, ...]:
        return (Trail(t.items[:-1]),) if t.items else ()

    def enum() -> Iterator[Dot]:
        yield Trail(())
        for cap in itertools.count(1):
            for ln in range(1, cap + 1):
                for idxs in itertools.product(range(cap), repeat=ln):
                    if max(max(idxs) + 1, ln) != cap:
                        continue
                    items: List[Dot] = []
                    cur = space.max_dot
                    ok = True
                    for i in idxs:
                        succ = space.successors(cur)
                        opts = succ.prefix(i + 1)
                        if len(opts) <= i:
                            ok = False
                            break
                        cur = opts[i]
                        items.append(cur)
                    if ok:
                        yield Trail(tuple(items))

    return Space(
        f"unglued({space.name})",
        apart,
        refines,
        Trail(()),
        enum,
        SpraidInfo(
            grade, successors, predecessors,
            space.spraid_info.finitely_branching,
        ),
        family="trail",
    )


def unglue_projection(space: Space) -> Morphism:
    """id_str on unglued dots: the projection back onto the glued space."""
    unglued = unglue(space)
    return Morphism(
        REFINEMENT,
        unglued,
        space,
        lambda t: t.items[-1] if t.items else space.max_dot,
        lambda g: g,
        tag="unglue_proj",
    )


# ---------------------------------------------------------------------------
# Trail-to-refinement compression on sigma_R
# ---------------------------------------------------------------------------


def hat(d: Dot) -> Dot:
    """The two-grade coarsening [s/2^t,(s+2)/2^t] around [n/2^m,(n+2)/2^m]
    with n = 4s+i, 1 <= i <= 4; MaxDot when the grade is too small."""
    if isinstance(d, MaxDot) or d.m < 2:
        return MAX
    s = (d.n - 1) // 4
    return DyadicInterval(s, d.m - 2)


def compress_sigmaR(f: Morphism) -> Morphism:
    """Turn a trail morphism on sigma_R into a refinement morphism: g(a) is
    the common refinement of f(b)-hat over all unglued copies b of a.  g
    never becomes apart from f on points."""
    if f.kind != TRAIL:
        raise MorphismDefect("compress_sigmaR expects a trail morphism")
    sr = std_space("sigma_R")

    def gmap(a: Dot) -> Dot:
        if isinstance(a, MaxDot):
            return MAX
        hats = [hat(f.map(t)) for t in cover_trails(sr, a)]
        hats = [h for h in hats if not isinstance(h, MaxDot)]
        if not hats:
            return MAX
        finest = max(hats, key=lambda h: h.m)
        for h in hats:
            if not sr.refines(finest, h):
                raise MorphismDefect(
                    f"compress_sigmaR: trail images of {a!r} have no common "
                    f"refinement ({finest!r} vs {h!r})"
                )
        return finest

    return Morphism(
        REFINEMENT, sr, sr, gmap, lambda g: f.liveness(g + 2), tag=f"compress({f.tag})"
    )


# ---------------------------------------------------------------------------
# Pregrades and the Baire encoding
# ---------------------------------------------------------------------------

SENTINEL_PAIR = "sentinel"


@dataclass
class Pregrade:
    """Pair enumeration with the formal sentinel pair at index 0 (every dot
    chooses it), and the induced e-grades: e_grade(d) >= n iff d chooses
    every pair of index below n."""

    space: Space

    def pair(self, i: int):
        if i == 0:
            return SENTINEL_PAIR
        return self.space.apart_pair(i - 1)

    def chooses(self, d: Dot, i: int) -> bool:
        if i == 0:
            return True
        x, y = self.pair(i)
        return self.space.apart(d, x) or self.space.apart(d, y)

    def has_e_grade(self, d: Dot, n: int) -> bool:
        return all(self.chooses(d, i) for i in range(1, n))

    def e_grade(self, d: Dot, bound: int) -> int:
        n = 1
        while n < bound and self.chooses(d, n):
            n += 1
        return n


@dataclass
class BaireEncoding:
    """The spread presentation of an enumerated space: a pullback spread over
    Baire sequences, the surjective forward morphism h, and the trail inverse."""

    space: Space
    spread: Space
    forward: Morphism
    inverse: Morphism
    pregrade: Pregrade
    max_scan: int
    _levels: Dict[Tuple[int, Dot], List[Dot]] = field(default_factory=dict)
    _scanpos: Dict[Tuple[int, Dot], int] = field(default_factory=dict)
    _h_cache: Dict[Seq, Dot] = field(default_factory=dict)
    _lock: threading.RLock = field(default_factory=threading.RLock)

    # the level sets and per-cone bijections -------------------------------

    def level_member(self, n: int, a: Dot, k: int) -> Dot:
        """g_a(k): the k-th dot (enumeration order) of index >= n, e-grade
        >= n, refining a."""
        sp = self.space
        with self._lock:
            found = self._levels.setdefault((n, a), [])
            m = self._scanpos.setdefault((n, a), n)
            while len(found) <= k:
                if m >= self.max_scan:
                    raise EncodingDefect(
                        f"{sp.name}: level {n} under {a!r} exhausted after "
                        f"scanning {self.max_scan} dots (needed member {k})"
                    )
                v = sp.enumerate_dot(m)
                if sp.refines(v, a) and self.pregrade.has_e_grade(v, n):
                    found.append(v)
                m += 1
                self._scanpos[(n, a)] = m
        return found[k]

    def level_index(self, n: int, a: Dot, v: Dot) -> int:
        """The g_a-index of a qualifying dot v (inverse of level_member)."""
        k = 0
        while True:
            if self.level_member(n, a, k) == v:
                return k
            k += 1

    def h(self, b: Seq) -> Dot:
        """The forward dot map: digits pick cone members level by level."""
        with self._lock:
            if b in self._h_cache:
                return self._h_cache[b]
        if not b.syms:
            out = self.space.max_dot
        else:
            a = self.h(Seq(b.syms[:-1]))
            out = self.level_member(len(b.syms), a, b.syms[-1])
        with self._lock:
            self._h_cache[b] = out
        return out

    def h_inverse_trail(self, t: Trail) -> Seq:
        """Minimal-index subsequence extraction: at level n pick the first
        trail dot of e-grade >= n, index >= n, strictly refining the current
        image."""
        items = t.items
        syms: List[int] = []
        a = self.space.max_dot
        while True:
            n = len(syms) + 1
            hit = None
            for x in items:
                if not self.space.strictly_refines(x, a):
                    continue
                if self.space.index_of(x) < n:
                    continue
                if not self.pregrade.has_e_grade(x, n):
                    continue
                hit = x
                break
            if hit is None:
                return Seq(tuple(syms))
            syms.append(self.level_index(n, a, hit))
            a = hit


def baire_encode(space: Space, max_scan: int = 50_000) -> BaireEncoding:
    """Present an enumerated space as a spread over Baire sequences: the
    pullback spread carries the apartness of the h-images; h is a surjective
    refinement morphism and the inverse is a trail morphism; the round trip
    is never apart on points."""
    enc_holder: List[BaireEncoding] = []

    def apart(x: Dot, y: Dot) -> bool:
        enc = enc_holder[0]
        return space.apart(enc.h(x), enc.h(y))

    def refines(y: Dot, x: Dot) -> bool:
        return y.extends(x)

    def grade(d: Dot) -> int:
        return len(d.syms)

    def successors(d: Dot) -> Successors:
        return Successors((), True, lambda k: Seq(d.syms + (k,)))

    def predecessors(d: Dot) -> Tuple[Dot, ...]:
        return (Seq(d.syms[:-1]),) if d.syms else ()

    spread = Space(
        f"spread({space.name})",
        apart,
        refines,
        Seq(()),
        baire_enum,
        SpraidInfo(grade, successors, predecessors, False),
        family="seq",
    )
    enc = BaireEncoding(
        space=space,
        spread=spread,
        forward=None,  # filled below
        inverse=None,
        pregrade=Pregrade(space),
        max_scan=max_scan,
    )
    enc_holder.append(enc)
    enc.forward = Morphism(
        REFINEMENT, spread, space, enc.h, lambda g: 2 * g + 8, tag=f"h[{space.name}]"
    )
    enc.inverse = Morphism(
        TRAIL, space, spread, enc.h_inverse_trail, lambda g: g + 4,
        tag=f"h_inv[{space.name}]",
    )
    return enc


# ---------------------------------------------------------------------------
# The Cantor surjection onto fanns
# ---------------------------------------------------------------------------


def _block_size(branching: int) -> int:
    return max(1, math.ceil(math.log2(branching))) if branching > 1 else 1


def cantor_surjection(fann: Space) -> Morphism:
    """The surjective morphism cantor -> fann: bits are consumed in blocks of
    ceil(log2(#successors)); in-range blocks pick the successor, overflow
    blocks commit to the canonical filler walk (always the first successor).
    Partial blocks lag (the image stays one grade coarser until the block
    completes)."""
    if fann.spraid_info is None or not fann.spraid_info.finitely_branching:
        raise MorphismDefect(f"{fann.name}: cantor_surjection needs a fann")
    cantor = std_space("cantor")

    def fmap(d: Dot) -> Dot:
        bits = d.syms
        cur = fann.max_dot
        i = 0
        overflow = False
        while True:
            succ = fann.successors(cur).dots
            if not succ:
                return cur
            L = _block_size(len(succ))
            if i + L > len(bits):
                return cur
            if overflow:
                cur = succ[0]
            else:
                v = 0
                for b in bits[i : i + L]:
                    v = 2 * v + b
                if v < len(succ):
                    cur = succ[v]
                else:
                    overflow = True
                    cur = succ[0]
            i += L

    def liveness(g: int) -> int:
        bits = 0
        for lvl in range(g):
            branch = max(
                (len(fann.successors(d).dots) for d in fann.level(lvl)), default=1
            )
            bits += _block_size(branch)
        return bits

    return Morphism(
        REFINEMENT, cantor, fann, fmap, liveness, tag=f"cantor_onto[{fann.name}]"
    )


def cantor_witness(fann: Space, a: Dot) -> Seq:
    """A cantor dot the surjection maps onto a (the in-range block coding of
    the immediate-successor trail of a)."""
    cantor_bits: List[int] = []
    if a == fann.max_dot:
        return Seq(())
    trails = cover_trails(fann, a)
    if not trails:
        raise MorphismDefect(f"{fann.name}: {a!r} unreachable from the maximal dot")
    cur = fann.max_dot
    for step in trails[0].items:
        succ = fann.successors(cur).dots
        L = _block_size(len(succ))
        v = succ.index(step)
        cantor_bits.extend((v >> (L - 1 - j)) & 1 for j in range(L))
        cur = step
    return Seq(tuple(cantor_bits))
