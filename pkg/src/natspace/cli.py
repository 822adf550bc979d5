"""Batch command line: exact-real evaluation, Cantor function sampling,
line calls, cover analysis, metric tables, and axiom validation.

Exit codes: 0 success, 1 parse error (expression / digits / JSON syntax),
2 semantic error (unknown space, missing witness, contract violation),
3 budget exhaustion (a lazy stream could not deliver in time).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from .dots import Dot, dot_from_json, dot_to_json, endpoints
from .induction import BarDefect, Cover, bar_from_json, finite_subcover
from .metric import MetricDefect, MetricEvaluator, evaluate_metric, metric_digit_goal
from .morphisms import (
    MorphismDefect,
    apply_point,
    arith,
    cantor_function,
    line_call,
    pair_point,
)
from .points import (
    Point,
    PointDefect,
    approximate,
    point_from_prefix,
    rational_to_point,
)
from .spaces import (
    SpaceDefect,
    extend_with_isolated_point,
    seq_interval,
    std_space,
    validate_space,
)
from .dots import Seq


class CliParseError(Exception):
    pass


class CliSemanticError(Exception):
    pass


# ---------------------------------------------------------------------------
# Expression grammar:
#   expr   := term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := rational | '-' factor | 'min(' expr ',' expr ')'
#           | 'max(' expr ',' expr ')' | 'abs(' expr ')' | '(' expr ')'
#   rational := integer ('/' positive-integer)?


def _tokenize(text: str) -> List[str]:
    out: List[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*/(),":
            out.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isalpha():
            j = i
            while j < len(text) and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word not in ("min", "max", "abs"):
                raise CliParseError(f"unknown function {word!r}")
            out.append(word)
            i = j
        else:
            raise CliParseError(f"unexpected character {ch!r}")
    return out


class _Parser:
    def __init__(self, tokens: List[str]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise CliParseError("unexpected end of expression")
        if expected is not None and tok != expected:
            raise CliParseError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def parse(self) -> tuple:
        node = self.expr()
        if self.peek() is not None:
            raise CliParseError(f"trailing input at {self.peek()!r}")
        return node

    def expr(self) -> tuple:
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self) -> tuple:
        node = self.factor()
        while self.peek() == "*":
            self.take()
            node = ("mul", node, self.factor())
        return node

    def factor(self) -> tuple:
        tok = self.peek()
        if tok == "-":
            self.take()
            return ("neg", self.factor())
        if tok == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if tok in ("min", "max"):
            self.take()
            self.take("(")
            a = self.expr()
            self.take(",")
            b = self.expr()
            self.take(")")
            return (tok, a, b)
        if tok == "abs":
            self.take()
            self.take("(")
            a = self.expr()
            self.take(")")
            return ("abs", a)
        if tok is not None and tok.isdigit():
            num = int(self.take())
            if self.peek() == "/":
                self.take()
                den_tok = self.take()
                if not den_tok.isdigit() or int(den_tok) == 0:
                    raise CliParseError("denominator must be a positive integer")
                return ("rat", Fraction(num, int(den_tok)))
            return ("rat", Fraction(num))
        raise CliParseError(f"unexpected token {tok!r}")


def parse_expression(text: str) -> tuple:
    return _Parser(_tokenize(text)).parse()


def compile_expression(node: tuple) -> Point:
    """Compile an expression tree to one lazy point on the dyadic real
    spraid: leaves are rational embeddings, inner nodes apply the exact
    interval-arithmetic morphisms over sigma products."""
    kind = node[0]
    if kind == "rat":
        return rational_to_point(node[1])
    if kind == "neg":
        return apply_point(arith("neg"), compile_expression(node[1]))
    if kind == "abs":
        return apply_point(arith("abs"), compile_expression(node[1]))
    if kind == "sub":
        rhs = apply_point(arith("neg"), compile_expression(node[2]))
        return apply_point(arith("add"), pair_point(compile_expression(node[1]), rhs))
    if kind in ("add", "mul", "min", "max"):
        lhs = compile_expression(node[1])
        rhs = compile_expression(node[2])
        return apply_point(arith(kind), pair_point(lhs, rhs))
    raise CliSemanticError(f"unknown expression node {kind!r}")


def eval_expression_bounds(text: str, bits: int) -> Tuple[Fraction, Fraction]:
    """Rational bounds of width at most 2^(1-bits) around the exact value."""
    point = compile_expression(parse_expression(text))
    d = approximate(point, bits + 1)  # grade g dots have width 2^(2-g)
    return endpoints(d)


# ---------------------------------------------------------------------------
# Output helpers.


def _emit(fmt: str, payload: dict, text_lines: List[str], out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        for line in text_lines:
            out.write(line + "\n")


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _resolve_space(name: str):
    try:
        if name.endswith("^+"):
            return extend_with_isolated_point(std_space(name[:-2]))
        return std_space(name)
    except ValueError as exc:
        raise CliSemanticError(str(exc))


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise CliParseError(f"{path}: {exc}")
    except OSError as exc:
        raise CliSemanticError(str(exc))


# ---------------------------------------------------------------------------
# Subcommands.


def _cmd_eval(args, out) -> int:
    lo, hi = eval_expression_bounds(args.expr, args.bits)
    _emit(
        args.format,
        {"lo": _frac(lo), "hi": _frac(hi)},
        [f"lo {_frac(lo)}", f"hi {_frac(hi)}"],
        out,
    )
    return 0


def _cmd_cantor(args, out) -> int:
    digits = args.digits.strip()
    if not digits or any(ch not in "012" for ch in digits):
        raise CliParseError("cantor input must be a nonempty string over {0,1,2}")
    depth = args.depth if args.depth is not None else len(digits)
    if depth < 1:
        raise CliSemanticError("depth must be >= 1")
    src = Seq(tuple(int(ch) for ch in digits[:depth]))
    image = cantor_function().map(src)
    text = "".join(str(s) for s in image.syms)
    lo, hi = seq_interval(image, 2)
    _emit(
        args.format,
        {"image": text, "lo": _frac(lo), "hi": _frac(hi)},
        [f"image {text}", f"lo {_frac(lo)}", f"hi {_frac(hi)}"],
        out,
    )
    return 0


def _synthetic_stream(value: Fraction) -> Point:
    return rational_to_point(value)


def _cmd_linecall(args, out) -> int:
    space = std_space("sigma_R")
    if args.synthetic is not None:
        try:
            stream = _synthetic_stream(Fraction(args.synthetic))
        except (ValueError, ZeroDivisionError) as exc:
            raise CliParseError(f"bad synthetic value: {exc}")
    else:
        dots: List[Dot] = []
        fh = sys.stdin if args.input == "-" else open(args.input, "r", encoding="utf-8")
        try:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    dots.append(dot_from_json(json.loads(line)))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise CliParseError(f"bad dot line {line!r}: {exc}")
        finally:
            if fh is not sys.stdin:
                fh.close()
        if not dots:
            raise CliSemanticError("empty measurement stream")
        stream = point_from_prefix(space, dots, name="measurements")
    verdict = line_call(stream, args.threshold_exp)
    _emit(args.format, {"call": verdict}, [verdict], out)
    return 0


def _union_covers_root(space, dots) -> Optional[bool]:
    if not space.interval_like:
        return None
    try:
        root_lo, root_hi = endpoints(space.max_dot)
    except TypeError:
        return None
    segs = sorted(endpoints(d) for d in dots)
    cursor = root_lo
    for lo, hi in segs:
        if lo > cursor:
            return False
        cursor = max(cursor, hi)
        if cursor >= root_hi:
            return True
    return cursor >= root_hi


def _cmd_subcover(args, out) -> int:
    data = _read_json(args.cover_file)
    if not isinstance(data, dict) or "space" not in data or "cover" not in data:
        raise CliParseError("cover file needs 'space' and 'cover' fields")
    space = _resolve_space(data["space"])
    try:
        cover_dots = tuple(dot_from_json(obj) for obj in data["cover"])
    except (KeyError, TypeError) as exc:
        raise CliParseError(f"bad cover dot: {exc}")
    if "witness" not in data:
        raise CliSemanticError("inductive cover without a genetic witness")
    witness = bar_from_json(space, data["witness"])
    cover = Cover(dots=cover_dots, witness=witness)
    selected = finite_subcover(space, cover)
    union_ok = _union_covers_root(space, selected)
    sel_json = [dot_to_json(d) for d in selected]
    lines = ["subcover " + json.dumps(sel_json, sort_keys=True)]
    if union_ok is None:
        lines.append("union check: n/a")
    else:
        lines.append(f"union covers root: {'true' if union_ok else 'false'}")
    _emit(
        args.format,
        {"subcover": sel_json, "union_covers_root": union_ok},
        lines,
        out,
    )
    return 0


def _load_point(space, path: str, name: str) -> Point:
    data = _read_json(path)
    if not isinstance(data, list) or not data:
        raise CliParseError(f"{path}: point file must be a nonempty JSON list of dots")
    try:
        dots = tuple(dot_from_json(obj) for obj in data)
    except (KeyError, TypeError) as exc:
        raise CliParseError(f"{path}: bad dot: {exc}")
    return point_from_prefix(space, dots, name=name)


def _cmd_metric(args, out) -> int:
    space = _resolve_space(args.space)
    x = _load_point(space, args.x, "x")
    y = _load_point(space, args.y, "y")
    ev = MetricEvaluator(space)
    lo, hi = evaluate_metric(ev, x, y, args.bits)
    rows = []
    for m in range(args.bits + 1):
        a, b = ev.pair(m)
        goal = min(metric_digit_goal(args.bits), ev.digit_cap)
        fx = ev._value(m, x, goal)
        fy = ev._value(m, y, goal)
        rows.append(
            {
                "m": m,
                "a": dot_to_json(a),
                "b": dot_to_json(b),
                "fx": [_frac(fx[0]), _frac(fx[1])],
                "fy": [_frac(fy[0]), _frac(fy[1])],
            }
        )
    lines = [
        f"m={r['m']} a={json.dumps(r['a'], sort_keys=True)} "
        f"b={json.dumps(r['b'], sort_keys=True)} "
        f"fx=[{r['fx'][0]},{r['fx'][1]}] fy=[{r['fy'][0]},{r['fy'][1]}]"
        for r in rows
    ]
    lines.append(f"lo {_frac(lo)}")
    lines.append(f"hi {_frac(hi)}")
    _emit(
        args.format,
        {"terms": rows, "lo": _frac(lo), "hi": _frac(hi)},
        lines,
        out,
    )
    return 0


def _cmd_validate(args, out) -> int:
    space = _resolve_space(args.space)
    report = validate_space(space, args.depth)
    _emit(
        args.format,
        {
            "space": report.space,
            "depth": report.depth,
            "ok": report.ok,
            "entries": list(report.entries),
        },
        [str(report)],
        out,
    )
    return 0


# ---------------------------------------------------------------------------
# Argument plumbing.


class _Parser1(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit 2; we reserve 1
        raise CliParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser1(prog="natspace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("eval", help="evaluate an exact rational expression")
    sp.add_argument("expr")
    sp.add_argument("--bits", type=int, default=20)
    common(sp)

    sp = sub.add_parser("cantor", help="Cantor function on a ternary digit string")
    sp.add_argument("digits")
    sp.add_argument("--depth", type=int, default=None)
    common(sp)

    sp = sub.add_parser("linecall", help="IN/OUT/LET call on a measurement stream")
    sp.add_argument("input", nargs="?", default="-")
    sp.add_argument("--threshold-exp", type=int, default=8, dest="threshold_exp")
    sp.add_argument("--synthetic", default=None, help="rational limit; synthesizes the stream")
    common(sp)

    sp = sub.add_parser("subcover", help="finite subcover from an inductive cover file")
    sp.add_argument("cover_file")
    common(sp)

    sp = sub.add_parser("metric", help="metric bound table between two point files")
    sp.add_argument("space")
    sp.add_argument("x")
    sp.add_argument("y")
    sp.add_argument("--bits", type=int, default=4)
    common(sp)

    sp = sub.add_parser("validate", help="axiom report for a named space")
    sp.add_argument("space")
    sp.add_argument("--depth", type=int, default=100)
    common(sp)

    return p


_DISPATCH = {
    "eval": _cmd_eval,
    "cantor": _cmd_cantor,
    "linecall": _cmd_linecall,
    "subcover": _cmd_subcover,
    "metric": _cmd_metric,
    "validate": _cmd_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args, sys.stdout)
    except CliParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except PointDefect as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 3
    except (
        CliSemanticError,
        SpaceDefect,
        MorphismDefect,
        BarDefect,
        MetricDefect,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
