"""Recursive-descent parser for the textual formula syntax.

Precedence, tightest first: unary operators, ``until``/``release``/``since``,
``and``, ``or``, ``implies`` (right associative).  Quantifier and freeze
bodies extend as far right as possible.  Spatial terms follow the same
pattern: prefix operators, ``UNTILS``/``RELEASES``, ``CAP``, ``CUP``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..spatial import Anchor
from .syntax import (
    BB, CMP_OPS, UNIVERSE_REF, AlwaysS, And, Always, Cap, Cl, Cmpl, Const, Cup, EmptySet, EventuallyS,
    Eventually, Exists, Fn, Forall, Formula, FrameConstraint, Freeze, FuncAtom, IdCompare, Implies, Int,
    Interval, Next, NextS, Not, Or, Prev, Release, ReleaseS, Scaled, Since, SpatialExists, SpatialForall,
    Term, TimeConstraint, TrueF, UniverseSet, Until, UntilS, WeakNext, WeakPrev,
)

KEYWORDS = frozenset(
    """true false not and or implies next wnext until release always eventually prev wprev since
    exists forall freeze SE SA CTIME CFRAME BB EMPTYSET UNIVERSE EGO CMPL CAP CUP INT CL UNTILS RELEASES
    NEXTS ALWAYSS EVENTUALLYS CLASS PROB LAT LON DIST AREA RATIO EMPTY VISIBLE MD OCC inf""".split()
)
ANCHORS = {a.value: a for a in Anchor}
ID_FUNCS = ("CLASS", "PROB", "MD", "OCC", "EMPTY")
NUMERIC_FUNCS = ("CLASS", "PROB", "LAT", "LON", "DIST", "AREA", "RATIO", "MD", "OCC")
BOOL_FUNCS = ("EMPTY", "VISIBLE")

_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r]+|\#[^\n]*)
      |(?P<nl>\n)
      |(?P<string>"[^"\n]*"|'[^'\n]*')
      |(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
      |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      |(?P<close>[\])](?:[tf](?![A-Za-z0-9_]))?)
      |(?P<op>==|!=|<=|>=|<|>|\(|\[|,|\.|@|-|%|\*)
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: tuple = ()):
        self.line, self.col, self.expected = line, col, tuple(sorted(set(expected)))
        detail = f"; expected one of: {', '.join(self.expected)}" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    out.append(Token("eof", "<end of input>", line, pos - line_start + 1))
    return out


class Parser:
    def __init__(self, text: str, allow_free: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_free = allow_free
        self.scope: list[tuple[str, str]] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def look(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("ident", "op", "close") and t.text in texts

    def accept(self, *texts: str) -> Token | None:
        if self.at(*texts):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, *texts: str) -> Token:
        t = self.accept(*texts)
        if t is None:
            self.fail(f"unexpected {self.tok.text!r}", texts)
        return t

    def expect_close(self) -> Token:
        if self.tok.kind == "close" and self.tok.text == ")":
            self.i += 1
            return self.toks[self.i - 1]
        self.fail(f"unexpected {self.tok.text!r}", (")",))

    def fail(self, message: str, expected=()) -> None:
        raise ParseError(message, self.tok.line, self.tok.col, tuple(expected))

    def name(self, what: str) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail(f"expected {what}, got {t.text!r}", (what,))
        self.i += 1
        return t.text

    def number(self) -> float:
        neg = self.accept("-") is not None
        t = self.tok
        if t.kind == "ident" and t.text == "inf":
            self.i += 1
            return -math.inf if neg else math.inf
        if t.kind != "number":
            self.fail(f"expected a number, got {t.text!r}", ("<number>",))
        self.i += 1
        v = float(t.text)
        return -v if neg else v

    def integer(self) -> int:
        v = self.number()
        if not float(v).is_integer():
            self.fail("expected an integer", ("<integer>",))
        return int(v)

    # scoping

    def kind_of(self, name: str) -> str | None:
        for n, k in reversed(self.scope):
            if n == name:
                return k
        return None

    def use(self, name: str, kind: str, tok: Token) -> None:
        k = self.kind_of(name)
        if k is None and not self.allow_free:
            raise ParseError(f"unbound {'time' if kind == 'time' else 'ID'} variable {name!r}", tok.line, tok.col)
        if k is not None and k != kind:
            raise ParseError(f"{name!r} is a{'n ID' if k == 'id' else ' time'} variable here", tok.line, tok.col)

    # formulas

    def parse(self) -> Formula:
        f = self.formula()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}",
                      ("and", "or", "implies", "until", "release", "since", "<end of input>"))
        return f

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.accept("implies"):
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.accept("or"):
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.binary()
        while self.accept("and"):
            f = And(f, self.binary())
        return f

    def binary(self) -> Formula:
        f = self.unary()
        while self.at("until", "release", "since"):
            op = self.tok.text
            self.i += 1
            iv = self.interval() if op != "since" else None
            right = self.unary()
            if op == "until":
                f = Until(f, right, iv)
            elif op == "release":
                f = Release(f, right, iv)
            else:
                f = Since(f, right)
        return f

    def unary(self) -> Formula:
        if self.accept("not"):
            return Not(self.unary())
        if self.accept("next"):
            return self._timed(Next)
        if self.accept("always"):
            return self._timed(Always)
        if self.accept("eventually"):
            return self._timed(Eventually)
        if self.accept("wnext"):
            return WeakNext(self.unary())
        if self.accept("prev"):
            return Prev(self.unary())
        if self.accept("wprev"):
            return WeakPrev(self.unary())
        if self.at("exists", "forall"):
            return self.quantifier()
        if self.accept("freeze"):
            tv = self.name("time variable")
            self.expect(".")
            self.scope.append((tv, "time"))
            body = self.formula()
            self.scope.pop()
            return Freeze(tv, body)
        return self.primary()

    def _timed(self, cls):
        iv = self.interval()
        return cls(self.unary(), iv)

    def quantifier(self) -> Formula:
        cls = Exists if self.tok.text == "exists" else Forall
        self.i += 1
        var = self.name("ID variable")
        tv = None
        if self.accept("@"):
            tv = self.name("time variable")
        self.expect(".")
        self.scope.append((var, "id"))
        if tv is not None:
            self.scope.append((tv, "time"))
        body = self.formula()
        self.scope.pop()
        if tv is not None:
            self.scope.pop()
        return cls(var, tv, body)

    def interval(self) -> Interval | None:
        if not self.at("["):
            return None
        start = self.tok
        self.i += 1
        lo = self.number()
        self.expect(",")
        hi = self.number()
        t = self.tok
        if t.kind != "close":
            self.fail(f"unexpected {t.text!r}", ("]", ")"))
        self.i += 1
        unit = {"t": "time", "f": "frame"}.get(t.text[1:], "time")
        if lo < 0 or hi < lo:
            raise ParseError("interval must satisfy 0 <= lo <= hi", start.line, start.col)
        return Interval(lo, hi, True, t.text[0] == "]" and hi != math.inf, unit)

    def primary(self) -> Formula:
        t = self.tok
        if self.accept("true"):
            return TrueF()
        if self.accept("false"):
            return Not(TrueF())
        if self.at("SE", "SA"):
            kind = self.tok.text
            self.i += 1
            self.expect("(")
            term = self.term()
            self.expect_close()
            return SpatialExists(term) if kind == "SE" else SpatialForall(term)
        if self.at("CTIME", "CFRAME"):
            return self.constraint(None)
        if self.at("(") and self.look().text == "CFRAME" and self.look(3).kind == "ident" and self.look(4).text == ")" \
                and self.look(5).text == "%":
            return self.constraint(self.tok)
        if self.accept("("):
            f = self.formula()
            self.expect_close()
            return f
        if t.kind == "ident" and t.text in NUMERIC_FUNCS + BOOL_FUNCS:
            return self.func_atom()
        if (t.kind == "number" or (t.kind == "ident" and t.text not in KEYWORDS)) and self.look().text in ("==", "!="):
            return self.id_compare()
        self.fail(f"unexpected {t.text!r}", (
            "true", "false", "not", "next", "wnext", "always", "eventually", "prev", "wprev", "exists", "forall",
            "freeze", "(", "SE", "SA", "CTIME", "CFRAME", "<ID variable>", "<function>",
        ))

    def constraint(self, paren: Token | None) -> Formula:
        if paren is not None:
            self.expect("(")
        kind = self.expect("CTIME", "CFRAME").text
        self.expect("-")
        tt = self.tok
        tv = self.name("time variable")
        self.use(tv, "time", tt)
        modulo = None
        if paren is not None:
            self.expect_close()
            self.expect("%")
            modulo = self.integer()
            if modulo <= 0:
                self.fail("modulus must be positive")
        op = self.cmp_op()
        if kind == "CTIME":
            return TimeConstraint(tv, op, self.number())
        return FrameConstraint(tv, op, self.integer(), modulo)

    def cmp_op(self) -> str:
        return self.expect(*CMP_OPS).text

    def id_ref(self, allow_universe: bool = False):
        t = self.tok
        if t.kind == "number":
            return self.integer()
        if allow_universe and self.accept("UNIVERSE", "EGO"):
            return UNIVERSE_REF
        v = self.name("ID variable")
        self.use(v, "id", t)
        return v

    def id_compare(self) -> Formula:
        left = self.id_ref()
        op = self.expect("==", "!=").text
        return IdCompare(left, self.id_ref(), op == "==")

    def anchor(self) -> Anchor:
        t = self.tok
        if t.kind == "ident" and t.text in ANCHORS:
            self.i += 1
            return ANCHORS[t.text]
        self.fail(f"expected an anchor, got {t.text!r}", tuple(ANCHORS))

    def func(self) -> Fn:
        t = self.tok
        if t.kind != "ident" or t.text not in NUMERIC_FUNCS + BOOL_FUNCS:
            self.fail(f"expected a function, got {t.text!r}", NUMERIC_FUNCS + BOOL_FUNCS)
        name = t.text
        self.i += 1
        self.expect("(")
        if name in ID_FUNCS:
            args = (self.id_ref(),)
        elif name in ("LAT", "LON"):
            ref = self.id_ref()
            self.expect(",")
            args = (ref, self.anchor())
        elif name == "DIST":
            a = self.id_ref(True)
            self.expect(",")
            aa = self.anchor()
            self.expect(",")
            b = self.id_ref(True)
            self.expect(",")
            args = (a, aa, b, self.anchor())
        elif name == "AREA":
            nxt = self.look()
            if (self.tok.kind == "number" or (self.tok.kind == "ident" and self.tok.text not in KEYWORDS)) \
                    and nxt.kind == "close" and nxt.text == ")":
                args = (self.id_ref(),)
            else:
                args = (self.term(),)
        elif name == "RATIO":
            a = self.func()
            self.expect(",")
            args = (a, self.func())
            if any(x.name != "AREA" for x in args):
                raise ParseError("RATIO takes two AREA arguments", t.line, t.col)
        else:  # VISIBLE
            v = self.id_ref(True)
            self.expect(",")
            va = self.anchor()
            self.expect(",")
            a = self.id_ref()
            self.expect(",")
            args = (v, va, a, self.id_ref())
        self.expect_close()
        return Fn(name, args)

    def func_atom(self) -> Formula:
        lhs = self.func()
        if lhs.name in BOOL_FUNCS:
            return FuncAtom(lhs)
        op = self.cmp_op()
        t = self.tok
        if t.kind == "string":
            self.i += 1
            rhs = Const(t.text[1:-1].lower())
        elif t.kind == "ident" and t.text in NUMERIC_FUNCS:
            rhs = self.func()
        elif t.kind == "ident" and t.text not in KEYWORDS and lhs.name == "CLASS":
            self.i += 1
            rhs = Const(t.text.lower())
        else:
            v = self.number()
            if self.accept("*"):
                rhs = Scaled(v, self.func())
            else:
                rhs = Const(v)
        if isinstance(rhs, Const) and isinstance(rhs.value, str) and lhs.name not in ("CLASS", "MD"):
            raise ParseError("string constants compare only with CLASS or MD", t.line, t.col)
        if isinstance(rhs, (Fn, Scaled)):
            fn = rhs.fn if isinstance(rhs, Scaled) else rhs
            if fn.name in BOOL_FUNCS:
                raise ParseError(f"{fn.name} is boolean-valued", t.line, t.col)
        return FuncAtom(lhs, op, rhs)

    # spatial terms

    def term(self) -> Term:
        t = self.cap_term()
        while self.accept("CUP"):
            t = Cup(t, self.cap_term())
        return t

    def cap_term(self) -> Term:
        t = self.until_term()
        while self.accept("CAP"):
            t = Cap(t, self.until_term())
        return t

    def until_term(self) -> Term:
        t = self.unary_term()
        while self.at("UNTILS", "RELEASES"):
            cls = UntilS if self.tok.text == "UNTILS" else ReleaseS
            self.i += 1
            iv = self.interval()
            t = cls(t, self.unary_term(), iv)
        return t

    def unary_term(self) -> Term:
        if self.accept("CMPL"):
            return Cmpl(self.unary_term())
        if self.accept("INT"):
            return Int(self.unary_term())
        if self.accept("CL"):
            return Cl(self.unary_term())
        for kw, cls in (("NEXTS", NextS), ("ALWAYSS", AlwaysS), ("EVENTUALLYS", EventuallyS)):
            if self.accept(kw):
                iv = self.interval()
                return cls(self.unary_term(), iv)
        if self.accept("BB"):
            self.expect("(")
            ref = self.id_ref()
            self.expect_close()
            return BB(ref)
        if self.accept("EMPTYSET"):
            return EmptySet()
        if self.accept("UNIVERSE"):
            return UniverseSet()
        if self.accept("("):
            t = self.term()
            self.expect_close()
            return t
        self.fail(f"unexpected {self.tok.text!r}", (
            "BB", "EMPTYSET", "UNIVERSE", "CMPL", "INT", "CL", "NEXTS", "ALWAYSS", "EVENTUALLYS", "(",
        ))


def parse(text: str, allow_free: bool = False) -> Formula:
    """Parse formula text.  Variables must be bound unless ``allow_free``."""
    return Parser(text, allow_free).parse()


def parse_term(text: str, allow_free: bool = True) -> Term:
    p = Parser(text, allow_free)
    t = p.term()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r}", ("CAP", "CUP", "UNTILS", "RELEASES", "<end of input>"))
    return t


def parse_file(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
