"""Render syntax trees back to the textual form accepted by the parser."""

from __future__ import annotations

import math

from ..spatial import Anchor
from .syntax import (
    BB, AlwaysS, And, Always, Cap, Cl, Cmpl, Const, Cup, EmptySet, EventuallyS, Eventually, Exists, Fn, Forall,
    FrameConstraint, Freeze, FuncAtom, IdCompare, Implies, Int, Interval, Next, NextS, Not, Or, Prev, Release,
    ReleaseS, Scaled, Since, SpatialExists, SpatialForall, TimeConstraint, TrueF, UniverseSet, Until, UntilS,
    WeakNext, WeakPrev,
)

# binding strength; operands weaker than their parent get parentheses
_PREC = {Implies: 1, Or: 2, And: 3, Until: 4, Release: 4, Since: 4}
_TPREC = {Cup: 1, Cap: 2, UntilS: 3, ReleaseS: 3}


def num(v: float) -> str:
    if v == math.inf:
        return "inf"
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def interval(iv: Interval | None) -> str:
    if iv is None:
        return ""
    close = "]" if iv.hi_closed else ")"
    return f"[{num(iv.lo)},{num(iv.hi)}{close}{'f' if iv.unit == 'frame' else 't'}"


def _ref(r) -> str:
    return str(r)


def term(t) -> str:
    if isinstance(t, BB):
        return f"BB({_ref(t.ref)})"
    if isinstance(t, EmptySet):
        return "EMPTYSET"
    if isinstance(t, UniverseSet):
        return "UNIVERSE"
    if isinstance(t, (Cmpl, Int, Cl)):
        kw = {Cmpl: "CMPL", Int: "INT", Cl: "CL"}[type(t)]
        return f"{kw} {_tsub(t.arg, 9)}"
    if isinstance(t, (NextS, AlwaysS, EventuallyS)):
        kw = {NextS: "NEXTS", AlwaysS: "ALWAYSS", EventuallyS: "EVENTUALLYS"}[type(t)]
        return f"{kw}{interval(t.interval)} {_tsub(t.arg, 9)}"
    p = _TPREC[type(t)]
    if isinstance(t, (UntilS, ReleaseS)):
        kw = "UNTILS" if isinstance(t, UntilS) else "RELEASES"
        return f"{_tsub(t.left, p)} {kw}{interval(t.interval)} {_tsub(t.right, p + 1)}"
    kw = "CAP" if isinstance(t, Cap) else "CUP"
    return f"{_tsub(t.left, p)} {kw} {_tsub(t.right, p + 1)}"


def _tsub(t, min_prec: int) -> str:
    s = term(t)
    if _TPREC.get(type(t), 10) < min_prec:
        return f"({s})"
    return s


def fn(f) -> str:
    if isinstance(f, Scaled):
        return f"{num(f.factor)} * {fn(f.fn)}"
    if isinstance(f, Const):
        if isinstance(f.value, str):
            return f'"{f.value}"'
        return num(f.value)
    args = []
    for a in f.args:
        if isinstance(a, Anchor):
            args.append(a.value)
        elif isinstance(a, Fn):
            args.append(fn(a))
        elif isinstance(a, (str, int)):
            args.append(_ref(a))
        else:
            args.append(term(a))
    return f"{f.name}({', '.join(args)})"


def formula(f) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Not):
        return f"not {_sub(f.arg, 9)}"
    if isinstance(f, (Next, Always, Eventually)):
        kw = {Next: "next", Always: "always", Eventually: "eventually"}[type(f)]
        return f"{kw}{interval(f.interval)} {_sub(f.arg, 9)}"
    if isinstance(f, (WeakNext, Prev, WeakPrev)):
        kw = {WeakNext: "wnext", Prev: "prev", WeakPrev: "wprev"}[type(f)]
        return f"{kw} {_sub(f.arg, 9)}"
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        at = f" @ {f.freeze}" if f.freeze else ""
        return f"{kw} {f.var}{at}. {formula(f.body)}"
    if isinstance(f, Freeze):
        return f"freeze {f.tvar}. {formula(f.body)}"
    if isinstance(f, TimeConstraint):
        return f"CTIME - {f.tvar} {f.op} {num(f.value)}"
    if isinstance(f, FrameConstraint):
        if f.modulo is not None:
            return f"(CFRAME - {f.tvar}) % {f.modulo} {f.op} {f.value}"
        return f"CFRAME - {f.tvar} {f.op} {f.value}"
    if isinstance(f, IdCompare):
        return f"{_ref(f.left)} {'==' if f.equal else '!='} {_ref(f.right)}"
    if isinstance(f, SpatialExists):
        return f"SE({term(f.term)})"
    if isinstance(f, SpatialForall):
        return f"SA({term(f.term)})"
    if isinstance(f, FuncAtom):
        if f.op is None:
            return fn(f.lhs)
        return f"{fn(f.lhs)} {f.op} {fn(f.rhs)}"
    p = _PREC[type(f)]
    if isinstance(f, Implies):
        return f"{_sub(f.left, p + 1)} implies {_sub(f.right, p)}"
    kw = {And: "and", Or: "or", Until: "until", Release: "release", Since: "since"}[type(f)]
    iv = interval(getattr(f, "interval", None))
    return f"{_sub(f.left, p)} {kw}{iv} {_sub(f.right, p + 1)}"


def _sub(f, min_prec: int) -> str:
    s = formula(f)
    # quantifier bodies run to the right, so they always need brackets as operands
    if isinstance(f, (Exists, Forall, Freeze)) or _PREC.get(type(f), 10) < min_prec:
        return f"({s})"
    return s


def pretty_print(node) -> str:
    """Text that parses back to the same tree."""
    if isinstance(node, (BB, EmptySet, UniverseSet, Cmpl, Int, Cl, Cap, Cup, UntilS, ReleaseS, NextS, AlwaysS,
                         EventuallyS)):
        return term(node)
    return formula(node)
