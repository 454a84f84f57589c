"""Abstract syntax for temporal formulas, spatial terms and function atoms.

Nodes are immutable dataclasses compared structurally.  ID references are
strings for bound variables, ints for literal object ids, and the string
``"UNIVERSE"`` where a function accepts the universe as a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

from ..spatial import Anchor

UNIVERSE_REF = "UNIVERSE"
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")

IdRef = Union[str, int]


@dataclass(frozen=True)
class Interval:
    """Non-negative offset interval measured in seconds (``time``) or frames (``frame``)."""

    lo: float = 0.0
    hi: float = math.inf
    lo_closed: bool = True
    hi_closed: bool = True
    unit: str = "time"

    def contains(self, d: float) -> bool:
        return (self.lo < d or (self.lo_closed and d == self.lo)) and (
            d < self.hi or (self.hi_closed and d == self.hi)
        )

    @property
    def unbounded(self) -> bool:
        return self.hi == math.inf


# spatial terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class BB(Term):
    ref: IdRef


@dataclass(frozen=True)
class EmptySet(Term):
    pass


@dataclass(frozen=True)
class UniverseSet(Term):
    pass


@dataclass(frozen=True)
class Cmpl(Term):
    arg: Term


@dataclass(frozen=True)
class Int(Term):
    arg: Term


@dataclass(frozen=True)
class Cl(Term):
    arg: Term


@dataclass(frozen=True)
class Cap(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Cup(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class UntilS(Term):
    left: Term
    right: Term
    interval: Interval | None = None


@dataclass(frozen=True)
class ReleaseS(Term):
    left: Term
    right: Term
    interval: Interval | None = None


@dataclass(frozen=True)
class NextS(Term):
    arg: Term
    interval: Interval | None = None


@dataclass(frozen=True)
class AlwaysS(Term):
    arg: Term
    interval: Interval | None = None


@dataclass(frozen=True)
class EventuallyS(Term):
    arg: Term
    interval: Interval | None = None


# function expressions


@dataclass(frozen=True)
class Fn:
    """Function application.  ``args`` mixes id refs, anchors, terms and nested ``Fn``."""

    name: str
    args: tuple


@dataclass(frozen=True)
class Scaled:
    factor: float
    fn: Fn


@dataclass(frozen=True)
class Const:
    value: Union[float, str]


# formulas


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula
    interval: Interval | None = None


@dataclass(frozen=True)
class WeakNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    interval: Interval | None = None


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula
    interval: Interval | None = None


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula
    interval: Interval | None = None


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula
    interval: Interval | None = None


@dataclass(frozen=True)
class Prev(Formula):
    arg: Formula


@dataclass(frozen=True)
class WeakPrev(Formula):
    arg: Formula


@dataclass(frozen=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    freeze: str | None
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    freeze: str | None
    body: Formula


@dataclass(frozen=True)
class Freeze(Formula):
    tvar: str
    body: Formula


@dataclass(frozen=True)
class TimeConstraint(Formula):
    """``CTIME - tvar <op> value``."""

    tvar: str
    op: str
    value: float


@dataclass(frozen=True)
class FrameConstraint(Formula):
    """``CFRAME - tvar <op> value``, or ``(CFRAME - tvar) % modulo <op> value``."""

    tvar: str
    op: str
    value: int
    modulo: int | None = None


@dataclass(frozen=True)
class IdCompare(Formula):
    left: IdRef
    right: IdRef
    equal: bool = True


@dataclass(frozen=True)
class SpatialExists(Formula):
    term: Term


@dataclass(frozen=True)
class SpatialForall(Formula):
    term: Term


@dataclass(frozen=True)
class FuncAtom(Formula):
    """``lhs <op> rhs``; with ``op`` None the boolean-valued ``lhs`` is the atom."""

    lhs: Fn
    op: str | None = None
    rhs: Union[Fn, Scaled, Const, None] = None


QUANTIFIERS = (Exists, Forall)
FREEZE_BINDERS = (Exists, Forall, Freeze)
PAST_OPS = (Prev, WeakPrev, Since)
SPATIAL_TEMPORAL = (UntilS, ReleaseS, NextS, AlwaysS, EventuallyS)


def children(node) -> tuple:
    """Direct formula/term/function children, in source order."""
    if isinstance(node, (TrueF, TimeConstraint, FrameConstraint, IdCompare, BB, EmptySet, UniverseSet, Const)):
        return ()
    if isinstance(node, (Not, Next, WeakNext, Always, Eventually, Prev, WeakPrev)):
        return (node.arg,)
    if isinstance(node, (And, Or, Implies, Until, Release, Since)):
        return (node.left, node.right)
    if isinstance(node, (Exists, Forall, Freeze)):
        return (node.body,)
    if isinstance(node, (SpatialExists, SpatialForall)):
        return (node.term,)
    if isinstance(node, FuncAtom):
        return (node.lhs,) if node.rhs is None else (node.lhs, node.rhs)
    if isinstance(node, Fn):
        return tuple(a for a in node.args if isinstance(a, (Term, Fn)))
    if isinstance(node, Scaled):
        return (node.fn,)
    if isinstance(node, (Cmpl, Int, Cl, NextS, AlwaysS, EventuallyS)):
        return (node.arg,)
    if isinstance(node, (Cap, Cup, UntilS, ReleaseS)):
        return (node.left, node.right)
    raise TypeError(f"not a syntax node: {node!r}")


def walk(node) -> Iterator:
    """Pre-order traversal over every formula, term and function node."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def postorder(node) -> list:
    out: list = []

    def go(n):
        for c in children(n):
            go(c)
        out.append(n)

    go(node)
    return out


def id_refs(node) -> tuple:
    """ID references that appear directly in a node (not in its children)."""
    if isinstance(node, IdCompare):
        return (node.left, node.right)
    if isinstance(node, BB):
        return (node.ref,)
    if isinstance(node, Fn):
        return tuple(a for a in node.args if isinstance(a, (str, int)) and not isinstance(a, bool)
                     and a != UNIVERSE_REF)
    return ()


def time_refs(node) -> tuple:
    if isinstance(node, (TimeConstraint, FrameConstraint)):
        return (node.tvar,)
    return ()


def is_anchor(a) -> bool:
    return isinstance(a, Anchor)
