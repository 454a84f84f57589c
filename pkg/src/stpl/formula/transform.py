"""Structural analyses and rewrites: scoping, AAN, statistics, desugaring."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, fields, replace

from .syntax import (
    BB, EmptySet, PAST_OPS, SPATIAL_TEMPORAL, UNIVERSE_REF, AlwaysS, And, Always, Cap, Cl, Cmpl, Cup, EventuallyS,
    Eventually, Exists, Fn, Forall, Formula, FrameConstraint, Freeze, FuncAtom, IdCompare, Implies, Int, Interval,
    Next, NextS, Not, Or, Prev, Release, ReleaseS, Scaled, Since, SpatialExists, SpatialForall, Term, TimeConstraint,
    TrueF, UniverseSet, Until, UntilS, WeakNext, WeakPrev, children, id_refs, postorder, time_refs, walk,
)


def map_children(node, fn):
    """Rebuild ``node`` with ``fn`` applied to each formula/term/function child."""
    if isinstance(node, Fn):
        return Fn(node.name, tuple(fn(a) if isinstance(a, (Term, Fn)) else a for a in node.args))
    if isinstance(node, Scaled):
        return Scaled(node.factor, fn(node.fn))
    if isinstance(node, FuncAtom):
        return FuncAtom(fn(node.lhs), node.op, None if node.rhs is None else fn(node.rhs))
    changes = {}
    for f in fields(node):
        v = getattr(node, f.name)
        if isinstance(v, (Formula, Term)):
            changes[f.name] = fn(v)
    return replace(node, **changes) if changes else node


# scoping


def free_ids(node) -> frozenset:
    """ID variables occurring free (literal ids excluded)."""
    return _free(node)[0]


def free_times(node) -> frozenset:
    return _free(node)[1]


def _free(node) -> tuple[frozenset, frozenset]:
    ids = {r for r in id_refs(node) if isinstance(r, str)}
    times = set(time_refs(node))
    for c in children(node):
        ci, ct = _free(c)
        ids |= ci
        times |= ct
    if isinstance(node, (Exists, Forall)):
        ids.discard(node.var)
        if node.freeze:
            times.discard(node.freeze)
    elif isinstance(node, Freeze):
        times.discard(node.tvar)
    return frozenset(ids), frozenset(times)


def bound_names(node) -> set:
    out = set()
    for n in walk(node):
        if isinstance(n, (Exists, Forall)):
            out.add(n.var)
            if n.freeze:
                out.add(n.freeze)
        elif isinstance(n, Freeze):
            out.add(n.tvar)
        out.update(r for r in id_refs(n) if isinstance(r, str))
        out.update(time_refs(n))
    return out


def rename_apart(f: Formula) -> Formula:
    """Give every binder a distinct variable name (``name~k``), removing shadowing."""
    counter = itertools.count(1)

    def ref(r, env):
        return env.get(r, r) if isinstance(r, str) else r

    def go(n, env):
        if isinstance(n, (Exists, Forall)):
            env2 = dict(env)
            var = f"{n.var}~{next(counter)}"
            env2[n.var] = var
            fr = None
            if n.freeze:
                fr = f"{n.freeze}~{next(counter)}"
                env2[n.freeze] = fr
            return type(n)(var, fr, go(n.body, env2))
        if isinstance(n, Freeze):
            tv = f"{n.tvar}~{next(counter)}"
            return Freeze(tv, go(n.body, {**env, n.tvar: tv}))
        if isinstance(n, (TimeConstraint, FrameConstraint)):
            return replace(n, tvar=env.get(n.tvar, n.tvar))
        if isinstance(n, IdCompare):
            return IdCompare(ref(n.left, env), ref(n.right, env), n.equal)
        if isinstance(n, BB):
            return BB(ref(n.ref, env))
        if isinstance(n, Fn):
            return Fn(n.name, tuple(go(a, env) if isinstance(a, (Term, Fn)) else ref(a, env) for a in n.args))
        return map_children(n, lambda c: go(c, env))

    return go(f, {})


def freeze_of(f: Formula) -> dict:
    """Map each quantified ID variable to the time variable that freezes it (or None).

    Assumes binder names are unique, as produced by ``rename_apart``.
    """
    out = {}
    for n in walk(f):
        if isinstance(n, (Exists, Forall)):
            out[n.var] = n.freeze
    return out


def has_past(node) -> bool:
    return any(isinstance(n, PAST_OPS) for n in walk(node))


# AAN


@dataclass(frozen=True)
class AanViolation:
    variable: str
    kind: str  # "id" or "time"
    scope: str  # the freeze binder whose scope the use sits in

    def __str__(self) -> str:
        return f"{self.kind} variable {self.variable!r} used inside the scope of {self.scope}"


def validate_aan(f: Formula) -> list[AanViolation]:
    """Check the alternation-free, adjacent-freeze restriction.

    A freeze quantifier (``exists id @ x``) opens a fresh scope in which only
    its own ID and time variables, plus ID variables bound further inside, may
    be used.  A freeze-only binder (``freeze x``) hides outer time variables.
    Plain quantifiers do not open a scope.
    """
    out: list[AanViolation] = []

    def go(n, ids: frozenset, times: frozenset, scope: str, bound_ids: frozenset, bound_times: frozenset):
        for r in id_refs(n):
            if isinstance(r, str) and r in bound_ids and r not in ids:
                out.append(AanViolation(r, "id", scope))
        for t in time_refs(n):
            if t in bound_times and t not in times:
                out.append(AanViolation(t, "time", scope))
        if isinstance(n, (Exists, Forall)):
            bi, bt = bound_ids | {n.var}, bound_times
            if n.freeze:
                kw = "exists" if isinstance(n, Exists) else "forall"
                go(n.body, frozenset({n.var}), frozenset({n.freeze}), f"{kw} {n.var} @ {n.freeze}",
                   bi, bt | {n.freeze})
            else:
                go(n.body, ids | {n.var}, times, scope, bi, bt)
            return
        if isinstance(n, Freeze):
            go(n.body, ids, frozenset({n.tvar}), f"freeze {n.tvar}", bound_ids, bound_times | {n.tvar})
            return
        for c in children(n):
            go(c, ids, times, scope, bound_ids, bound_times)

    go(f, frozenset(), frozenset(), "the top level", frozenset(), frozenset())
    return out


def is_aan(f: Formula) -> bool:
    return not validate_aan(f)


# statistics


@dataclass(frozen=True)
class FormulaStats:
    n_temporal: int
    n_spatial: int
    n_time_vars: int
    max_id_scope: int

    def as_dict(self) -> dict:
        return {
            "n_temporal": self.n_temporal,
            "n_spatial": self.n_spatial,
            "n_time_vars": self.n_time_vars,
            "max_id_scope": self.max_id_scope,
        }


def stats(f: Formula) -> FormulaStats:
    """Count formula nodes, spatial-term nodes, freeze variables and the widest ID scope.

    Function expressions are part of their atom and are not counted
    separately; spatial terms inside ``AREA``/``RATIO`` count as spatial nodes.
    """
    n_t = n_s = 0
    tvars = set()
    for n in walk(f):
        if isinstance(n, Formula):
            n_t += 1
        elif isinstance(n, Term):
            n_s += 1
        if isinstance(n, (Exists, Forall)) and n.freeze:
            tvars.add(n.freeze)
        elif isinstance(n, Freeze):
            tvars.add(n.tvar)
    widest = 0

    def scope(n, depth):
        nonlocal widest
        if isinstance(n, (Exists, Forall)):
            scope(n.body, depth + 1)
            return
        kids = [c for c in children(n) if isinstance(c, Formula)]
        if not kids:
            widest = max(widest, depth)
        for c in kids:
            scope(c, depth)

    scope(f, 0)
    return FormulaStats(n_t, n_s, len(tvars), widest)


# desugaring


class _Fresh:
    def __init__(self, taken: set):
        self.taken = set(taken)
        self.k = 0

    def __call__(self) -> str:
        while True:
            self.k += 1
            name = f"_x{self.k}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def interval_guard(tvar: str, iv: Interval, weak: bool = False) -> Formula:
    """``lo <= CTIME - tvar <= hi`` (or the frame-count analogue)."""

    def atom(op, v):
        if iv.unit == "frame":
            if float(v).is_integer():
                return FrameConstraint(tvar, op, int(v))
            # a fractional frame bound rounds to the nearest admissible integer
            return FrameConstraint(tvar, op[0] + "=", math.ceil(v) if op[0] == ">" else math.floor(v))
        return TimeConstraint(tvar, op, v)

    g = atom(">=" if iv.lo_closed else ">", iv.lo)
    if iv.hi != math.inf:
        g = And(g, atom("<=" if iv.hi_closed else "<", iv.hi))
    return g


def expand_intervals(f: Formula) -> Formula:
    """Replace interval-bounded temporal operators by freeze-guarded unbounded ones."""
    fresh = _Fresh(bound_names(f))

    def go(n):
        n = map_children(n, go) if not isinstance(n, Term) else n
        iv = getattr(n, "interval", None) if isinstance(n, Formula) else None
        if iv is None:
            return n
        x = fresh()
        g = interval_guard(x, iv)
        if isinstance(n, Until):
            return Freeze(x, Until(n.left, And(g, n.right)))
        if isinstance(n, Release):
            return Freeze(x, Release(n.left, Implies(g, n.right)))
        if isinstance(n, Eventually):
            return Freeze(x, Eventually(And(g, n.arg)))
        if isinstance(n, Always):
            return Freeze(x, Always(Implies(g, n.arg)))
        if isinstance(n, Next):
            return Freeze(x, Next(And(g, n.arg)))
        raise TypeError(type(n))

    return go(f)


def desugar_term(t: Term) -> Term:
    """Spatial core: BB, EMPTYSET, UNIVERSE, CMPL, CAP, INT, UNTILS, NEXTS."""
    t = map_children(t, desugar_term)
    if isinstance(t, Cup):
        return Cmpl(Cap(Cmpl(t.left), Cmpl(t.right)))
    if isinstance(t, Cl):
        return Cmpl(Int(Cmpl(t.arg)))
    if isinstance(t, EventuallyS):
        return UntilS(UniverseSet(), t.arg, t.interval)
    if isinstance(t, AlwaysS):
        return Cmpl(UntilS(UniverseSet(), Cmpl(t.arg), t.interval))
    if isinstance(t, ReleaseS):
        return Cmpl(UntilS(Cmpl(t.left), Cmpl(t.right), t.interval))
    return t


def desugar(f: Formula) -> Formula:
    """Rewrite into the core fragment.

    Temporal core: true, not, or, next, until, prev, since, exists, freeze,
    constraints, ID equality, SE and function atoms.  Interval-bounded
    operators become freeze-guarded unbounded ones with fresh time variables.
    """
    f = expand_intervals(f)

    def go(n):
        if isinstance(n, Term):
            return desugar_term(n)
        n = map_children(n, go)
        if isinstance(n, And):
            return Not(Or(Not(n.left), Not(n.right)))
        if isinstance(n, Implies):
            return Or(Not(n.left), n.right)
        if isinstance(n, WeakNext):
            return Not(Next(Not(n.arg)))
        if isinstance(n, WeakPrev):
            return Not(Prev(Not(n.arg)))
        if isinstance(n, Release):
            return Not(Until(Not(n.left), Not(n.right)))
        if isinstance(n, Eventually):
            return Until(TrueF(), n.arg)
        if isinstance(n, Always):
            return Not(Until(TrueF(), Not(n.arg)))
        if isinstance(n, Forall):
            return Not(Exists(n.var, n.freeze, Not(n.body)))
        if isinstance(n, IdCompare) and not n.equal:
            return Not(IdCompare(n.left, n.right, True))
        if isinstance(n, SpatialForall):
            return Not(SpatialExists(Cmpl(n.term)))
        return n

    return go(f)


CORE_FORMULAS = (TrueF, Not, Or, Next, Until, Prev, Since, Exists, Freeze, TimeConstraint, FrameConstraint,
                 IdCompare, SpatialExists, FuncAtom)
CORE_TERMS = (BB, EmptySet, UniverseSet, Cmpl, Cap, Int, UntilS, NextS)


def is_core(f) -> bool:
    for n in walk(f):
        if isinstance(n, Formula):
            if not isinstance(n, CORE_FORMULAS) or getattr(n, "interval", None) is not None:
                return False
            if isinstance(n, IdCompare) and not n.equal:
                return False
        elif isinstance(n, Term) and not isinstance(n, CORE_TERMS):
            return False
    return True


def is_spatially_temporal(t: Term) -> bool:
    return any(isinstance(n, SPATIAL_TEMPORAL) for n in walk(t))


def uses_universe(n) -> bool:
    return isinstance(n, Fn) and UNIVERSE_REF in n.args


def subformulas(f: Formula) -> list[Formula]:
    """Formula nodes in post-order; list positions serve as subformula ids."""
    return [n for n in postorder(f) if isinstance(n, Formula)]


def closed(f: Formula) -> bool:
    return not free_ids(f) and not free_times(f)


__all__ = [
    "AanViolation", "FormulaStats", "closed", "desugar", "desugar_term", "expand_intervals", "free_ids",
    "free_times", "freeze_of", "has_past", "interval_guard", "is_aan", "is_core", "map_children",
    "rename_apart", "stats", "subformulas", "validate_aan",
]
