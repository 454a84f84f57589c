"""Seeded random streams and well-scoped random formulas for differential testing."""

from __future__ import annotations

import math
import random
from collections import Counter

from .datastream import DataObject, DataStream, build_stream
from .formula.syntax import (
    BB, AlwaysS, And, Always, Cap, Cl, Cmpl, Const, Cup, EmptySet, EventuallyS, Eventually, Exists, Fn, Forall,
    Formula, FrameConstraint, Freeze, FuncAtom, IdCompare, Implies, Int, Interval, Next, NextS, Not, Or, Prev,
    Release, ReleaseS, Scaled, Since, SpatialExists, SpatialForall, TimeConstraint, TrueF, UniverseSet, Until,
    UntilS, WeakNext, WeakPrev, walk,
)
from .spatial import Anchor, Box

CLASSES = ("car", "pedestrian", "cyclist", "none")
ANCHORS = tuple(Anchor)
CMP = ("<", "<=", ">", ">=", "==", "!=")


def random_stream(rng: random.Random, max_frames: int = 6, max_objects: int = 4, size: int = 12,
                  id_pool: int = 5) -> DataStream:
    """Small stream on an integer grid so boxes overlap and touch often."""
    n = rng.randint(1, max_frames)
    t = 0.0
    rows = []
    for i in range(n):
        if i:
            t += rng.choice((0.5, 1.0, 1.5))
        ids = rng.sample(range(1, id_pool + 1), rng.randint(0, max_objects))
        objs = []
        for oid in ids:
            x0, y0 = rng.randint(0, size - 1), rng.randint(0, size - 1)
            x1, y1 = rng.randint(x0, size), rng.randint(y0, size)
            objs.append(DataObject(
                oid, rng.choice(CLASSES), rng.choice((0.2, 0.5, 0.7, 0.9)), (x0, y0, x1, y1),
                empty=rng.random() < 0.3, md=rng.choice(("a", "b", None)), occ=rng.choice((0, 1, 2, None)),
                pc_count=rng.choice((None, None, 0, 7)),
            ))
        rows.append((i, t, objs))
    return build_stream(rows, Box(0, 0, size, size))


class FormulaGen:
    """Grammar-directed generator of closed formulas.

    Quantified variables are only referenced inside their scope, so every
    output parses back with scope checking on.  Use :func:`coverage` to check
    which operators a batch exercised.
    """

    def __init__(self, rng: random.Random, max_depth: int = 4, max_ids: int = 2, term_depth: int = 2,
                 allow_past: bool = True):
        self.rng = rng
        self.max_depth = max_depth
        self.max_ids = max_ids
        self.term_depth = term_depth
        self.allow_past = allow_past
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def interval(self) -> Interval | None:
        r = self.rng
        if r.random() < 0.5:
            return None
        lo = r.choice((0, 0, 0.5, 1, 2))
        hi = r.choice((lo, lo + 1, lo + 2, math.inf))
        unit = r.choice(("time", "frame"))
        if unit == "frame":
            lo, hi = math.floor(lo), (hi if hi == math.inf else math.floor(hi) + 1)
        return Interval(lo, hi, True, hi != math.inf, unit)

    def ref(self, ids):
        if ids and self.rng.random() < 0.85:
            return self.rng.choice(ids)[0]
        return self.rng.randint(1, 5)

    def formula(self, ids: tuple = (), times: tuple = (), depth: int | None = None) -> Formula:
        r = self.rng
        depth = self.max_depth if depth is None else depth
        if depth <= 0 or r.random() < 0.2:
            return self.atom(ids, times)
        d = depth - 1
        ops = ["not", "and", "or", "implies", "next", "wnext", "until", "release", "always", "eventually",
               "freeze", "quant", "quant"]
        if self.allow_past:
            ops += ["prev", "wprev", "since"]
        op = r.choice(ops)
        if op == "quant" and len(ids) >= self.max_ids:
            op = "and"
        sub = lambda: self.formula(ids, times, d)  # noqa: E731
        if op == "not":
            return Not(sub())
        if op in ("and", "or", "implies"):
            return {"and": And, "or": Or, "implies": Implies}[op](sub(), sub())
        if op == "next":
            return Next(sub(), self.interval())
        if op == "wnext":
            return WeakNext(sub())
        if op == "prev":
            return Prev(sub())
        if op == "wprev":
            return WeakPrev(sub())
        if op == "since":
            return Since(sub(), sub())
        if op in ("until", "release"):
            cls = Until if op == "until" else Release
            return cls(sub(), sub(), self.interval())
        if op in ("always", "eventually"):
            cls = Always if op == "always" else Eventually
            return cls(sub(), self.interval())
        if op == "freeze":
            x = self.fresh("x")
            return Freeze(x, self.formula(ids, times + (x,), d))
        var = self.fresh("id")
        tv = self.fresh("x") if r.random() < 0.5 else None
        body = self.formula(ids + ((var, tv),), times + ((tv,) if tv else ()), d)
        return (Exists if r.random() < 0.5 else Forall)(var, tv, body)

    def atom(self, ids, times) -> Formula:
        r = self.rng
        kinds = ["true", "se", "sa", "func", "func"]
        if times:
            kinds += ["ctime", "cframe"]
        if ids:
            kinds += ["ideq"]
        k = r.choice(kinds)
        if k == "true":
            return TrueF()
        if k == "ctime":
            return TimeConstraint(r.choice(times), r.choice(CMP), r.choice((0, 0.5, 1, 1.5, 2, 3)))
        if k == "cframe":
            mod = r.choice((None, None, 2, 3))
            return FrameConstraint(r.choice(times), r.choice(CMP), r.randint(0, 3), mod)
        if k == "ideq":
            return IdCompare(self.ref(ids), self.ref(ids), r.random() < 0.6)
        if k in ("se", "sa"):
            t = self.term(ids, self.term_depth)
            return SpatialExists(t) if k == "se" else SpatialForall(t)
        return self.func_atom(ids)

    def term(self, ids, depth):
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            leaf = r.random()
            if leaf < 0.8:
                return BB(self.ref(ids))
            return EmptySet() if leaf < 0.9 else UniverseSet()
        d = depth - 1
        op = r.choice(("cmpl", "cap", "cup", "int", "cl", "until", "release", "next", "always", "eventually"))
        if op in ("cmpl", "int", "cl"):
            return {"cmpl": Cmpl, "int": Int, "cl": Cl}[op](self.term(ids, d))
        if op in ("cap", "cup"):
            return (Cap if op == "cap" else Cup)(self.term(ids, d), self.term(ids, d))
        if op in ("until", "release"):
            return (UntilS if op == "until" else ReleaseS)(self.term(ids, d), self.term(ids, d), self.interval())
        cls = {"next": NextS, "always": AlwaysS, "eventually": EventuallyS}[op]
        return cls(self.term(ids, d), self.interval())

    def func_atom(self, ids) -> Formula:
        r = self.rng
        a, b = self.ref(ids), self.ref(ids)
        k = r.choice(("class", "classc", "prob", "lat", "dist", "area", "areat", "ratio", "empty", "visible",
                      "md", "occ"))
        if k == "class":
            return FuncAtom(Fn("CLASS", (a,)), r.choice(("==", "!=")), Const(r.choice(CLASSES)))
        if k == "classc":
            rhs = Fn("CLASS", (b,)) if r.random() < 0.5 else Const(0)
            return FuncAtom(Fn("CLASS", (a,)), r.choice(CMP), rhs)
        if k == "prob":
            rhs = Const(r.choice((0.3, 0.6, 0.8))) if r.random() < 0.5 else Scaled(r.choice((0.5, 1, 2)),
                                                                                      Fn("PROB", (b,)))
            return FuncAtom(Fn("PROB", (a,)), r.choice(CMP), rhs)
        if k == "lat":
            name = r.choice(("LAT", "LON"))
            rhs = Const(r.randint(0, 12)) if r.random() < 0.5 else Fn(r.choice(("LAT", "LON")),
                                                                     (b, r.choice(ANCHORS)))
            return FuncAtom(Fn(name, (a, r.choice(ANCHORS))), r.choice(CMP), rhs)
        if k == "dist":
            target = b if r.random() < 0.7 else "UNIVERSE"
            return FuncAtom(Fn("DIST", (a, r.choice(ANCHORS), target, r.choice(ANCHORS))), r.choice(CMP),
                            Const(r.choice((2, 5, 8))))
        if k == "area":
            return FuncAtom(Fn("AREA", (a,)), r.choice(CMP), Fn("AREA", (b,)))
        if k == "areat":
            return FuncAtom(Fn("AREA", (self.term(ids, 1),)), r.choice(CMP), Const(r.choice((0, 10, 40))))
        if k == "ratio":
            return FuncAtom(Fn("RATIO", (Fn("AREA", (self.term(ids, 1),)), Fn("AREA", (BB(b),)))), r.choice(CMP),
                            Const(r.choice((0.1, 0.5, 1))))
        if k == "empty":
            return FuncAtom(Fn("EMPTY", (a,)))
        if k == "visible":
            return FuncAtom(Fn("VISIBLE", ("UNIVERSE", Anchor.CT, a, b)))
        if k == "md":
            return FuncAtom(Fn("MD", (a,)), r.choice(("==", "!=")), Fn("MD", (b,)))
        return FuncAtom(Fn("OCC", (a,)), r.choice(CMP), Const(r.randint(0, 2)))


def coverage(formulas) -> Counter:
    """Node-kind histogram over a batch (interval-bounded operators counted separately)."""
    c: Counter = Counter()
    for f in formulas:
        for n in walk(f):
            name = type(n).__name__
            if getattr(n, "interval", None) is not None:
                name += f"[{n.interval.unit}]"
            if isinstance(n, (Exists, Forall)) and n.freeze:
                name += "@"
            if isinstance(n, FrameConstraint) and n.modulo:
                name += "%"
            if isinstance(n, Fn):
                name = n.name
            c[name] += 1
    return c


def pairs(seed: int, count: int, **kw):
    """Yield ``(formula, stream, bb_resolution)`` triples from one seed."""
    rng = random.Random(seed)
    for _ in range(count):
        gen = FormulaGen(rng, **kw)
        yield gen.formula(), random_stream(rng), rng.choice(("frozen", "current"))
