"""Reference evaluator: a direct recursive reading of the satisfaction relation.

It favours transparency over speed (memoised, but exponential in the
quantifier nesting) and serves as the oracle for the DP monitor.  Every
operator, including the derived ones and interval-bounded temporal
operators, is interpreted natively rather than through desugaring.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import functions
from .common import Binding, MonitorConfig, Verdict
from .datastream import DataObject, DataStream
from .formula.syntax import (
    BB, AlwaysS, And, Always, Cap, Cl, Cmpl, Cup, EmptySet, EventuallyS, Eventually, Exists, Forall, Formula,
    FrameConstraint, Freeze, FuncAtom, IdCompare, Implies, Int, Interval, Next, NextS, Not, Or, Prev, Release,
    ReleaseS, Since, SpatialExists, SpatialForall, Term, TimeConstraint, TrueF, UniverseSet, Until, UntilS,
    WeakNext, WeakPrev,
)
from .spatial import STATS, Box, Region

_UNBOUNDED = Interval()


@dataclass(frozen=True)
class Env:
    """Valuations: object per ID variable, freeze frame per ID variable, frame per time variable."""

    eps: tuple = ()
    zeta: tuple = ()
    times: tuple = ()

    def bind_id(self, var: str, obj: int, frame: int | None) -> Env:
        return Env(_put(self.eps, var, obj), _put(self.zeta, var, frame), self.times)

    def bind_time(self, var: str, frame: int) -> Env:
        return Env(self.eps, self.zeta, _put(self.times, var, frame))

    def obj_id(self, ref):
        return ref if isinstance(ref, int) else dict(self.eps)[ref]

    def frozen_at(self, ref) -> int | None:
        return None if isinstance(ref, int) else dict(self.zeta)[ref]

    def time(self, var: str) -> int:
        return dict(self.times)[var]


def _put(pairs: tuple, key, val) -> tuple:
    return tuple(sorted({**dict(pairs), key: val}.items(), key=lambda kv: kv[0]))


class RefEvaluator:
    def __init__(self, stream: DataStream, config: MonitorConfig | None = None):
        self.stream = stream
        self.config = config or MonitorConfig()
        self.n = len(stream)
        self.universe: Box = stream.meta.universe
        self._memo: dict = {}
        self._smemo: dict = {}
        # memo keys use id(node); pinning the nodes keeps those ids from being reused
        self._pinned: dict = {}

    # helpers

    def _offset(self, j: int, i: int, iv: Interval) -> float:
        return j - i if iv.unit == "frame" else functions.elapsed(self.stream, j, i)

    def _in(self, j: int, i: int, iv: Interval | None) -> bool:
        iv = iv or _UNBOUNDED
        return iv.contains(self._offset(j, i, iv))

    def resolve(self, ref, env: Env, i: int, for_box: bool = False) -> DataObject | None:
        k = env.frozen_at(ref)
        if k is None or (for_box and self.config.bb_resolution == "current"):
            k = i
        return self.stream.retrieve(k, env.obj_id(ref))

    # formulas

    def holds(self, f: Formula, i: int, env: Env = Env()) -> bool:
        key = (id(f), i, env)
        hit = self._memo.get(key)
        if hit is None:
            self._pinned[id(f)] = f
            hit = self._holds(f, i, env)
            self._memo[key] = hit
        return hit

    def _holds(self, f: Formula, i: int, env: Env) -> bool:
        h = self.holds
        n = self.n
        if isinstance(f, TrueF):
            return True
        if isinstance(f, Not):
            return not h(f.arg, i, env)
        if isinstance(f, And):
            return h(f.left, i, env) and h(f.right, i, env)
        if isinstance(f, Or):
            return h(f.left, i, env) or h(f.right, i, env)
        if isinstance(f, Implies):
            return (not h(f.left, i, env)) or h(f.right, i, env)
        if isinstance(f, Next):
            return i + 1 < n and self._in(i + 1, i, f.interval) and h(f.arg, i + 1, env)
        if isinstance(f, WeakNext):
            return i + 1 >= n or h(f.arg, i + 1, env)
        if isinstance(f, Prev):
            return i > 0 and h(f.arg, i - 1, env)
        if isinstance(f, WeakPrev):
            return i == 0 or h(f.arg, i - 1, env)
        if isinstance(f, Until):
            return self._until(f.left, f.right, f.interval, i, env)
        if isinstance(f, Release):
            # dual of until over the same window
            for j in range(i, n):
                if self._in(j, i, f.interval) and not h(f.right, j, env):
                    if not any(h(f.left, k, env) for k in range(i, j)):
                        return False
            return True
        if isinstance(f, Eventually):
            return any(self._in(j, i, f.interval) and h(f.arg, j, env) for j in range(i, n))
        if isinstance(f, Always):
            return all(not self._in(j, i, f.interval) or h(f.arg, j, env) for j in range(i, n))
        if isinstance(f, Since):
            return any(
                h(f.right, j, env) and all(h(f.left, k, env) for k in range(j + 1, i + 1)) for j in range(i, -1, -1)
            )
        if isinstance(f, (Exists, Forall)):
            results = (
                h(f.body, i, self._bind(f, k, i, env)) for k in self.stream.ids(i)
            )
            return any(results) if isinstance(f, Exists) else all(results)
        if isinstance(f, Freeze):
            return h(f.body, i, env.bind_time(f.tvar, i))
        if isinstance(f, TimeConstraint):
            return functions.compare(functions.elapsed(self.stream, i, env.time(f.tvar)), f.op, f.value)
        if isinstance(f, FrameConstraint):
            d = i - env.time(f.tvar)
            if f.modulo is not None:
                d %= f.modulo
            return functions.compare(d, f.op, f.value)
        if isinstance(f, IdCompare):
            return (env.obj_id(f.left) == env.obj_id(f.right)) == f.equal
        if isinstance(f, SpatialExists):
            return not self.sval(f.term, i, env).is_empty()
        if isinstance(f, SpatialForall):
            return self.sval(f.term, i, env).is_universe()
        if isinstance(f, FuncAtom):
            return functions.holds(f, _AtomCtx(self, i, env))
        raise TypeError(f"unknown formula node {f!r}")

    @staticmethod
    def _bind(q, k: int, i: int, env: Env) -> Env:
        env = env.bind_id(q.var, k, i if q.freeze else None)
        return env.bind_time(q.freeze, i) if q.freeze else env

    def _until(self, left, right, iv, i: int, env: Env) -> bool:
        for j in range(i, self.n):
            if self._in(j, i, iv) and self.holds(right, j, env):
                return True
            if not self.holds(left, j, env):
                return False
        return False

    # spatial terms

    def sval(self, t: Term, i: int, env: Env) -> Region:
        key = (id(t), i, env)
        hit = self._smemo.get(key)
        if hit is None:
            self._pinned[id(t)] = t
            hit = self._sval(t, i, env)
            self._smemo[key] = hit
        return hit

    def _sval(self, t: Term, i: int, env: Env) -> Region:
        u = self.universe
        canon = self.config.canonicalize
        s = self.sval
        if isinstance(t, BB):
            o = self.resolve(t.ref, env, i, for_box=True)
            return Region.empty(u) if o is None else Region.from_box(Box(*o.bbox), u)
        if isinstance(t, EmptySet):
            return Region.empty(u)
        if isinstance(t, UniverseSet):
            return Region.full(u)
        if isinstance(t, Cmpl):
            return s(t.arg, i, env).complement(canon)
        if isinstance(t, Cap):
            return s(t.left, i, env).intersect(s(t.right, i, env), canon)
        if isinstance(t, Cup):
            return s(t.left, i, env).union(s(t.right, i, env), canon)
        if isinstance(t, Int):
            return s(t.arg, i, env).interior()
        if isinstance(t, Cl):
            return s(t.arg, i, env).closure()
        if isinstance(t, UntilS):
            return self._until_s(lambda k: s(t.left, k, env), lambda k: s(t.right, k, env), t.interval, i)
        if isinstance(t, EventuallyS):
            return self._until_s(lambda k: Region.full(u), lambda k: s(t.arg, k, env), t.interval, i)
        if isinstance(t, AlwaysS):
            ev = self._until_s(lambda k: Region.full(u), lambda k: s(t.arg, k, env).complement(canon), t.interval, i)
            return ev.complement(canon)
        if isinstance(t, ReleaseS):
            r = self._until_s(
                lambda k: s(t.left, k, env).complement(canon),
                lambda k: s(t.right, k, env).complement(canon),
                t.interval,
                i,
            )
            return r.complement(canon)
        if isinstance(t, NextS):
            if i + 1 < self.n and self._in(i + 1, i, t.interval):
                return s(t.arg, i + 1, env)
            return Region.empty(u)
        raise TypeError(f"unknown term node {t!r}")

    def _until_s(self, left, right, iv, i: int) -> Region:
        canon = self.config.canonicalize
        out = Region.empty(self.universe)
        for j in range(i, self.n):
            if not self._in(j, i, iv):
                continue
            part = right(j)
            for k in range(i, j):
                part = part.intersect(left(k), canon)
            out = out.union(part, canon)
        return out

    # entry points

    def table(self, f: Formula) -> list[bool]:
        """Truth value of a closed formula at every frame."""
        return [self.holds(f, i) for i in range(self.n)]

    def witness(self, f: Formula, i: int = 0) -> tuple[Binding, ...] | None:
        """Bindings for the leading ``eventually``/``exists`` chain, if it is satisfied."""
        start = i
        if isinstance(f, Eventually) and f.interval is None:
            hits = [j for j in range(i, self.n) if self.holds(f.arg, j)]
            if not hits:
                return None
            start, f = hits[0], f.arg
        return self.bindings(f, start)

    def bindings(self, f: Formula, i: int, env: Env = Env()) -> tuple[Binding, ...] | None:
        out: list[Binding] = []
        while isinstance(f, Exists):
            for k in self.stream.ids(i):
                e2 = self._bind(f, k, i, env)
                if self.holds(f.body, i, e2):
                    out.append(Binding(f.var, k, i))
                    env, f = e2, f.body
                    break
            else:
                return None
        return tuple(out) if out else None


class _AtomCtx:
    __slots__ = ("ev", "i", "env", "stream")

    def __init__(self, ev: RefEvaluator, i: int, env: Env):
        self.ev, self.i, self.env, self.stream = ev, i, env, ev.stream

    def obj(self, ref):
        return self.ev.resolve(ref, self.env, self.i)

    def region(self, term):
        return self.ev.sval(term, self.i, self.env)


def satisfies(f: Formula, stream: DataStream, config: MonitorConfig | None = None, witness: bool = False) -> Verdict:
    """Evaluate ``f`` at frame 0 of ``stream``."""
    STATS.reset()
    if len(stream) == 0:
        return Verdict(False, None, {"region_ops": 0, "peak_boxes": 0})
    ev = RefEvaluator(stream, config)
    value = ev.holds(f, 0)
    w = ev.witness(f) if (witness and value) else None
    return Verdict(value, w, {"region_ops": STATS.ops, "peak_boxes": STATS.peak_boxes})
