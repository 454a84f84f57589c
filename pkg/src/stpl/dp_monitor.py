"""Dynamic-programming offline monitor.

Each subformula gets a table indexed by frame and by the values of its free
ID variables (one numpy axis per variable, over every object id in the
stream).  Temporal operators fill their tables with the usual backward
recurrences (forward for past operators); quantifiers reduce one axis over
the ids present in the frame.

Freeze binders are evaluated cluster by cluster, innermost first: for a
freeze frame ``t`` the binder body is evaluated over frames ``t..n-1`` with
the time variable pinned to ``t``, and the value at ``t`` is stored in the
freeze table.  When the body has no outer dependencies that table is
computed once per frame and shared by every enclosing context.

Evaluation is demand driven.  A boolean *need* mask travels top-down, so an
atom is computed only for (frame, id combination) cells that some ancestor
can observe.  Conjunctions evaluate cheap operands first and narrow the mask
for the rest.  The same mechanism bounds the frame horizon of formulas made
only of next operators.

Spatial terms are evaluated per needed cell.  Spatio-temporal terms keep a
per-binding column of regions filled by a backward sweep; terms that read no
frozen box are computed once for all freeze frames.
"""

from __future__ import annotations

import json
import math
import operator
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import functions
from .common import Binding, MonitorConfig, UnsupportedFormula, Verdict, base_name
from .datastream import DataStream
from .formula.syntax import (
    BB, UNIVERSE_REF, AlwaysS, And, Always, Cap, Cl, Cmpl, Const, Cup, EmptySet, EventuallyS, Eventually, Exists,
    Fn, Forall, Formula, FrameConstraint, Freeze, FuncAtom, IdCompare, Implies, Int, Interval, Next, NextS, Not,
    Or, Prev, Release, ReleaseS, Scaled, Since, SpatialExists, SpatialForall, Term, TimeConstraint, TrueF,
    UniverseSet, Until, UntilS, WeakNext, WeakPrev, walk,
)
from .formula.transform import expand_intervals, free_ids, free_times, freeze_of, has_past, is_spatially_temporal, \
    rename_apart, stats, subformulas
from .spatial import STATS, Box, Region, anchor_of

_CMP = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge, "==": operator.eq,
        "!=": operator.ne}
_VECTOR_FUNCS = {"CLASS", "PROB", "LAT", "LON", "AREA", "DIST", "EMPTY", "OCC"}
_UNBOUNDED = Interval()


class DPMonitor:
    def __init__(self, formula: Formula, stream: DataStream, config: MonitorConfig | None = None):
        self.config = config or MonitorConfig()
        self.source = formula
        self.f = rename_apart(expand_intervals(formula))
        self.stream = stream
        self.n = len(stream)
        self.dom = np.asarray(stream.all_ids(), dtype=np.int64)
        self.D = len(self.dom)
        self.index = {int(k): j for j, k in enumerate(self.dom)}
        self.present = np.zeros((self.n, self.D), dtype=bool)
        for i, fr in enumerate(stream.frames):
            for oid in fr.objects:
                self.present[i, self.index[oid]] = True
        self.nonempty = self.present.any(axis=1)
        self.tau = np.asarray([fr.time for fr in stream.frames], dtype=float)
        self.frozen_by = freeze_of(self.f)
        self.universe: Box = stream.meta.universe
        self._axes: dict = {}
        self._pinned: dict = {}
        self._times: dict = {}
        self._cost: dict = {}
        self._past: dict = {}
        self._attr: dict = {}
        self.freeze_tables: dict = {}  # id(node) -> {t: bool}
        self._columns: dict = {}  # spatio-temporal region columns
        self._cell_memo: dict = {}  # frame-local atoms keyed by their resolved inputs
        self._local: dict = {}
        self._ids = {id(n): k for k, n in enumerate(subformulas(self.f))}
        self._trace = open(self.config.trace, "w") if self.config.trace else None
        self._pool = ThreadPoolExecutor(self.config.workers) if self.config.parallel else None
        self.cells = 0

    def close(self) -> None:
        if self._trace:
            self._trace.close()
            self._trace = None
        if self._pool:
            self._pool.shutdown()
            self._pool = None

    # static structure

    def axes(self, node) -> tuple:
        k = id(node)
        if k not in self._axes:
            # caches are keyed by id(node); pinning keeps foreign nodes' ids from being reused
            self._pinned[k] = node
            self._axes[k] = tuple(sorted(free_ids(node)))
        return self._axes[k]

    def outer_times(self, node) -> frozenset:
        k = id(node)
        if k not in self._times:
            self._times[k] = free_times(node)
        return self._times[k]

    def past(self, node) -> bool:
        k = id(node)
        if k not in self._past:
            self._past[k] = has_past(node)
        return self._past[k]

    def cost(self, node) -> int:
        k = id(node)
        if k not in self._cost:
            c = 0
            for m in walk(node):
                c += 1
                if isinstance(m, (Term, Exists, Forall, Freeze)) or (isinstance(m, Fn) and m.name == "VISIBLE"):
                    c += 50
            self._cost[k] = c
        return self._cost[k]

    def shape(self, w: int, axes: tuple) -> tuple:
        return (w,) + (self.D,) * len(axes)

    def _expand(self, arr: np.ndarray, src: tuple, dst: tuple) -> np.ndarray:
        # src is a sorted subsequence of dst, so a reshape inserts the broadcast axes
        if src == dst:
            return arr
        return arr.reshape((arr.shape[0],) + tuple(self.D if v in src else 1 for v in dst))

    def _reduce(self, need: np.ndarray, src: tuple, dst: tuple) -> np.ndarray:
        drop = tuple(k + 1 for k, v in enumerate(src) if v not in dst)
        return need.any(axis=drop) if drop else need

    def _axis_vector(self, vec: np.ndarray, axes: tuple, var: str) -> np.ndarray:
        """Place a length-D vector (or (W, D) matrix) along ``var``'s axis."""
        shape = [1] * (len(axes) + 1)
        shape[axes.index(var) + 1] = self.D
        if vec.ndim == 2:
            shape[0] = vec.shape[0]
        return vec.reshape(shape)

    # evaluation

    def ev(self, node: Formula, ctx: dict, lo: int, need: np.ndarray) -> np.ndarray:
        out = self._ev(node, ctx, lo, need)
        if self._trace is not None:
            self._dump(node, ctx, lo, need, out)
        return out

    def _ev(self, node: Formula, ctx: dict, lo: int, need: np.ndarray) -> np.ndarray:
        axes = self.axes(node)
        shape = need.shape
        self.cells += need.size
        if self.cells > self.config.max_cells * 50:
            raise UnsupportedFormula("table budget exhausted")
        if isinstance(node, TrueF):
            return np.ones(shape, dtype=bool)
        if isinstance(node, Not):
            return ~self.ev(node.arg, ctx, lo, need)
        if isinstance(node, (And, Or, Implies)):
            return self._junction(node, ctx, lo, need)
        if isinstance(node, (Next, WeakNext)):
            cneed = np.zeros_like(need)
            cneed[1:] = need[:-1]
            val = self._child(node.arg, axes, ctx, lo, cneed)
            out = np.empty(shape, dtype=bool)
            out[:-1] = val[1:]
            out[-1] = isinstance(node, WeakNext)
            return out
        if isinstance(node, (Prev, WeakPrev)):
            if lo != 0:
                raise AssertionError("past operator evaluated in a truncated window")
            cneed = np.zeros_like(need)
            cneed[:-1] = need[1:]
            val = self._child(node.arg, axes, ctx, lo, cneed)
            out = np.empty(shape, dtype=bool)
            out[1:] = val[:-1]
            out[0] = isinstance(node, WeakPrev)
            return out
        if isinstance(node, (Until, Release)):
            cneed = np.logical_or.accumulate(need, axis=0)
            right = np.broadcast_to(self._child(node.right, axes, ctx, lo, cneed), shape)
            left = np.broadcast_to(self._child(node.left, axes, ctx, lo, cneed), shape)
            out = np.empty(shape, dtype=bool)
            out[-1] = right[-1]
            if isinstance(node, Until):
                for u in range(shape[0] - 2, -1, -1):
                    out[u] = right[u] | (left[u] & out[u + 1])
            else:
                for u in range(shape[0] - 2, -1, -1):
                    out[u] = right[u] & (left[u] | out[u + 1])
            return out
        if isinstance(node, (Always, Eventually)):
            cneed = np.logical_or.accumulate(need, axis=0)
            val = np.broadcast_to(self._child(node.arg, axes, ctx, lo, cneed), shape)
            acc = np.logical_and if isinstance(node, Always) else np.logical_or
            return acc.accumulate(val[::-1], axis=0)[::-1].copy()
        if isinstance(node, Since):
            if lo != 0:
                raise AssertionError("past operator evaluated in a truncated window")
            cneed = np.logical_or.accumulate(need[::-1], axis=0)[::-1]
            right = np.broadcast_to(self._child(node.right, axes, ctx, lo, cneed), shape)
            left = np.broadcast_to(self._child(node.left, axes, ctx, lo, cneed), shape)
            out = np.empty(shape, dtype=bool)
            out[0] = right[0]
            for u in range(1, shape[0]):
                out[u] = right[u] | (left[u] & out[u - 1])
            return out
        if isinstance(node, (Exists, Forall)) and node.freeze is None:
            return self._quantify(node, ctx, lo, need)
        if isinstance(node, (Exists, Forall, Freeze)):
            return self._freeze(node, ctx, lo, need)
        if isinstance(node, TimeConstraint):
            d = np.round(self.tau[lo:] - self.tau[ctx[node.tvar]], functions.TIME_DIGITS)
            return self._full(_CMP[node.op](d, node.value), shape)
        if isinstance(node, FrameConstraint):
            d = np.arange(lo, self.n) - ctx[node.tvar]
            if node.modulo is not None:
                d = np.mod(d, node.modulo)
            return self._full(_CMP[node.op](d, node.value), shape)
        if isinstance(node, IdCompare):
            a = self._id_values(node.left, axes)
            b = self._id_values(node.right, axes)
            eq = (a == b) if node.equal else (a != b)
            return self._full(eq, shape)
        if isinstance(node, FuncAtom) and self._vectorisable(node):
            return self._full(self._vector_atom(node, ctx, lo, axes), shape)
        if isinstance(node, (FuncAtom, SpatialExists, SpatialForall)):
            return self._cellwise(node, ctx, lo, need)
        raise UnsupportedFormula(f"no DP rule for {type(node).__name__}")

    def _full(self, arr, shape) -> np.ndarray:
        arr = np.asarray(arr, dtype=bool)
        if arr.ndim < len(shape):
            arr = arr.reshape(arr.shape + (1,) * (len(shape) - arr.ndim))
        return np.broadcast_to(arr, shape).copy()

    def _child(self, child, axes, ctx, lo, need_parent) -> np.ndarray:
        cax = self.axes(child)
        val = self.ev(child, ctx, lo, self._reduce(need_parent, axes, cax))
        return self._expand(val, cax, axes)

    def _junction(self, node, ctx, lo, need) -> np.ndarray:
        conj = isinstance(node, And)
        parts: list[tuple[Formula, bool]] = []

        def flatten(n, neg):
            if isinstance(n, And) and conj and not neg:
                flatten(n.left, False)
                flatten(n.right, False)
            elif isinstance(n, Or) and not conj and not neg:
                flatten(n.left, False)
                flatten(n.right, False)
            elif isinstance(n, Implies) and not conj and not neg:
                flatten(n.left, True)
                flatten(n.right, False)
            else:
                parts.append((n, neg))

        if isinstance(node, Implies):
            flatten(node.left, True)
            flatten(node.right, False)
        else:
            flatten(node.left, False)
            flatten(node.right, False)
        axes = self.axes(node)
        acc = np.full(need.shape, conj, dtype=bool)
        live = need.copy()
        for part, neg in sorted(parts, key=lambda p: self.cost(p[0])):
            if not live.any():
                break
            val = self._child(part, axes, ctx, lo, live)
            if neg:
                val = ~val
            if conj:
                acc &= val
                live &= val
            else:
                acc |= val
                live &= ~val
        return acc

    def _quantify(self, node, ctx, lo, need) -> np.ndarray:
        axes = self.axes(node)
        bax = self.axes(node.body)
        exists = isinstance(node, Exists)
        if node.var not in bax:
            val = self._child(node.body, axes, ctx, lo, need)
            ne = self.nonempty[lo:].reshape((-1,) + (1,) * len(axes))
            return np.broadcast_to(val & ne if exists else val | ~ne, need.shape).copy()
        pres = self._axis_vector(self.present[lo:], bax, node.var)
        cneed = self._expand(need, axes, bax) & pres
        val = self.ev(node.body, ctx, lo, cneed)
        pos = bax.index(node.var) + 1
        if exists:
            return (val & pres).any(axis=pos)
        return (val | ~pres).all(axis=pos)

    def _freeze(self, node, ctx, lo, need) -> np.ndarray:
        axes = self.axes(node)
        out = np.zeros(need.shape, dtype=bool)
        shared = not axes and not self.outer_times(node)
        table = self.freeze_tables.setdefault(id(node), {}) if shared else None
        for row in np.flatnonzero(need.reshape(need.shape[0], -1).any(axis=1)):
            t = lo + int(row)
            if shared:
                if t not in table:
                    table[t] = bool(self._freeze_at(node, ctx, t, np.ones((), dtype=bool)))
                out[row] = table[t]
            else:
                out[row] = self._freeze_at(node, ctx, t, need[row])
        return out

    def _freeze_at(self, node, ctx, t: int, need_outer: np.ndarray) -> np.ndarray:
        """Binder value at freeze frame ``t`` for each outer id combination."""
        tvar = node.tvar if isinstance(node, Freeze) else node.freeze
        ctx2 = {**ctx, tvar: t}
        body = node.body
        lo2 = 0 if self.past(body) else t
        axes = self.axes(node)
        bax = self.axes(body)
        row = t - lo2
        cneed = np.zeros(self.shape(self.n - lo2, bax), dtype=bool)
        quant = not isinstance(node, Freeze)
        if quant and node.var in bax:
            pres = self._axis_vector(self.present[t], bax, node.var)[0]
            cneed[row] = self._expand(need_outer[None], axes, bax)[0] & pres
            val = self.ev(body, ctx2, lo2, cneed)[row]
            pos = bax.index(node.var)
            if isinstance(node, Exists):
                return (val & pres).any(axis=pos)
            return (val | ~pres).all(axis=pos)
        cneed[row] = self._expand(need_outer[None], axes, bax)[0]
        val = self._expand(self.ev(body, ctx2, lo2, cneed), bax, axes)[row]
        if not quant:
            return val
        if isinstance(node, Exists):
            return val & self.nonempty[t]
        return val | ~self.nonempty[t]

    # atoms

    def _id_values(self, ref, axes) -> np.ndarray:
        if isinstance(ref, int):
            return np.full((1,) * (len(axes) + 1), ref, dtype=np.int64)
        return self._axis_vector(self.dom, axes, ref)

    def _vectorisable(self, atom: FuncAtom) -> bool:
        def ok(e):
            if isinstance(e, Const):
                return not isinstance(e.value, str) or atom.lhs.name == "CLASS"
            if isinstance(e, Scaled):
                return ok(e.fn)
            return e.name in _VECTOR_FUNCS and not any(isinstance(a, Term) for a in e.args)

        return ok(atom.lhs) and (atom.rhs is None or ok(atom.rhs))

    def attribute(self, name: str, anchor=None) -> np.ndarray:
        """(frames, ids) array of an object attribute, NaN where the object is absent."""
        key = (name, anchor)
        arr = self._attr.get(key)
        if arr is None:
            arr = np.full((self.n, self.D), np.nan)
            for i, fr in enumerate(self.stream.frames):
                for oid, o in fr.objects.items():
                    arr[i, self.index[oid]] = _attr_value(self.stream, o, name, anchor)
            self._attr[key] = arr
        return arr

    def _resolved(self, name, ref, anchor, ctx, lo, axes) -> np.ndarray:
        """Attribute of ``ref`` at its resolution frame, shaped for ``axes``."""
        arr = self.attribute(name, anchor)
        if isinstance(ref, int):
            col = self.index.get(ref)
            vals = arr[lo:, col] if col is not None else np.full(self.n - lo, np.nan)
            return vals.reshape((-1,) + (1,) * len(axes))
        tvar = self.frozen_by.get(ref)
        rows = arr[ctx[tvar]][None, :] if tvar is not None else arr[lo:]
        return self._axis_vector(rows, axes, ref)

    def _fn_vector(self, e, ctx, lo, axes):
        if isinstance(e, Const):
            v = e.value
            if isinstance(v, str):
                v = self.stream.class_code(v)
            return np.asarray(float(v))
        if isinstance(e, Scaled):
            return e.factor * self._fn_vector(e.fn, ctx, lo, axes)
        if e.name == "DIST":
            pts = []
            for ref, anc in ((e.args[0], e.args[1]), (e.args[2], e.args[3])):
                if ref == UNIVERSE_REF:
                    x, y = anchor_of(self.universe.as_tuple(), anc)
                    pts.append((np.asarray(float(x)), np.asarray(float(y))))
                else:
                    pts.append((self._resolved("LAT", ref, anc, ctx, lo, axes),
                                self._resolved("LON", ref, anc, ctx, lo, axes)))
            (x1, y1), (x2, y2) = pts
            return _hypot(x1 - x2, y1 - y2)
        anc = e.args[1] if e.name in ("LAT", "LON") else None
        return self._resolved(e.name, e.args[0], anc, ctx, lo, axes)

    def _vector_atom(self, atom: FuncAtom, ctx, lo, axes) -> np.ndarray:
        lhs = self._fn_vector(atom.lhs, ctx, lo, axes)
        if atom.op is None:
            return lhs == 1.0
        rhs = self._fn_vector(atom.rhs, ctx, lo, axes)
        valid = ~np.isnan(lhs) & ~np.isnan(rhs)
        with np.errstate(invalid="ignore"):
            return valid & _CMP[atom.op](lhs, rhs)

    def _cellwise(self, node, ctx, lo, need) -> np.ndarray:
        axes = self.axes(node)
        out = np.zeros(need.shape, dtype=bool)
        cells = [tuple(c) for c in np.argwhere(need)]

        def one(cell):
            u = lo + int(cell[0])
            bind = {v: int(self.dom[k]) for v, k in zip(axes, cell[1:])}
            return self._atom_cell(node, u, bind, ctx)

        if self._pool is not None and len(cells) > 64:
            results = list(self._pool.map(one, cells, chunksize=32))
        else:
            results = [one(c) for c in cells]
        for c, v in zip(cells, results):
            out[c] = v
        return out

    def _atom_cell(self, node, u: int, bind: dict, ctx: dict) -> bool:
        k = id(node)
        if k not in self._local:
            ms = list(walk(node))
            st = any(isinstance(m, Term) and is_spatially_temporal(m) for m in ms)
            lit = any(isinstance(getattr(m, "ref", None), int) for m in ms) or any(
                isinstance(a, int) for m in ms if isinstance(m, Fn) for a in m.args)
            fns = any(isinstance(m, Fn) for m in ms)
            self._local[k] = None if st else (lit, fns)
        local = self._local[k]
        if local is None:
            return self._compute_cell(node, u, bind, ctx)
        lit, fns = local
        # the value depends only on which object versions the references resolve to
        current = self.config.bb_resolution == "current"
        refs = []
        for v in self.axes(node):
            tv = self.frozen_by.get(v)
            fk = ctx[tv] if tv is not None else u
            refs.append((bind[v], fk if fns else -1, u if current else fk))
        key = (k, u if lit else -1, tuple(refs))
        hit = self._cell_memo.get(key)
        if hit is None:
            hit = self._cell_memo[key] = self._compute_cell(node, u, bind, ctx)
        return hit

    def _compute_cell(self, node, u: int, bind: dict, ctx: dict) -> bool:
        if isinstance(node, SpatialExists):
            return not self.region(node.term, u, bind, ctx).is_empty()
        if isinstance(node, SpatialForall):
            return self.region(node.term, u, bind, ctx).is_universe()
        return functions.holds(node, _CellCtx(self, u, bind, ctx))

    # spatial terms

    def _box_frame(self, ref, u: int, ctx: dict) -> int:
        if isinstance(ref, int) or self.config.bb_resolution == "current":
            return u
        tvar = self.frozen_by.get(ref)
        return ctx[tvar] if tvar is not None else u

    def obj(self, ref, u: int, bind: dict, ctx: dict):
        oid = ref if isinstance(ref, int) else bind[ref]
        tvar = None if isinstance(ref, int) else self.frozen_by.get(ref)
        k = ctx[tvar] if tvar is not None else u
        return self.stream.retrieve(k, oid)

    def region(self, t: Term, u: int, bind: dict, ctx: dict) -> Region:
        canon = self.config.canonicalize
        uni = self.universe
        if isinstance(t, BB):
            oid = t.ref if isinstance(t.ref, int) else bind[t.ref]
            o = self.stream.retrieve(self._box_frame(t.ref, u, ctx), oid)
            return Region.empty(uni) if o is None else Region.from_box(Box(*o.bbox), uni)
        if isinstance(t, EmptySet):
            return Region.empty(uni)
        if isinstance(t, UniverseSet):
            return Region.full(uni)
        if isinstance(t, Cmpl):
            return self.region(t.arg, u, bind, ctx).complement(canon)
        if isinstance(t, Cap):
            return self.region(t.left, u, bind, ctx).intersect(self.region(t.right, u, bind, ctx), canon)
        if isinstance(t, Cup):
            return self.region(t.left, u, bind, ctx).union(self.region(t.right, u, bind, ctx), canon)
        if isinstance(t, Int):
            return self.region(t.arg, u, bind, ctx).interior()
        if isinstance(t, Cl):
            return self.region(t.arg, u, bind, ctx).closure()
        return self._column_value(t, u, bind, ctx)

    def _column_value(self, t: Term, u: int, bind: dict, ctx: dict) -> Region:
        ids = self.axes(t)
        frozen = ()
        if self.config.bb_resolution == "frozen":
            frozen = tuple(ctx[self.frozen_by[v]] if self.frozen_by.get(v) else -1 for v in ids)
        key = (id(t), tuple(bind[v] for v in ids), frozen)
        col = self._columns.get(key)
        if col is None:
            col = self._columns[key] = {}
        if u in col:
            return col[u]
        start = min(col) - 1 if col else self.n - 1
        for w in range(start, u - 1, -1):
            col[w] = self._column_step(t, w, bind, ctx, col)
        return col[u]

    def _offset_ok(self, j: int, w: int, iv: Interval | None) -> bool:
        iv = iv or _UNBOUNDED
        d = j - w if iv.unit == "frame" else functions.elapsed(self.stream, j, w)
        return iv.contains(d)

    def _window(self, w: int, iv: Interval) -> tuple[int, int] | None:
        js = [j for j in range(w, self.n) if self._offset_ok(j, w, iv)]
        if not js:
            return None
        return js[0], js[-1]

    def _column_step(self, t: Term, w: int, bind: dict, ctx: dict, col: dict) -> Region:
        canon = self.config.canonicalize
        uni = self.universe
        last = w == self.n - 1
        if isinstance(t, NextS):
            if w + 1 < self.n and self._offset_ok(w + 1, w, t.interval):
                return self.region(t.arg, w + 1, bind, ctx)
            return Region.empty(uni)
        if isinstance(t, (UntilS, ReleaseS)):
            neg = isinstance(t, ReleaseS)

            def left(k):
                r = self.region(t.left, k, bind, ctx)
                return r.complement(canon) if neg else r

            def right(k):
                r = self.region(t.right, k, bind, ctx)
                return r.complement(canon) if neg else r
        elif isinstance(t, EventuallyS):
            neg = False

            def left(k):
                return Region.full(uni)

            def right(k):
                return self.region(t.arg, k, bind, ctx)
        elif isinstance(t, AlwaysS):
            neg = True

            def left(k):
                return Region.full(uni)

            def right(k):
                return self.region(t.arg, k, bind, ctx).complement(canon)
        else:
            raise UnsupportedFormula(f"no DP rule for {type(t).__name__}")
        iv = t.interval
        if iv is None or (iv.lo == 0 and iv.lo_closed and iv.unbounded):
            # interval-free recurrence; col holds the (possibly complemented) operator value
            if last:
                nxt = Region.empty(uni)
            else:
                nxt = col[w + 1].complement(canon) if neg else col[w + 1]
            val = right(w).union(left(w).intersect(nxt, canon), canon)
        else:
            val = Region.empty(uni)
            win = self._window(w, iv)
            if win is not None:
                b_lo, b_hi = win
                r_min = Region.full(uni)
                for k in range(w, b_lo):
                    r_min = r_min.intersect(left(k), canon)
                for j in range(b_lo, b_hi + 1):
                    val = val.union(right(j).intersect(r_min, canon), canon)
                    r_min = r_min.intersect(left(j), canon)
        return val.complement(canon) if neg else val

    # trace

    def _dump(self, node, ctx, lo, need, out) -> None:
        sid = self._ids.get(id(node))
        if sid is None:
            return
        axes = self.axes(node)
        t = {base_name(k): v for k, v in ctx.items()}
        for cell in np.argwhere(need):
            combo = {base_name(v): int(self.dom[k]) for v, k in zip(axes, cell[1:])}
            rec = {"subformula_id": sid, "u": lo + int(cell[0]), "t": t, "combo": combo,
                   "value": bool(out[tuple(cell)])}
            self._trace.write(json.dumps(rec) + "\n")

    # entry points

    def table(self, node: Formula | None = None) -> np.ndarray:
        """Truth value of a closed (sub)formula at every frame."""
        node = self.f if node is None else node
        if self.axes(node) or self.outer_times(node):
            raise ValueError("table() needs a closed formula")
        return self.ev(node, {}, 0, np.ones(self.n, dtype=bool))

    def value(self) -> bool:
        need = np.zeros(self.n, dtype=bool)
        need[0] = True
        return bool(self.ev(self.f, {}, 0, need)[0])

    def witness(self) -> tuple[Binding, ...] | None:
        f = self.f
        t = 0
        if isinstance(f, Eventually):
            hits = np.flatnonzero(self.table(f.arg))
            if not len(hits):
                return None
            t, f = int(hits[0]), f.arg
        ctx: dict = {}
        bound: dict = {}
        out: list[Binding] = []
        while isinstance(f, Exists):
            if f.freeze:
                ctx = {**ctx, f.freeze: t}
            bax = self.axes(f.body)
            need = np.zeros(self.shape(self.n, bax), dtype=bool)
            need[t] = True
            val = self.ev(f.body, ctx, 0, need)[t]
            idx = tuple(self.index[bound[v]] if v in bound else slice(None) for v in bax)
            sub = val[idx]
            if f.var in bax:
                cand = [k for k in self.stream.ids(t) if sub[self.index[k]]]
            else:
                cand = list(self.stream.ids(t)) if bool(sub) else []
            if not cand:
                return tuple(out) or None
            bound[f.var] = cand[0]
            out.append(Binding(base_name(f.var), cand[0], t))
            f = f.body
        return tuple(out) or None


class _CellCtx:
    __slots__ = ("m", "u", "bind", "ctx", "stream")

    def __init__(self, m: DPMonitor, u: int, bind: dict, ctx: dict):
        self.m, self.u, self.bind, self.ctx, self.stream = m, u, bind, ctx, m.stream

    def obj(self, ref):
        return self.m.obj(ref, self.u, self.bind, self.ctx)

    def region(self, term):
        return self.m.region(term, self.u, self.bind, self.ctx)


def _attr_value(stream: DataStream, o, name: str, anchor) -> float:
    if name == "CLASS":
        return float(stream.class_code(o.class_label))
    if name == "PROB":
        return o.prob
    if name in ("LAT", "LON"):
        x, y = anchor_of(o.bbox, anchor)
        return x if name == "LAT" else y
    if name == "AREA":
        return Box(*o.bbox).area()
    if name == "EMPTY":
        return 1.0 if o.bounding_volume_empty else 0.0
    if name == "OCC":
        return np.nan if o.occ is None else float(o.occ)
    raise ValueError(name)


_hypot_cell = np.vectorize(math.hypot, otypes=[float])


def _hypot(dx, dy):
    # math.hypot per cell keeps results bit-identical to the scalar route
    with np.errstate(invalid="ignore"):
        return _hypot_cell(dx, dy)


def satisfies(f: Formula, stream: DataStream, config: MonitorConfig | None = None, witness: bool = False) -> Verdict:
    """Decide ``stream`` satisfies ``f`` (evaluated at frame 0) with the DP monitor."""
    STATS.reset()
    if len(stream) == 0:
        return Verdict(False, None, {"region_ops": 0, "peak_boxes": 0, "cells": 0})
    m = DPMonitor(f, stream, config)
    try:
        value = m.value()
        w = m.witness() if (witness and value) else None
    finally:
        m.close()
    return Verdict(value, w, {"region_ops": STATS.ops, "peak_boxes": STATS.peak_boxes, "cells": m.cells})


@dataclass(frozen=True)
class BenchRow:
    frames: int
    objects_max: int
    seconds: float
    verdict: bool
    n_temporal: int
    n_spatial: int
    n_time_vars: int
    max_id_scope: int


def bench(f: Formula, stream: DataStream, prefixes=(25, 50, 100, 200), config: MonitorConfig | None = None,
          repeat: int = 1) -> dict:
    """Time the DP monitor on stream prefixes; the report carries the formula statistics."""
    st = stats(f)
    rows = []
    for p in prefixes:
        sub = stream.prefix(p)
        best = math.inf
        verdict = None
        for _ in range(repeat):
            t0 = time.perf_counter()
            verdict = satisfies(f, sub, config)
            best = min(best, time.perf_counter() - t0)
        rows.append(BenchRow(len(sub), sub.stats()["objects_max"], best, verdict.value, **st.as_dict()).__dict__)
    return {"schema_version": 1, "stats": st.as_dict(), "rows": rows}
