"""Scalar semantics of function atoms.

Every function is fail-closed: a reference to an object that is not present
in the frame it resolves to, a missing attribute, a NaN or a zero divisor
makes the value undefined, and an atom with an undefined side is false
whatever its comparison operator.
"""

from __future__ import annotations

import math
import operator
from typing import Protocol

from .datastream import DataObject, DataStream
from .formula.syntax import UNIVERSE_REF, Const, FuncAtom, Scaled, Term
from .spatial import Anchor, Box, Region, anchor_of

_CMP = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}
TIME_DIGITS = 9


def elapsed(stream: DataStream, i: int, j: int) -> float:
    """``tau(i) - tau(j)`` rounded so that decimal frame times subtract exactly."""
    return round(stream.time(i) - stream.time(j), TIME_DIGITS)


def compare(a, op: str, b) -> bool:
    if a is None or b is None:
        return False
    if isinstance(a, float) and math.isnan(a) or isinstance(b, float) and math.isnan(b):
        return False
    if isinstance(a, str) != isinstance(b, str) and op not in ("==", "!="):
        return False
    if isinstance(a, str) and isinstance(b, str) and op not in ("==", "!="):
        return False
    return bool(_CMP[op](a, b))


class AtomContext(Protocol):
    """What an evaluator supplies for one atom evaluation."""

    stream: DataStream

    def obj(self, ref) -> DataObject | None: ...

    def region(self, term: Term) -> Region: ...


def _target_point(ctx: AtomContext, ref, anchor: Anchor):
    if ref == UNIVERSE_REF:
        return anchor_of(ctx.stream.meta.universe.as_tuple(), anchor)
    o = ctx.obj(ref)
    if o is None:
        return None
    return anchor_of(o.bbox, anchor)


def value(expr, ctx: AtomContext):
    """Value of a function expression, or None when undefined."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Scaled):
        v = value(expr.fn, ctx)
        return None if v is None else expr.factor * v
    name, args = expr.name, expr.args
    if name == "AREA" and isinstance(args[0], Term):
        return ctx.region(args[0]).area()
    if name == "RATIO":
        a, b = value(args[0], ctx), value(args[1], ctx)
        if a is None or b is None or b == 0:
            return None
        return a / b
    if name in ("DIST", "VISIBLE"):
        return _geometry(name, args, ctx)
    o = ctx.obj(args[0])
    if o is None:
        return None
    if name == "CLASS":
        return ctx.stream.class_code(o.class_label)
    if name == "PROB":
        return o.prob
    if name in ("LAT", "LON"):
        x, y = anchor_of(o.bbox, args[1])
        return x if name == "LAT" else y
    if name == "AREA":
        return Box(*o.bbox).area()
    if name == "EMPTY":
        return o.bounding_volume_empty
    if name == "MD":
        return _heading(o.md)
    if name == "OCC":
        return o.occ
    raise ValueError(f"unknown function {name}")


def _heading(md):
    # numeric heading codes compare as numbers, anything else as a label
    if md is None:
        return None
    try:
        return float(md)
    except ValueError:
        return md


def _geometry(name: str, args: tuple, ctx: AtomContext):
    if name == "DIST":
        p = _target_point(ctx, args[0], args[1])
        q = _target_point(ctx, args[2], args[3])
        if p is None or q is None:
            return None
        return math.hypot(p[0] - q[0], p[1] - q[1])
    p = _target_point(ctx, args[0], args[1])
    a, b = ctx.obj(args[2]), ctx.obj(args[3])
    if p is None or a is None or b is None:
        return None
    return both_visible(p, a.bbox, b.bbox)


def holds(atom: FuncAtom, ctx: AtomContext) -> bool:
    lhs = value(atom.lhs, ctx)
    if atom.op is None:
        return lhs is True
    rhs = atom.rhs
    if isinstance(rhs, Const) and isinstance(rhs.value, str) and atom.lhs.name == "CLASS":
        rhs_v = ctx.stream.class_code(rhs.value)
    else:
        rhs_v = value(rhs, ctx)
    if isinstance(lhs, bool) or isinstance(rhs_v, bool):
        return False
    return compare(lhs, atom.op, rhs_v)


# visibility


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def angular_interval(view: tuple[float, float], bbox) -> tuple[float, float] | None:
    """Bearing interval ``(lo, hi)`` a box subtends from ``view``; None if ``view`` lies in the box."""
    x0, y0, x1, y1 = bbox
    vx, vy = view
    if x0 <= vx <= x1 and y0 <= vy <= y1:
        return None
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    mid = math.atan2(cy - vy, cx - vx)
    offs = [_wrap(math.atan2(y - vy, x - vx) - mid) for x in (x0, x1) for y in (y0, y1)]
    return mid + min(offs), mid + max(offs)


def _inside(inner: tuple[float, float], outer: tuple[float, float]) -> bool:
    shift = _wrap((inner[0] + inner[1]) / 2 - (outer[0] + outer[1]) / 2)
    centre = (outer[0] + outer[1]) / 2 + shift
    half = (inner[1] - inner[0]) / 2
    return outer[0] <= centre - half and centre + half <= outer[1]


def both_visible(view: tuple[float, float], a, b) -> bool | None:
    """Neither box is hidden behind the other.

    A box is hidden when its bearing interval lies inside the interval of a
    box whose centre is strictly nearer to the viewpoint.
    """
    ia, ib = angular_interval(view, a), angular_interval(view, b)
    if ia is None or ib is None:
        return None
    da = math.dist(view, ((a[0] + a[2]) / 2, (a[1] + a[3]) / 2))
    db = math.dist(view, ((b[0] + b[2]) / 2, (b[1] + b[3]) / 2))
    a_hidden = db < da and _inside(ia, ib)
    b_hidden = da < db and _inside(ib, ia)
    return not (a_hidden or b_hidden)
