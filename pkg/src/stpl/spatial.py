"""Exact region algebra over finite unions of axis-aligned boxes.

Every box edge carries an open/closed flag, so complement, interior and
closure are exact point-set operations inside a closed universe box.

Binary operations run on a shared piece grid.  Each distinct coordinate on
an axis contributes a point piece ``{c}`` and the open gap to its right, so
a box with any combination of edge flags covers a contiguous rectangle of
pieces.  Canonical form is the vertical slab decomposition of that grid with
adjacent identical slabs coalesced; it is unique for a given point set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class Anchor(Enum):
    """Reference point of a region.  Multi-box regions use their hull."""

    LM = "LM"  # (x_lo, y_lo)
    RM = "RM"  # (x_hi, y_hi)
    TM = "TM"  # (x_hi, y_lo)
    BM = "BM"  # (x_lo, y_hi)
    CT = "CT"  # hull centre


@dataclass(frozen=True, slots=True)
class Box:
    """Axis-aligned box; ``top`` is the ``y_lo`` edge, ``bottom`` the ``y_hi`` edge."""

    x_lo: float
    y_lo: float
    x_hi: float
    y_hi: float
    closed_left: bool = True
    closed_right: bool = True
    closed_top: bool = True
    closed_bottom: bool = True

    def is_empty(self) -> bool:
        return _empty_interval(self.x_lo, self.x_hi, self.closed_left, self.closed_right) or _empty_interval(
            self.y_lo, self.y_hi, self.closed_top, self.closed_bottom
        )

    def area(self) -> float:
        if self.is_empty():
            return 0.0
        return float((self.x_hi - self.x_lo) * (self.y_hi - self.y_lo))

    def contains_point(self, x: float, y: float) -> bool:
        return _in_interval(x, self.x_lo, self.x_hi, self.closed_left, self.closed_right) and _in_interval(
            y, self.y_lo, self.y_hi, self.closed_top, self.closed_bottom
        )

    def intersect(self, other: Box) -> Box:
        x_lo, cl = _max_lo(self.x_lo, self.closed_left, other.x_lo, other.closed_left)
        x_hi, cr = _min_hi(self.x_hi, self.closed_right, other.x_hi, other.closed_right)
        y_lo, ct = _max_lo(self.y_lo, self.closed_top, other.y_lo, other.closed_top)
        y_hi, cb = _min_hi(self.y_hi, self.closed_bottom, other.y_hi, other.closed_bottom)
        return Box(x_lo, y_lo, x_hi, y_hi, cl, cr, ct, cb)

    def complement_in(self, universe: Box) -> list[Box]:
        """Disjoint boxes covering ``universe`` minus this box (box assumed inside it)."""
        u = universe
        parts = [
            Box(u.x_lo, u.y_lo, self.x_lo, u.y_hi,
                u.closed_left, not self.closed_left, u.closed_top, u.closed_bottom),
            Box(self.x_hi, u.y_lo, u.x_hi, u.y_hi,
                not self.closed_right, u.closed_right, u.closed_top, u.closed_bottom),
            Box(self.x_lo, u.y_lo, self.x_hi, self.y_lo,
                self.closed_left, self.closed_right, u.closed_top, not self.closed_top),
            Box(self.x_lo, self.y_hi, self.x_hi, u.y_hi,
                self.closed_left, self.closed_right, not self.closed_bottom, u.closed_bottom),
        ]
        return [p for p in parts if not p.is_empty()]

    def as_tuple(self) -> tuple:
        return (self.x_lo, self.y_lo, self.x_hi, self.y_hi)


def _empty_interval(lo: float, hi: float, clo: bool, chi: bool) -> bool:
    return lo > hi or (lo == hi and not (clo and chi))


def _in_interval(v: float, lo: float, hi: float, clo: bool, chi: bool) -> bool:
    return (lo < v or (clo and v == lo)) and (v < hi or (chi and v == hi))


def _max_lo(a: float, fa: bool, b: float, fb: bool) -> tuple[float, bool]:
    if a > b:
        return a, fa
    if b > a:
        return b, fb
    return a, fa and fb


def _min_hi(a: float, fa: bool, b: float, fb: bool) -> tuple[float, bool]:
    if a < b:
        return a, fa
    if b < a:
        return b, fb
    return a, fa and fb


@dataclass
class RegionStats:
    """Operation counters used by the monitor reports and the blowup checks."""

    ops: int = 0
    peak_boxes: int = 0
    by_op: dict = field(default_factory=dict)

    def reset(self) -> None:
        self.ops = 0
        self.peak_boxes = 0
        self.by_op = {}

    def count(self, name: str) -> None:
        self.ops += 1
        self.by_op[name] = self.by_op.get(name, 0) + 1


STATS = RegionStats()


class RegionError(ValueError):
    pass


class Region:
    """Finite union of boxes inside a universe box.

    ``canonical`` marks the unique slab form.  With ``canonicalize=False`` the
    binary operations keep raw box lists (concatenation for union, pairwise
    products for intersection), which is what exhibits the worst-case growth.
    Interior and closure always return canonical regions.
    """

    __slots__ = ("universe", "boxes", "canonical")

    def __init__(self, universe: Box, boxes: Iterable[Box] = (), canonical: bool = False):
        self.universe = universe
        self.boxes = tuple(b for b in boxes if not b.is_empty())
        self.canonical = canonical or len(self.boxes) <= 1
        if len(self.boxes) > STATS.peak_boxes:
            STATS.peak_boxes = len(self.boxes)

    # construction

    @classmethod
    def empty(cls, universe: Box) -> Region:
        return cls(universe, (), True)

    @classmethod
    def full(cls, universe: Box) -> Region:
        return cls(universe, (universe,), True)

    @classmethod
    def from_box(cls, box: Box, universe: Box) -> Region:
        return cls(universe, (box.intersect(universe),), True)

    @classmethod
    def from_boxes(cls, boxes: Iterable[Box], universe: Box, canonicalize: bool = True) -> Region:
        r = cls(universe, (b.intersect(universe) for b in boxes), False)
        return r.canonicalize() if canonicalize else r

    # predicates and measures

    def is_empty(self) -> bool:
        return not self.boxes

    def is_universe(self) -> bool:
        if self.canonical:
            return len(self.boxes) == 1 and self.boxes[0] == self.universe
        grid, _, _ = self._grid()
        return bool(grid.all())

    def area(self) -> float:
        STATS.count("area")
        if self.canonical:
            return float(sum(b.area() for b in self.boxes))
        grid, xs, ys = self._grid()
        return _grid_area(grid, xs, ys)

    def contains_point(self, x: float, y: float) -> bool:
        return any(b.contains_point(x, y) for b in self.boxes)

    def hull(self) -> Box | None:
        if not self.boxes:
            return None
        return Box(
            min(b.x_lo for b in self.boxes),
            min(b.y_lo for b in self.boxes),
            max(b.x_hi for b in self.boxes),
            max(b.y_hi for b in self.boxes),
        )

    def anchor(self, which: Anchor) -> tuple[float, float] | None:
        h = self.hull()
        if h is None:
            return None
        return anchor_of(h.as_tuple(), which)

    def same_points(self, other: Region) -> bool:
        """Pointwise equality, independent of representation."""
        xs, ys = _axes((self, other))
        return bool(np.array_equal(_raster(self.boxes, xs, ys), _raster(other.boxes, xs, ys)))

    # set operations

    def complement(self, canonicalize: bool = True) -> Region:
        STATS.count("complement")
        if canonicalize:
            grid, xs, ys = self._grid()
            return _from_grid(~grid, xs, ys, self.universe)
        out: list[Box] = [self.universe]
        for b in self.boxes:
            parts = b.complement_in(self.universe)
            out = [p.intersect(q) for p in out for q in parts]
            out = [p for p in out if not p.is_empty()]
        return Region(self.universe, out, False)

    def intersect(self, other: Region, canonicalize: bool = True) -> Region:
        STATS.count("intersect")
        self._check(other)
        if not self.boxes or not other.boxes:
            return Region.empty(self.universe)
        if canonicalize:
            if len(self.boxes) == 1 and len(other.boxes) == 1:
                return Region(self.universe, (self.boxes[0].intersect(other.boxes[0]),), True)
            xs, ys = _axes((self, other))
            grid = _raster(self.boxes, xs, ys) & _raster(other.boxes, xs, ys)
            return _from_grid(grid, xs, ys, self.universe)
        return Region(self.universe, (a.intersect(b) for a in self.boxes for b in other.boxes), False)

    def union(self, other: Region, canonicalize: bool = True) -> Region:
        STATS.count("union")
        self._check(other)
        if not canonicalize:
            return Region(self.universe, self.boxes + other.boxes, False)
        if not other.boxes:
            return self.canonicalize()
        if not self.boxes:
            return other.canonicalize()
        xs, ys = _axes((self, other))
        grid = _raster(self.boxes, xs, ys) | _raster(other.boxes, xs, ys)
        return _from_grid(grid, xs, ys, self.universe)

    def interior(self) -> Region:
        STATS.count("interior")
        grid, xs, ys = self._grid()
        return _from_grid(_erode(_erode(grid, 0), 1), xs, ys, self.universe)

    def closure(self) -> Region:
        STATS.count("closure")
        grid, xs, ys = self._grid()
        return _from_grid(_dilate(_dilate(grid, 0), 1), xs, ys, self.universe)

    def canonicalize(self) -> Region:
        if self.canonical:
            return self
        grid, xs, ys = self._grid()
        return _from_grid(grid, xs, ys, self.universe)

    # plumbing

    def _grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        xs, ys = _axes((self,))
        return _raster(self.boxes, xs, ys), xs, ys

    def _check(self, other: Region) -> None:
        if other.universe != self.universe:
            raise RegionError("regions live in different universes")

    def __len__(self) -> int:
        return len(self.boxes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return self.universe == other.universe and self.same_points(other)

    def __hash__(self) -> int:
        return hash((self.universe, self.canonicalize().boxes))

    def __repr__(self) -> str:
        return f"Region({len(self.boxes)} boxes, canonical={self.canonical})"


def anchor_of(bbox: Sequence[float], which: Anchor) -> tuple[float, float]:
    x_lo, y_lo, x_hi, y_hi = bbox
    if which is Anchor.LM:
        return (x_lo, y_lo)
    if which is Anchor.RM:
        return (x_hi, y_hi)
    if which is Anchor.TM:
        return (x_hi, y_lo)
    if which is Anchor.BM:
        return (x_lo, y_hi)
    return ((x_lo + x_hi) / 2, (y_lo + y_hi) / 2)


# piece grid


def _axes(regions: Iterable[Region]) -> tuple[np.ndarray, np.ndarray]:
    xs: list[float] = []
    ys: list[float] = []
    u = None
    for r in regions:
        u = r.universe
        for b in r.boxes:
            xs += (b.x_lo, b.x_hi)
            ys += (b.y_lo, b.y_hi)
    xs += (u.x_lo, u.x_hi)
    ys += (u.y_lo, u.y_hi)
    return np.unique(np.asarray(xs, dtype=float)), np.unique(np.asarray(ys, dtype=float))


def _piece_span(axis: np.ndarray, lo: float, hi: float, clo: bool, chi: bool) -> tuple[int, int]:
    i = int(np.searchsorted(axis, lo))
    j = int(np.searchsorted(axis, hi))
    return (2 * i if clo else 2 * i + 1), (2 * j if chi else 2 * j - 1)


def _raster(boxes: Sequence[Box], xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    grid = np.zeros((2 * len(xs) - 1, 2 * len(ys) - 1), dtype=bool)
    for b in boxes:
        x0, x1 = _piece_span(xs, b.x_lo, b.x_hi, b.closed_left, b.closed_right)
        y0, y1 = _piece_span(ys, b.y_lo, b.y_hi, b.closed_top, b.closed_bottom)
        if x0 <= x1 and y0 <= y1:
            grid[x0 : x1 + 1, y0 : y1 + 1] = True
    return grid


def _piece_bounds(axis: np.ndarray, s: int, e: int) -> tuple[float, float, bool, bool]:
    lo = float(axis[s // 2])
    hi = float(axis[e // 2]) if e % 2 == 0 else float(axis[e // 2 + 1])
    return lo, hi, s % 2 == 0, e % 2 == 0


def _runs(col: np.ndarray) -> tuple[tuple[int, int], ...]:
    padded = np.concatenate(([0], col.view(np.int8), [0]))
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1) - 1
    return tuple(zip(starts.tolist(), ends.tolist()))


def _from_grid(grid: np.ndarray, xs: np.ndarray, ys: np.ndarray, universe: Box) -> Region:
    boxes: list[Box] = []
    ncols = grid.shape[0]
    # slab boundaries are where a column differs from its left neighbour
    cuts = np.flatnonzero((grid[1:] != grid[:-1]).any(axis=1)) + 1
    starts = np.concatenate(([0], cuts)).tolist()
    ends = np.concatenate((cuts, [ncols])).tolist()
    for start, stop in zip(starts, ends):
        runs = _runs(grid[start])
        if not runs:
            continue
        x_lo, x_hi, cl, cr = _piece_bounds(xs, start, stop - 1)
        for s, e in runs:
            y_lo, y_hi, ct, cb = _piece_bounds(ys, s, e)
            boxes.append(Box(x_lo, y_lo, x_hi, y_hi, cl, cr, ct, cb))
    return Region(universe, boxes, True)


def _grid_area(grid: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> float:
    lx = np.zeros(grid.shape[0])
    lx[1::2] = np.diff(xs)
    ly = np.zeros(grid.shape[1])
    ly[1::2] = np.diff(ys)
    return float(lx @ grid.astype(float) @ ly)


def _erode(grid: np.ndarray, axis: int) -> np.ndarray:
    # only point pieces (even index) touch their neighbours; universe edges stay interior
    g = np.moveaxis(grid, axis, 0)
    out = g.copy()
    out[2::2] &= g[1:-1:2]
    out[0:-1:2] &= g[1::2]
    return np.moveaxis(out, 0, axis)


def _dilate(grid: np.ndarray, axis: int) -> np.ndarray:
    g = np.moveaxis(grid, axis, 0)
    out = g.copy()
    out[2::2] |= g[1:-1:2]
    out[0:-1:2] |= g[1::2]
    return np.moveaxis(out, 0, axis)
