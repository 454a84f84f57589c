"""Brute-force membership oracle on a half-unit lattice.

With integer box coordinates every point set the region algebra can build is
constant on each open unit gap, so sampling integers and half-integers decides
membership exactly.  Topological operators are taken on the lattice directly:
a lattice point at an integer coordinate touches its two neighbouring gaps.
"""

import numpy as np

SIZE = 8


def _inside(v, lo, hi, clo, chi):
    return ((lo < v) | (clo & (v == lo))) & ((v < hi) | (chi & (v == hi)))


def raster_boxes(boxes, size=SIZE) -> np.ndarray:
    """Membership grid; cell ``[i, j]`` is the point ``(i / 2, j / 2)``."""
    pts = np.arange(2 * size + 1) / 2
    g = np.zeros((len(pts), len(pts)), dtype=bool)
    for b in boxes:
        xs = _inside(pts, b.x_lo, b.x_hi, b.closed_left, b.closed_right)
        ys = _inside(pts, b.y_lo, b.y_hi, b.closed_top, b.closed_bottom)
        g |= np.outer(xs, ys)
    return g


def raster(region, size=SIZE) -> np.ndarray:
    return raster_boxes(region.boxes, size)


def _dilate_axis(g, axis):
    g = np.moveaxis(g, axis, 0)
    out = g.copy()
    for k in range(0, g.shape[0], 2):
        if k > 0:
            out[k] |= g[k - 1]
        if k + 1 < g.shape[0]:
            out[k] |= g[k + 1]
    return np.moveaxis(out, 0, axis)


def closure(g):
    return _dilate_axis(_dilate_axis(g, 0), 1)


def interior(g):
    return ~closure(~g)


def area(g) -> float:
    # each open unit cell is represented by its (odd, odd) centre sample
    return float(g[1::2, 1::2].sum())
