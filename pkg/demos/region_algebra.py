"""Exact box-set regions: boolean operations, topology and why canonical form matters."""

# %%
from stpl import dp_monitor
from stpl.common import MonitorConfig
from stpl.datastream import DataObject, build_stream
from stpl.dp_monitor import DPMonitor
from stpl.formula import parse
from stpl.spatial import STATS, Box, Region

u = Box(0, 0, 10, 10)
a = Region.from_box(Box(2, 2, 5, 5), u)
b = Region.from_box(Box(4, 1, 8, 3), u)

print("a | b   ", a.union(b).boxes)
print("a & b   ", a.intersect(b).boxes)
print("~a      ", a.complement().boxes)
print("area    ", a.area(), b.area(), a.union(b).area(), a.intersect(b).area())

# %%
# Boxes carry per-edge open/closed flags, so interior and closure are exact.
i = a.interior()
print(i.boxes, i.contains_point(2, 3), i.contains_point(2.5, 3))
print(i.closure() == a, Region.from_box(Box(3, 1, 3, 6), u).interior().is_empty())

# %%
# Without canonicalization, nested spatial until over stacked identical boxes grows
# as 1, 4, 15, 64, 325 boxes; canonical form keeps the same point set in one box.

stream = build_stream([(i, float(i), [DataObject(k, "car", 1.0, (0, 0, 10, 10)) for k in range(1, 5)])
                       for i in range(5)])
f = parse("SE((BB(1) UNTILS BB(2)) UNTILS (BB(3) UNTILS BB(4)))")
for canonical in (False, True):
    m = DPMonitor(f, stream, MonitorConfig(canonicalize=canonical))
    print("canonical" if canonical else "raw      ", [len(m.region(m.f.term, k, {}, {})) for k in reversed(range(5))])
STATS.reset()
print(dp_monitor.satisfies(f, stream).value, "peak boxes", STATS.peak_boxes)
