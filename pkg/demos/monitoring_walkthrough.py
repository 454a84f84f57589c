"""Parsing, fragment checks, search and timing on a synthetic stream."""

# %%
import random

from stpl import cli, dp_monitor, fuzz, ref_eval
from stpl.common import MonitorConfig
from stpl.datastream import DataObject, build_stream
from stpl.formula import parse, pretty_print, stats, validate_aan
from stpl.spatial import Box

f = parse("""
always forall id1 @ x. (CLASS(id1) == "car" implies
  eventually (CTIME - x <= 0.3 and not SE(BB(id1) CAP CMPL BB(id1))))
""")
print(pretty_print(f))
print(stats(f).as_dict(), validate_aan(f))

# %%
# A time variable read under a nested binder leaves the efficiently monitorable fragment.
g = parse("exists id1 @ x. forall id2. exists id3 @ y. CTIME - x <= 1")
print(validate_aan(g))

# %%
rng = random.Random(3)
rows = []
for i in range(30):
    objs = [DataObject(k, "car" if k % 2 else "pedestrian", 0.9,
                       (18 * k + rng.uniform(-3, 3), 20, 18 * k + 16, 60)) for k in range(1, 6)]
    rows.append((i, i / 10, objs))
stream = build_stream(rows, Box(0, 0, 120, 80))

overlap = parse("eventually exists id1. exists id2. (id1 != id2 and SE(BB(id1) CAP BB(id2)))")
hits = cli.search(overlap, stream, MonitorConfig())
print(len(hits), "frames with overlapping boxes; first:", hits[0] if hits else None)

# %%
# The two engines are independent implementations; random pairs should never disagree.
bad = 0
for h, s, res in fuzz.pairs(seed=1, count=200):
    cfg = MonitorConfig(bb_resolution=res)
    bad += ref_eval.satisfies(h, s, cfg).value != dp_monitor.satisfies(h, s, cfg).value
print("disagreements:", bad)

# %%
print(dp_monitor.bench(overlap, stream, (5, 10, 20, 30))["rows"])
