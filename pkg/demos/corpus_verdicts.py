"""Verdicts of the shipped requirement corpus on the sample stream, both engines side by side."""

# %%
import time

from stpl import corpus, dp_monitor, ref_eval
from stpl.common import MonitorConfig
from stpl.datastream import parse_universe, read_csv
from stpl.formula import parse_file, pretty_print

manifest = corpus.manifest()
stream = read_csv(corpus.path(manifest["stream"]))
print(stream.stats())

# %%
# The manifest pins current-frame box lookup; the last column shows what frozen lookup would give.
config = MonitorConfig(bb_resolution=manifest["bb_resolution"])
frozen = MonitorConfig(bb_resolution="frozen")

print(f"{'requirement':24} {'expected':>8} {'dp':>6} {'ref':>6} {'frozen':>7} {'ms':>7}")
for entry in manifest["formulas"]:
    s = stream
    if "universe" in entry:
        s = s.with_meta(universe=parse_universe(entry["universe"]))
    f = parse_file(corpus.path(entry["file"]))
    t0 = time.perf_counter()
    dp = dp_monitor.satisfies(f, s, config).value
    ms = (time.perf_counter() - t0) * 1000
    ref = ref_eval.satisfies(f, s, config).value
    fz = dp_monitor.satisfies(f, s, frozen).value
    print(f"{entry['name']:24} {entry['expected']!s:>8} {dp!s:>6} {ref!s:>6} {fz!s:>7} {ms:7.1f}")

# %%
# A satisfied existential formula also yields the objects that witness it.
f = parse_file(corpus.path("same_class_pair.stpl"))
print(pretty_print(f))
print(dp_monitor.satisfies(f, stream, config, witness=True).witness)
