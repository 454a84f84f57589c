import math
import random

import numpy as np
import pytest

from stpl import fuzz
from stpl.datastream import DataObject, build_stream
from stpl.dp_monitor import DPMonitor
from stpl.formula import parse
from stpl.formula.syntax import FuncAtom, Term, walk
from stpl.formula.transform import is_spatially_temporal
from stpl.functions import angular_interval, both_visible, compare, elapsed, holds, value
from stpl.ref_eval import Env, RefEvaluator
from stpl.spatial import Box


class Ctx:
    """Atom context with explicit per-variable (object, frame) bindings."""

    def __init__(self, stream, i, bind):
        self.stream, self.i = stream, i
        self.env = Env()
        for var, (oid, frame) in bind.items():
            self.env = self.env.bind_id(var, oid, frame)
        self.ev = RefEvaluator(stream)

    def obj(self, ref):
        return self.ev.resolve(ref, self.env, self.i)

    def region(self, term):
        return self.ev.sval(term, self.i, self.env)


def val(stream, text, i, **bind):
    return value(parse(text, allow_free=True).lhs, Ctx(stream, i, bind))


def truth(stream, text, i, **bind):
    return holds(parse(text, allow_free=True), Ctx(stream, i, bind))


def test_class_uses_resolved_frame(sample_stream):
    assert truth(sample_stream, 'CLASS(a) == "cyclist"', 1, a=(2, None))
    assert truth(sample_stream, 'CLASS(a) == "cyclist"', 2, a=(2, 1))
    assert truth(sample_stream, 'CLASS(a) == "pedestrian"', 2, a=(2, None))
    assert not truth(sample_stream, 'CLASS(a) == "cyclist"', 1, a=(9, None))
    assert not truth(sample_stream, 'CLASS(a) != "cyclist"', 1, a=(9, None))


def test_prob(sample_stream):
    assert val(sample_stream, "PROB(a) > 0", 1, a=(2, None)) == 0.57
    assert truth(sample_stream, "PROB(a) >= 0.5 * PROB(a)", 1, a=(2, None))
    assert not truth(sample_stream, "PROB(a) >= 0", 1, a=(9, None))


def test_distance_between_centres(sample_stream):
    assert val(sample_stream, "DIST(a, CT, b, CT) > 0", 0, a=(1, None), b=(4, None)) == pytest.approx(768.59, abs=0.01)
    assert val(sample_stream, "DIST(a, CT, a, CT) > 0", 0, a=(1, None)) == 0


def test_distance_to_universe_centre(sample_stream):
    x0, y0, x1, y1 = sample_stream.meta.universe.as_tuple()
    expected = math.hypot(139 - (x0 + x1) / 2, 219 - (y0 + y1) / 2)
    assert val(sample_stream, "DIST(a, CT, UNIVERSE, CT) > 0", 0, a=(1, None)) == pytest.approx(expected)


def test_lateral_and_longitudinal(sample_stream):
    assert val(sample_stream, "LAT(a, LM) > 0", 0, a=(1, None)) == 58
    assert val(sample_stream, "LON(a, TM) > 0", 0, a=(1, None)) == 151


def test_point_box_anchors():
    s = build_stream([(0, 0.0, [DataObject(1, "car", 1.0, (3, 4, 3, 4))])])
    for anc in ("LM", "RM", "TM", "BM", "CT"):
        assert val(s, f"LAT(a, {anc}) > 0", 0, a=(1, None)) == 3


def test_area(sample_stream):
    assert val(sample_stream, "AREA(a) > 0", 0, a=(1, None)) == 22032
    assert val(sample_stream, "AREA(EMPTYSET) > 0", 0) == 0
    assert truth(sample_stream, "AREA(a) >= 1 * AREA(a)", 0, a=(1, None))
    for i in range(len(sample_stream)):
        for k in sample_stream.ids(i):
            by_id = val(sample_stream, "AREA(a) > 0", i, a=(k, None))
            assert by_id == val(sample_stream, "AREA(BB(a)) > 0", i, a=(k, None))


def test_self_overlap_ratio(sample_stream):
    text = "RATIO(AREA(BB(a) CAP BB(b)), AREA(BB(b))) >= 0.1"
    assert val(sample_stream, "AREA(BB(a) CAP BB(b)) > 0", 1, a=(1, 0), b=(1, None)) == 20436
    assert val(sample_stream, text, 1, a=(1, 0), b=(1, None)) == 1.0
    assert val(sample_stream, "RATIO(AREA(EMPTYSET), AREA(BB(b))) > 0", 1, b=(1, None)) == 0
    assert not truth(sample_stream, "RATIO(AREA(BB(b)), AREA(EMPTYSET)) >= 0", 1, b=(1, None))


def _obj_stream(**attrs):
    return build_stream([(0, 0.0, [DataObject(1, "car", 1.0, (0, 0, 1, 1), **attrs),
                                   DataObject(2, "car", 1.0, (0, 0, 1, 1), **attrs)])])


def test_empty_bounding_volume():
    assert truth(_obj_stream(pc_count=0), "EMPTY(a)", 0, a=(1, None))
    assert not truth(_obj_stream(pc_count=57), "EMPTY(a)", 0, a=(1, None))
    assert not truth(_obj_stream(pc_count=0), "EMPTY(a)", 0, a=(3, None))


def test_heading():
    s = _obj_stream(md="1")
    assert val(s, "MD(a) == 0", 0, a=(1, None)) == 1
    assert truth(s, "MD(a) == MD(b)", 0, a=(1, None), b=(2, None))
    assert not truth(_obj_stream(), "MD(a) == MD(b)", 0, a=(1, None), b=(2, None))
    assert not truth(_obj_stream(), "MD(a) != MD(b)", 0, a=(1, None), b=(2, None))


def test_compare_is_fail_closed():
    assert not compare(None, "!=", 1)
    assert not compare(float("nan"), "!=", 1)
    assert not compare("a", "<", "b")
    assert compare("a", "!=", "b")


def test_elapsed_is_exact_for_decimal_times(sample_stream):
    assert elapsed(sample_stream, 3, 0) == 0.12
    assert elapsed(sample_stream, 5, 2) == 0.12


# table-level checks on the dynamic-programming side


def _it(stream, text, frame):
    m = DPMonitor(parse(text, allow_free=True), stream)
    axes = m.axes(m.f)
    table = m.ev(m.f, {}, 0, np.ones(m.shape(m.n, axes), dtype=bool))[frame]
    return {tuple(int(m.dom[k]) for k in cell) for cell in np.argwhere(table)}


def test_same_class_pairs_in_first_frame(sample_stream):
    assert _it(sample_stream, "CLASS(id1) == CLASS(id2) and id1 != id2", 0) == {(3, 4), (4, 3)}


def test_confident_objects_in_frame_three(sample_stream):
    assert _it(sample_stream, "PROB(id1) >= 0.8", 3) == {(1,)}


# properties


@pytest.mark.parametrize("seed", range(40))
def test_unfrozen_equals_frozen_at_current_frame(seed):
    rng = random.Random(seed)
    s = fuzz.random_stream(rng)
    gen = fuzz.FormulaGen(rng)
    ids = (("a", None), ("b", None))
    # temporal spatial terms look at later frames, where the two bindings differ
    atoms = [a for a in (gen.func_atom(ids) for _ in range(30))
             if not any(isinstance(n, Term) and is_spatially_temporal(n) for n in walk(a))]
    for i in range(len(s)):
        for ka in s.all_ids():
            for kb in s.all_ids():
                loose = Ctx(s, i, {"a": (ka, None), "b": (kb, None)})
                pinned = Ctx(s, i, {"a": (ka, i), "b": (kb, i)})
                for atom in atoms:
                    assert holds(atom, loose) == holds(atom, pinned)


@pytest.mark.parametrize("seed", range(20))
def test_distance_symmetry(seed):
    s = fuzz.random_stream(random.Random(seed))
    for i in range(len(s)):
        for a in s.ids(i):
            for b in s.ids(i):
                for c1 in ("LM", "CT", "BM"):
                    for c2 in ("RM", "TM", "CT"):
                        d1 = val(s, f"DIST(a, {c1}, b, {c2}) > 0", i, a=(a, None), b=(b, None))
                        d2 = val(s, f"DIST(b, {c2}, a, {c1}) > 0", i, a=(a, None), b=(b, None))
                        assert d1 == d2


# visibility


def test_disjoint_bearings_are_both_visible():
    def at(deg0, deg1, r=10.0):
        xs = [r * math.cos(math.radians(d)) for d in (deg0, deg1)]
        ys = [r * math.sin(math.radians(d)) for d in (deg0, deg1)]
        return (min(xs), min(ys), max(xs), max(ys))

    assert both_visible((0, 0), at(10, 20), at(40, 50))


def test_far_box_behind_near_box_is_hidden():
    assert both_visible((0, 0), (5, -2, 6, 2), (20, -1, 21, 1)) is False


def test_viewpoint_inside_a_box_is_undefined():
    assert both_visible((0, 0), (-1, -1, 1, 1), (5, 5, 6, 6)) is None
    assert angular_interval((0, 0), (-1, -1, 1, 1)) is None


def _hits(view, box, angle):
    dx, dy = math.cos(angle), math.sin(angle)
    lo, hi = 0.0, math.inf
    for p, d, a, b in ((view[0], dx, box[0], box[2]), (view[1], dy, box[1], box[3])):
        if abs(d) < 1e-12:
            if not a <= p <= b:
                return False
            continue
        t0, t1 = sorted(((a - p) / d, (b - p) / d))
        lo, hi = max(lo, t0), min(hi, t1)
    return lo <= hi


def _ray_oracle(view, a, b, rays=720):
    angles = [2 * math.pi * (k + 0.5) / rays for k in range(rays)]
    ha = {k for k, t in enumerate(angles) if _hits(view, a, t)}
    hb = {k for k, t in enumerate(angles) if _hits(view, b, t)}
    ca = math.dist(view, ((a[0] + a[2]) / 2, (a[1] + a[3]) / 2))
    cb = math.dist(view, ((b[0] + b[2]) / 2, (b[1] + b[3]) / 2))
    a_hidden = cb < ca and ha <= hb
    b_hidden = ca < cb and hb <= ha
    return not (a_hidden or b_hidden)


def _corner_bearings(view, box):
    return [math.atan2(y - view[1], x - view[0]) for x in (box[0], box[2]) for y in (box[1], box[3])]


def _ambiguous(view, a, b, margin=math.radians(1.5)):
    for u in _corner_bearings(view, a):
        for v in _corner_bearings(view, b):
            if abs((u - v + math.pi) % (2 * math.pi) - math.pi) < margin:
                return True
    return False


def test_visibility_matches_ray_casting():
    rng = random.Random(3)
    checked = 0
    while checked < 300:
        view = (rng.uniform(0, 100), rng.uniform(0, 100))
        boxes = []
        for _ in range(2):
            x0, y0 = rng.uniform(0, 100), rng.uniform(0, 100)
            boxes.append((x0, y0, x0 + rng.uniform(1, 30), y0 + rng.uniform(1, 30)))
        a, b = boxes
        if angular_interval(view, a) is None or angular_interval(view, b) is None or _ambiguous(view, a, b):
            continue
        assert both_visible(view, a, b) == _ray_oracle(view, a, b), (view, a, b)
        checked += 1


def test_visible_atom_on_stream():
    objs = [DataObject(1, "car", 1.0, (5, -2, 6, 2)), DataObject(2, "car", 1.0, (20, -1, 21, 1)),
            DataObject(3, "car", 1.0, (-30, -30, -29, -29))]
    s = build_stream([(0, 0.0, objs)], Box(-40, -40, 40, 40))
    assert not truth(s, "VISIBLE(UNIVERSE, CT, a, b)", 0, a=(1, None), b=(2, None))
    assert truth(s, "VISIBLE(UNIVERSE, CT, a, b)", 0, a=(1, None), b=(3, None))


def test_atoms_in_fuzz_corpus_parse_back():
    rng = random.Random(0)
    gen = fuzz.FormulaGen(rng)
    for _ in range(100):
        f = gen.formula()
        assert all(isinstance(n.lhs.name, str) for n in walk(f) if isinstance(n, FuncAtom))
