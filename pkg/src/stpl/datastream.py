"""Perception data streams: frames of detected objects keyed by track id.

Loaders for the CSV exchange format and KITTI tracking labels, the metadata
sidecar, and the accessors the evaluators use (``ids``, ``retrieve``,
``time``).
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

from .spatial import Box

CSV_COLUMNS = ("frame", "time", "id", "class", "prob", "xmin", "ymin", "xmax", "ymax")
CSV_OPTIONAL = ("empty", "md", "pc_count", "occ")
NONE_LABELS = ("none", "")


class StreamError(ValueError):
    """Malformed input; the message carries the offending line number."""


@dataclass(frozen=True)
class DataObject:
    id: int
    class_label: str
    prob: float
    bbox: tuple[float, float, float, float]
    empty: bool = False
    md: str | None = None
    pc_count: int | None = None
    occ: int | None = None

    @property
    def bounding_volume_empty(self) -> bool:
        """A known point count decides; otherwise the explicit ``empty`` flag."""
        return self.pc_count == 0 if self.pc_count is not None else self.empty


@dataclass(frozen=True)
class Frame:
    index: int
    time: float
    objects: Mapping[int, DataObject]


@dataclass(frozen=True)
class StreamMeta:
    universe: Box
    coordinate_frame: str = "image"
    fps: float | None = None
    clipped: int = 0


@dataclass(frozen=True)
class DataStream:
    frames: tuple[Frame, ...]
    meta: StreamMeta
    class_codes: Mapping[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)

    def frame(self, i: int) -> Frame:
        if not 0 <= i < len(self.frames):
            raise IndexError(f"frame {i} outside 0..{len(self.frames) - 1}")
        return self.frames[i]

    def ids(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.frame(i).objects))

    def retrieve(self, i: int, obj_id: int) -> DataObject | None:
        return self.frame(i).objects.get(obj_id)

    def time(self, i: int) -> float:
        return self.frame(i).time

    def class_code(self, label: str) -> int:
        """Integer code of a class label; 0 is reserved for the ``none`` class."""
        label = label.lower()
        if label in NONE_LABELS:
            return 0
        return self.class_codes.get(label, -1)

    def all_ids(self) -> tuple[int, ...]:
        seen: set[int] = set()
        for f in self.frames:
            seen.update(f.objects)
        return tuple(sorted(seen))

    def prefix(self, n: int) -> DataStream:
        return replace(self, frames=self.frames[:n])

    def with_meta(self, universe: Box | None = None, coordinate_frame: str | None = None,
                  fps: float | None = None) -> DataStream:
        """Copy with new metadata; boxes are clipped to a new universe."""
        return build_stream(
            [(f.index, f.time, list(f.objects.values())) for f in self.frames],
            universe if universe is not None else self.meta.universe,
            coordinate_frame or self.meta.coordinate_frame,
            fps if fps is not None else self.meta.fps,
        )

    def stats(self) -> dict:
        counts = [len(f.objects) for f in self.frames]
        return {
            "frames": len(self.frames),
            "objects_max": max(counts, default=0),
            "objects_total": sum(counts),
            "distinct_ids": len(self.all_ids()),
            "duration": self.frames[-1].time - self.frames[0].time if self.frames else 0.0,
        }


def default_universe(boxes: Iterable[tuple[float, float, float, float]]) -> Box:
    """Tight bounding box of all boxes, expanded to contain the origin."""
    boxes = list(boxes)
    if not boxes:
        return Box(0, 0, 1, 1)
    return Box(
        min(0, min(b[0] for b in boxes)),
        min(0, min(b[1] for b in boxes)),
        max(0, max(b[2] for b in boxes)),
        max(0, max(b[3] for b in boxes)),
    )


def _clip(bbox: tuple, u: Box) -> tuple:
    return (max(bbox[0], u.x_lo), max(bbox[1], u.y_lo), min(bbox[2], u.x_hi), min(bbox[3], u.y_hi))


def build_stream(rows: list[tuple[int, float, list[DataObject]]], universe: Box | None = None,
                 coordinate_frame: str = "image", fps: float | None = None) -> DataStream:
    """Assemble a stream from ``(frame, time, objects)`` triples in frame order."""
    for k, (idx, t, _) in enumerate(rows):
        if idx != k:
            raise StreamError(f"frame indices must be contiguous from 0; got {idx} at position {k}")
        if k and t <= rows[k - 1][1]:
            raise StreamError(f"frame times must be strictly increasing (frame {idx})")
        if math.isnan(t):
            raise StreamError(f"frame {idx} has no time")
    clipped = 0
    if universe is None:
        universe = default_universe(o.bbox for _, _, objs in rows for o in objs)
    codes: dict[str, int] = {}
    frames = []
    for idx, t, objs in rows:
        table: dict[int, DataObject] = {}
        # codes follow (frame, id) order so they do not depend on row order
        for o in sorted(objs, key=lambda o: o.id):
            label = o.class_label.lower()
            if label not in NONE_LABELS and label not in codes:
                codes[label] = len(codes) + 1
            bbox = _clip(o.bbox, universe)
            if bbox != o.bbox:
                clipped += 1
            table[o.id] = replace(o, class_label=label, bbox=bbox)
        frames.append(Frame(idx, t, dict(sorted(table.items()))))
    return DataStream(tuple(frames), StreamMeta(universe, coordinate_frame, fps, clipped), codes)


# metadata sidecar


def parse_universe(text: str) -> Box:
    """``W x H`` (or ``WxH``) means the box (0, 0, W, H)."""
    parts = text.lower().replace("×", "x").split("x")
    if len(parts) != 2:
        raise StreamError(f"universe must look like WxH, got {text!r}")
    w, h = (float(p) for p in parts)
    return Box(0, 0, w, h)


def load_meta(path: str | os.PathLike) -> dict:
    """Read ``key=value`` lines: ``universe``, ``frame`` and ``fps``."""
    out: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise StreamError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "universe":
            out["universe"] = parse_universe(value)
        elif key == "frame":
            if value not in ("image", "vehicle"):
                raise StreamError(f"{path}:{lineno}: frame must be image or vehicle")
            out["coordinate_frame"] = value
        elif key == "fps":
            out["fps"] = float(value)
        else:
            raise StreamError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def sidecar_path(data_path: str | os.PathLike) -> Path:
    p = Path(data_path)
    return p.with_name(p.name + ".meta")


# CSV


def _parse_bool(text: str, lineno: int) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no", ""):
        return False
    raise StreamError(f"line {lineno}: bad boolean {text!r}")


def read_csv(source: str | os.PathLike | io.TextIOBase, universe: Box | None = None,
             coordinate_frame: str = "image", fps: float | None = None) -> DataStream:
    """Load the CSV exchange format.

    A row with an empty ``id`` declares a frame without objects.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_csv(fh, universe, coordinate_frame, fps)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise StreamError("line 1: missing header") from None
    if tuple(header[: len(CSV_COLUMNS)]) != CSV_COLUMNS:
        raise StreamError(f"line 1: header must start with {','.join(CSV_COLUMNS)}")
    extra = header[len(CSV_COLUMNS):]
    for name in extra:
        if name not in CSV_OPTIONAL:
            raise StreamError(f"line 1: unknown column {name!r}")
    frames: dict[int, tuple[float, dict[int, DataObject]]] = {}
    for lineno, row in enumerate(reader, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise StreamError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            fidx = int(row[0])
            t = float(row[1])
        except ValueError as e:
            raise StreamError(f"line {lineno}: {e}") from None
        if fidx in frames:
            if frames[fidx][0] != t:
                raise StreamError(f"line {lineno}: frame {fidx} has two different times")
        else:
            if frames and t <= max(ft for ft, _ in frames.values()):
                raise StreamError(f"line {lineno}: time {t} is not increasing")
            frames[fidx] = (t, {})
        if not row[2].strip():
            continue
        try:
            obj_id = int(row[2])
            prob = float(row[4])
            bbox = tuple(float(v) for v in row[5:9])
        except ValueError as e:
            raise StreamError(f"line {lineno}: {e}") from None
        if bbox[0] > bbox[2] or bbox[1] > bbox[3]:
            raise StreamError(f"line {lineno}: box has min greater than max")
        opts = dict(zip(extra, row[len(CSV_COLUMNS):]))
        try:
            pc = opts.get("pc_count", "").strip()
            occ = opts.get("occ", "").strip()
            obj = DataObject(
                obj_id, row[3].strip(), prob, bbox,
                empty=_parse_bool(opts.get("empty", ""), lineno),
                md=opts.get("md", "").strip() or None,
                pc_count=int(pc) if pc else None,
                occ=int(occ) if occ else None,
            )
        except ValueError as e:
            raise StreamError(f"line {lineno}: {e}") from None
        if obj_id in frames[fidx][1]:
            raise StreamError(f"line {lineno}: duplicate object {obj_id} in frame {fidx}")
        frames[fidx][1][obj_id] = obj
    rows = [(k, frames[k][0], list(frames[k][1].values())) for k in sorted(frames)]
    return build_stream(rows, universe, coordinate_frame, fps)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _opt(v) -> str:
    return "" if v is None else str(v)


def write_csv(stream: DataStream, target: str | os.PathLike | io.TextIOBase) -> None:
    """Export in the CSV exchange format; ``read_csv`` restores it exactly."""
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", newline="") as fh:
            return write_csv(stream, fh)
    w = csv.writer(target, lineterminator="\n")
    w.writerow(CSV_COLUMNS + CSV_OPTIONAL)
    for f in stream.frames:
        if not f.objects:
            w.writerow([f.index, repr(f.time)] + [""] * (len(CSV_COLUMNS) + len(CSV_OPTIONAL) - 2))
        for o in f.objects.values():
            w.writerow(
                [f.index, repr(f.time), o.id, o.class_label or "none", repr(o.prob)]
                + [_fmt(v) for v in o.bbox]
                + [int(o.empty), o.md or "", _opt(o.pc_count), _opt(o.occ)]
            )


# KITTI tracking labels


def read_kitti(source: str | os.PathLike | io.TextIOBase, fps: float = 10.0, universe: Box | None = None,
               coordinate_frame: str = "image") -> DataStream:
    """Load a KITTI tracking label file; ``DontCare`` rows are skipped and time is ``frame / fps``."""
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return read_kitti(fh, fps, universe, coordinate_frame)
    per_frame: dict[int, dict[int, DataObject]] = {}
    last = -1
    for lineno, line in enumerate(source, 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) not in (17, 18):
            raise StreamError(f"line {lineno}: expected 17 or 18 fields, got {len(fields)}")
        try:
            fidx, tid = int(fields[0]), int(fields[1])
            label = fields[2]
            occ = int(fields[4])
            bbox = tuple(float(v) for v in fields[6:10])
            score = float(fields[17]) if len(fields) == 18 else 1.0
        except ValueError as e:
            raise StreamError(f"line {lineno}: {e}") from None
        last = max(last, fidx)
        per_frame.setdefault(fidx, {})
        if label == "DontCare":
            continue
        if tid in per_frame[fidx]:
            raise StreamError(f"line {lineno}: duplicate track {tid} in frame {fidx}")
        per_frame[fidx][tid] = DataObject(tid, label, score, bbox, occ=occ)
    rows = [(i, i / fps, list(per_frame.get(i, {}).values())) for i in range(last + 1)]
    return build_stream(rows, universe, coordinate_frame, fps)


def load_stream(path: str | os.PathLike, fmt: str | None = None, fps: float | None = None,
                universe: Box | None = None, coordinate_frame: str | None = None) -> DataStream:
    """Load a stream, applying its ``.meta`` sidecar; explicit arguments win."""
    meta: dict = {}
    side = sidecar_path(path)
    if side.exists():
        meta = load_meta(side)
    universe = universe or meta.get("universe")
    coordinate_frame = coordinate_frame or meta.get("coordinate_frame", "image")
    fps = fps or meta.get("fps")
    fmt = fmt or ("kitti" if str(path).endswith(".txt") else "csv")
    if fmt == "kitti":
        return read_kitti(path, fps or 10.0, universe, coordinate_frame)
    if fmt == "csv":
        return read_csv(path, universe, coordinate_frame, fps)
    raise StreamError(f"unknown format {fmt!r}")
