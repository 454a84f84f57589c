"""Command-line front end.

Exit status is 0 when the formula is satisfied (or the engines agree in
``--engine both`` / ``--fuzz`` mode, or ``--search`` finished), 1 when it is
falsified (or the engines disagree) and 2 on any error.  A JSON report is
written to stdout or ``--out``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, corpus, dp_monitor, fuzz, ref_eval
from .common import Binding, MonitorConfig, UnsupportedFormula
from .datastream import StreamError, load_stream, parse_universe
from .formula import ParseError, parse, pretty_print
from .formula.syntax import Always, Eventually, Exists, Forall, Formula
from .formula.transform import closed, stats, subformulas, validate_aan
from .spatial import STATS

SCHEMA_VERSION = 1
CORPUS_PREFIX = "corpus:"


class CliError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stpl", description="Monitor spatio-temporal formulas over object streams.")
    p.add_argument("--formula", help="formula file; 'corpus:NAME' reads a shipped example")
    p.add_argument("--data", help="stream file (csv or KITTI tracking labels); 'corpus:NAME' allowed")
    p.add_argument("--format", choices=("csv", "kitti"), help="stream format (default: by extension)")
    p.add_argument("--fps", type=float, help="frame rate for KITTI timestamps")
    p.add_argument("--universe", help="universe extent WxH; boxes are clipped to it")
    p.add_argument("--coord", choices=("image", "vehicle"), help="coordinate frame recorded in the stream")
    p.add_argument("--engine", choices=("dp", "ref", "both"), default="dp")
    p.add_argument("--bb-resolution", choices=("frozen", "current"), default="frozen")
    p.add_argument("--no-canonicalize", action="store_true", help="keep raw box lists (debugging only)")
    p.add_argument("--parallel", action="store_true", help="evaluate expensive atoms on a thread pool")
    p.add_argument("--witness", action="store_true", help="report bindings for a satisfied existential prefix")
    p.add_argument("--trace", help="write the DP table cells as JSON lines to this path")
    p.add_argument("--bench", help="comma-separated stream prefix lengths to time, e.g. 25,50,100,200")
    p.add_argument("--search", action="store_true", help="report every frame where the existential body holds")
    p.add_argument("--fuzz", type=int, metavar="N", help="compare both engines on N random formula/stream pairs")
    p.add_argument("--seed", type=int, default=0, help="fuzz seed")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--version", action="version", version=f"stpl {__version__}")
    return p


# inputs


def _resolve(path: str) -> Path:
    if path.startswith(CORPUS_PREFIX):
        return corpus.path(path[len(CORPUS_PREFIX):])
    return Path(path)


def load_formula(path: str) -> tuple[str, Formula]:
    p = _resolve(path)
    try:
        src = p.read_text()
    except OSError as e:
        raise CliError(f"cannot read formula {path}: {e.strerror}") from None
    try:
        return src, parse(src)
    except ParseError as e:
        raise CliError(f"{path}:{e}") from None


def load_data(args):
    if not args.data:
        raise CliError("--data is required")
    p = _resolve(args.data)
    if not p.exists():
        raise CliError(f"cannot read data {args.data}: no such file")
    universe = parse_universe(args.universe) if args.universe else None
    return load_stream(p, args.format, args.fps, universe, args.coord)


def config_from(args) -> MonitorConfig:
    return MonitorConfig(
        bb_resolution=args.bb_resolution,
        canonicalize=not args.no_canonicalize,
        parallel=args.parallel,
        trace=args.trace,
    )


# operations


def _bindings(w) -> list | None:
    return None if w is None else [b.as_dict() for b in w]


def evaluate(f: Formula, stream, engine: str, config: MonitorConfig, witness: bool = False):
    mod = dp_monitor if engine == "dp" else ref_eval
    t0 = time.perf_counter()
    v = mod.satisfies(f, stream, config, witness)
    return v, time.perf_counter() - t0


def _dp_table(node: Formula, stream, config: MonitorConfig):
    m = dp_monitor.DPMonitor(node, stream, config)
    try:
        return [bool(x) for x in m.table()]
    finally:
        m.close()


def compare_engines(f: Formula, stream, config: MonitorConfig) -> dict:
    """Run both engines; on disagreement locate the first differing closed subformula cell."""
    cfg = MonitorConfig(config.bb_resolution, config.canonicalize, config.parallel, config.workers)
    ref = ref_eval.RefEvaluator(stream, cfg)
    a = ref.table(f) if len(stream) else []
    b = _dp_table(f, stream, cfg) if len(stream) else []
    out = {"agree": a == b, "ref": bool(a and a[0]), "dp": bool(b and b[0]), "first_difference": None}
    if a == b:
        return out
    for k, node in enumerate(subformulas(f)):
        if not closed(node):
            continue
        ra, rb = ref.table(node), _dp_table(node, stream, cfg)
        if ra != rb:
            frame = next(i for i, (x, y) in enumerate(zip(ra, rb)) if x != y)
            out["first_difference"] = {
                "subformula_id": k, "subformula": pretty_print(node), "frame": frame,
                "ref": ra[frame], "dp": rb[frame],
            }
            break
    return out


def search(f: Formula, stream, config: MonitorConfig, engine: str = "dp") -> list[dict]:
    """Frames where an existential body holds, or where a universal body fails.

    Accepted shapes are ``[eventually] exists ...`` (matches) and
    ``always forall ...`` (violations, with a falsifying assignment).
    """
    body = f.arg if isinstance(f, Eventually) and f.interval is None else f
    violations = False
    if isinstance(f, Always) and f.interval is None and isinstance(f.arg, Forall):
        body, violations = f.arg, True
    elif not isinstance(body, Exists):
        raise CliError("search needs a formula of the form '[eventually] exists ...' or 'always forall ...'")
    if not len(stream):
        return []
    ref = ref_eval.RefEvaluator(stream, config)
    table = ref.table(body) if engine == "ref" else _dp_table(body, stream, config)
    hits = []
    for i, v in enumerate(table):
        if v == violations:
            continue
        w = _counterexample(ref, body, i) if violations else ref.bindings(body, i)
        hits.append({"frame": i, "time": stream.time(i), "bindings": _bindings(w) or []})
    return hits


def _counterexample(ref: ref_eval.RefEvaluator, f: Formula, i: int):
    env = ref_eval.Env()
    out = []
    while isinstance(f, Forall):
        for k in ref.stream.ids(i):
            e2 = ref._bind(f, k, i, env)
            if not ref.holds(f.body, i, e2):
                out.append(Binding(f.var, k, i))
                env, f = e2, f.body
                break
        else:
            break
    return tuple(out)


def run_fuzz(count: int, seed: int, canonicalize: bool = True) -> dict:
    disagreements = []
    for k, (f, s, res) in enumerate(fuzz.pairs(seed, count)):
        cfg = MonitorConfig(bb_resolution=res, canonicalize=canonicalize)
        a = ref_eval.satisfies(f, s, cfg).value
        b = dp_monitor.satisfies(f, s, cfg).value
        if a != b:
            disagreements.append({"case": k, "formula": pretty_print(f), "bb_resolution": res, "ref": a, "dp": b})
    return {"seed": seed, "cases": count, "agree": count - len(disagreements), "disagreements": disagreements}


# report


def _stream_summary(stream) -> dict:
    u = stream.meta.universe
    return {**stream.stats(), "universe": list(u.as_tuple()), "coordinate_frame": stream.meta.coordinate_frame,
            "clipped": stream.meta.clipped}


def _formula_summary(path: str, src: str, f: Formula) -> dict:
    return {
        "path": path, "source": src, "pretty": pretty_print(f), "stats": stats(f).as_dict(),
        "aan_violations": [v.__dict__ for v in validate_aan(f)],
    }


def _report(args, **fields) -> dict:
    base = {
        "schema_version": SCHEMA_VERSION, "tool_version": __version__, "mode": "run", "engine": args.engine,
        "config": {"bb_resolution": args.bb_resolution, "canonicalize": not args.no_canonicalize},
        "verdict": None, "error": None,
    }
    base.update(fields)
    return base


def execute(args) -> tuple[int, dict]:
    config = config_from(args)
    if args.fuzz is not None:
        t0 = time.perf_counter()
        res = run_fuzz(args.fuzz, args.seed, config.canonicalize)
        ok = not res["disagreements"]
        return (0 if ok else 1), _report(args, mode="fuzz", engine="both", fuzz=res, verdict=None,
                                         wall_time=time.perf_counter() - t0)
    if not args.formula:
        raise CliError("--formula is required")
    src, f = load_formula(args.formula)
    stream = load_data(args)
    fields = {"formula": _formula_summary(args.formula, src, f), "stream": _stream_summary(stream)}

    if args.bench:
        try:
            prefixes = tuple(int(x) for x in args.bench.split(","))
        except ValueError:
            raise CliError(f"--bench expects comma-separated integers, got {args.bench!r}") from None
        res = dp_monitor.bench(f, stream, prefixes, config)
        full = res["rows"][-1]["verdict"] if res["rows"] else False
        return (0 if full else 1), _report(args, mode="bench", engine="dp", bench=res, verdict=full, **fields)

    if args.search:
        t0 = time.perf_counter()
        STATS.reset()
        hits = search(f, stream, config, "ref" if args.engine == "ref" else "dp")
        return 0, _report(args, mode="search", search=hits, wall_time=time.perf_counter() - t0,
                          peak_boxes=STATS.peak_boxes, **fields)

    if args.engine == "both":
        t0 = time.perf_counter()
        res = compare_engines(f, stream, config)
        code = 0 if res["agree"] else 1
        return code, _report(args, mode="compare", comparison=res, verdict=res["dp"] if res["agree"] else None,
                             wall_time=time.perf_counter() - t0, **fields)

    try:
        v, wall = evaluate(f, stream, args.engine, config, args.witness)
    except UnsupportedFormula as e:
        raise CliError(f"dp engine declined the formula: {e}; retry with --engine ref") from None
    return (0 if v.value else 1), _report(
        args, verdict=v.value, witness=_bindings(v.witness), wall_time=wall,
        peak_boxes=v.counters.get("peak_boxes", 0), counters=v.counters, **fields,
    )


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad flags and 0 on --help/--version
        return int(e.code or 0)
    try:
        code, report = execute(args)
    except (CliError, StreamError, ValueError, OSError) as e:
        print(f"stpl: error: {e}", file=sys.stderr)
        _emit(_report(args, error=str(e)), args.out)
        return 2
    except Exception as e:  # noqa: BLE001 - any failure maps to exit 2
        print(f"stpl: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        _emit(_report(args, error=str(e)), args.out)
        return 2
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
