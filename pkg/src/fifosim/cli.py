"""Command-line interface: ``fifosim simulate|verify|bench|gen``.

Exit codes: 0 success, 1 usage or grid error, 2 trace I/O or parse error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import statistics
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import trace as tracemod
from .config import (
    TABLE_ASSOCIATIVITIES, TABLE_LINE_SIZES, TABLE_SET_SIZES, CacheGrid, GridError,
    grids_for_line_sizes, parse_size_list, validate_grid,
)
from .engine import TRACK_POLICIES, Engine
from .lut import DEFAULT_BUCKET_BITS
from .oracle import RefCacheState, audit_run, diff_reports, simulate_reference
from .report import engine_summary, write_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TRACE = 2
EXIT_VERIFY = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_grid_flags(p: argparse.ArgumentParser, line_sizes: str) -> None:
    p.add_argument("--line-sizes", default=line_sizes, help="comma list or lo..hi range of byte line sizes")
    p.add_argument("--set-sizes", default="1..16384", help="comma list or lo..hi range (default 1..16384)")
    p.add_argument("--assocs", default="2,4,8,16", help="comma list of associativities (default 2,4,8,16)")
    p.add_argument("--lut-bits", type=int, default=DEFAULT_BUCKET_BITS, help="lookup-table bucket index width")
    p.add_argument("--track-policy", choices=TRACK_POLICIES, default="non_mri", help=argparse.SUPPRESS)


def _add_trace_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--trace", required=required, help="trace file path")
    p.add_argument("--format", default="text", choices=("text", "bin", "binary"), help="trace file format")


def _grids(args) -> list[CacheGrid]:
    return grids_for_line_sizes(
        parse_size_list(args.line_sizes), parse_size_list(args.set_sizes), parse_size_list(args.assocs)
    )


def _read_trace(args) -> list[int]:
    return list(tracemod.read_accesses(args.trace, args.format))


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _run_engine(kind: str, grid: CacheGrid, addrs: list[int], args):
    blocks = list(tracemod.to_blocks(addrs, grid.line_size))
    if kind == "naive":
        ref = RefCacheState(grid)
        start = time.perf_counter()
        ref.feed(blocks)
        report = ref.report(time.perf_counter() - start)
        report.distinct_blocks = len(set(blocks))
        return report
    engine = Engine(grid, lut_bits=args.lut_bits, track_policy=args.track_policy)
    engine.feed(blocks)
    return engine.report()


# -- simulate -------------------------------------------------------------

def cmd_simulate(args) -> int:
    grids = _grids(args)
    addrs = _read_trace(args)
    reports = [_run_engine(args.engine, g, addrs, args) for g in grids]
    fh, owned = _open_out(args.out)
    try:
        write_csv(reports, fh)
    finally:
        if owned:
            fh.close()
    if args.summary:
        summary = {
            "trace": args.trace,
            "format": tracemod.normalize_format(args.format),
            "engine": args.engine,
            "accesses": len(addrs),
            "grid": {
                "line_sizes": [g.line_size for g in grids],
                "set_sizes": list(grids[0].set_sizes),
                "associativities": list(grids[0].associativities),
            },
            "engines": [engine_summary(r) for r in reports],
        }
        Path(args.summary).write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


# -- verify ---------------------------------------------------------------

def _random_grid(rnd: random.Random, trial: int) -> CacheGrid:
    line = rnd.choice(TABLE_LINE_SIZES)
    kind = trial % 4
    if kind == 0:
        return validate_grid(line, TABLE_SET_SIZES, TABLE_ASSOCIATIVITIES)
    sets = rnd.sample(TABLE_SET_SIZES, rnd.randint(1, len(TABLE_SET_SIZES)))
    if kind == 1:
        assocs = [2] + rnd.sample((4, 8, 16), rnd.randint(0, 3))
    elif kind == 2:
        assocs = [4] + rnd.sample((8, 16), rnd.randint(1, 2))
    else:
        assocs = rnd.sample(TABLE_ASSOCIATIVITIES, rnd.randint(1, 4))
    return validate_grid(line, sets, assocs)


def _random_trace(rnd: random.Random, model: str, seed: int, length: int, line: int) -> list[int]:
    if model == "uniform":
        span = line << rnd.randint(2, 16)
        return tracemod.generate_trace("uniform", seed=seed, length=length, span=span)
    if model == "loop":
        return tracemod.generate_trace("loop", seed=seed, length=length, line_size=line,
                                       blocks=rnd.randint(2, 1 << rnd.randint(2, 12)),
                                       stride=rnd.choice((1, 1, 2, 3)))
    return tracemod.generate_trace("zipf_ws", seed=seed, length=length, line_size=line,
                                   blocks=1 << rnd.randint(3, 14), exponent=rnd.uniform(0.6, 2.0))


def _campaign(args):
    """Yield ``(label, grid, byte addresses)`` for each randomized trial."""
    models = ("uniform", "loop", "zipf_ws") if args.model == "mixed" else (args.model,)
    flag_grids = None if args.random_grid else _grids(args)
    for trial in range(args.seeds):
        seed = args.base_seed + trial
        rnd = random.Random(seed)
        lo, hi = args.min_length, args.max_length
        length = round(math.exp(rnd.uniform(math.log(lo), math.log(hi))))
        model = models[trial % len(models)]
        grids = [_random_grid(rnd, trial)] if flag_grids is None else flag_grids
        addrs = _random_trace(rnd, model, seed, length, grids[0].line_size)
        for grid in grids:
            yield f"seed={seed} model={model} length={length} line={grid.line_size}", grid, addrs


def cmd_verify(args) -> int:
    if args.trace is None and args.seeds is None:
        raise UsageError("verify: give --trace or --seeds")
    if args.seeds is not None and (args.seeds < 1 or not 1 <= args.min_length <= args.max_length):
        raise UsageError("verify: need --seeds >= 1 and 1 <= --min-length <= --max-length")
    if args.trace is not None:
        addrs = _read_trace(args)
        trials = [(f"trace={args.trace} line={g.line_size}", g, addrs) for g in _grids(args)]
    else:
        trials = _campaign(args)

    mismatches = violations = inclusion = flag_failures = n_trials = 0
    firings = {"p1": 0, "p2": 0, "p3": 0}
    failing = []
    for label, grid, addrs in trials:
        n_trials += 1
        blocks = list(tracemod.to_blocks(addrs, grid.line_size))
        if args.audit:
            report, audit = audit_run(blocks, grid, track_policy=args.track_policy)
            reference = audit.reference
            violations += len(audit.violations)
            inclusion += audit.inclusion_violations
            flag_failures += audit.insertion_flag_failures
            for k in firings:
                firings[k] += audit.firings[k]
            for v in audit.violations[: args.show]:
                print(f"VIOLATION {label} access={v.access_index} prop={v.prop} config={v.config_id} block={v.block:#x}")
        else:
            engine = Engine(grid, lut_bits=args.lut_bits, track_policy=args.track_policy)
            engine.feed(blocks)
            report = engine.report()
            for k in firings:
                firings[k] += report.extra["firings"][k]
            reference = simulate_reference(blocks, grid)
        diff = diff_reports(report, reference)
        mismatches += len(diff)
        for m in diff[: args.show]:
            print(f"MISMATCH {label} {m}")
        if diff or (args.audit and audit.violations):
            failing.append(label)
        if args.verbose:
            print(f"TRIAL {label} configs={grid.num_configs} mismatches={len(diff)}")

    print(f"TRIALS={n_trials}")
    print(f"FIRINGS p1={firings['p1']} p2={firings['p2']} p3={firings['p3']}")
    if args.audit:
        print(f"INCLUSION_VIOLATIONS={inclusion} INSERTION_FLAG_FAILURES={flag_failures}")
    print(f"MISMATCHES={mismatches} VIOLATIONS={violations}")
    if args.summary:
        Path(args.summary).write_text(json.dumps({
            "trials": n_trials, "mismatches": mismatches, "violations": violations,
            "firings": firings, "inclusion_violations": inclusion,
            "insertion_flag_failures": flag_failures, "audit": bool(args.audit),
            "failing_trials": failing,
        }, indent=2) + "\n")
    return EXIT_OK if mismatches == 0 and violations == 0 else EXIT_VERIFY


# -- bench ----------------------------------------------------------------

def _timing(times: list[float]) -> dict:
    return {"times": times, "min": min(times), "median": statistics.median(times)}


def cmd_bench(args) -> int:
    if args.repeat < 1:
        raise UsageError("bench: --repeat must be >= 1")
    grids = _grids(args)
    addrs = _read_trace(args)
    sides = {"candidate": args.engine, "baseline": "naive"}
    times = {side: [] for side in sides}
    for _ in range(args.repeat):
        for side, kind in sides.items():
            times[side].append(sum(_run_engine(kind, g, addrs, args).wall_time for g in grids))
    result = {
        "trace": args.trace,
        "accesses": len(addrs),
        "line_sizes": [g.line_size for g in grids],
        "configs_per_line_size": grids[0].num_configs,
        "repeat": args.repeat,
        "candidate": {"engine": args.engine, **_timing(times["candidate"])},
        "baseline": {"engine": "naive", **_timing(times["baseline"])},
    }
    cand = result["candidate"]["median"]
    result["speedup"] = result["baseline"]["median"] / cand if cand > 0 else math.inf
    text = json.dumps(result, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- gen ------------------------------------------------------------------

def cmd_gen(args) -> int:
    try:
        addrs = tracemod.generate_trace(
            args.model, seed=args.seed, length=args.length, line_size=args.line_size,
            span=args.span, blocks=args.blocks, stride=args.stride, exponent=args.exponent,
        )
    except ValueError as exc:
        raise UsageError(f"gen: {exc}") from None
    if args.out == "-":
        tracemod.write_accesses(sys.stdout.buffer, addrs, args.format)
    else:
        tracemod.write_accesses(args.out, addrs, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fifosim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a configuration grid over a trace, write CSV")
    _add_trace_flags(p)
    _add_grid_flags(p, ",".join(map(str, TABLE_LINE_SIZES)))
    p.add_argument("--engine", choices=("fast", "naive"), default="fast")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--summary", help="optional JSON summary path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compare the engine against the reference simulator")
    _add_trace_flags(p, required=False)
    _add_grid_flags(p, "4")
    p.add_argument("--audit", action="store_true", help="check every fast-path credit against the reference")
    p.add_argument("--seeds", type=int, help="run a randomized campaign of this many trials")
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--model", choices=("uniform", "loop", "zipf_ws", "mixed"), default="mixed")
    p.add_argument("--min-length", type=int, default=1000)
    p.add_argument("--max-length", type=int, default=100_000)
    p.add_argument("--random-grid", action="store_true", help="sample a grid per trial from the default lattice")
    p.add_argument("--show", type=int, default=5, help="max mismatches/violations printed per trial")
    p.add_argument("--summary", help="optional JSON summary path")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time the engine against the reference simulator")
    _add_trace_flags(p)
    _add_grid_flags(p, "4")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--engine", choices=("fast", "naive"), default="fast", help="engine timed against the naive baseline")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a synthetic trace")
    p.add_argument("--model", choices=tracemod.MODELS, required=True)
    p.add_argument("--length", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--line-size", type=int, default=4)
    p.add_argument("--span", type=int, default=1 << 20, help="uniform: byte address span")
    p.add_argument("--blocks", type=int, default=64, help="loop/zipf_ws: number of distinct lines")
    p.add_argument("--stride", type=int, default=1, help="loop: stride in lines")
    p.add_argument("--exponent", type=float, default=1.0, help="zipf_ws: skew exponent")
    p.add_argument("--out", required=True, help="output path, or - for stdout")
    p.add_argument("--format", default="text", choices=("text", "bin", "binary"))
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except tracemod.TraceError as exc:
        print(f"fifosim: trace error: {exc}", file=sys.stderr)
        return EXIT_TRACE
    except GridError as exc:
        print(f"fifosim: invalid grid: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"fifosim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fifosim: I/O error: {exc}", file=sys.stderr)
        return EXIT_TRACE


if __name__ == "__main__":
    sys.exit(main())
