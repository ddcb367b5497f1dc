"""Command-line entry points: check, trace, bench, serve."""

from __future__ import annotations

import argparse
import sys

from . import actions as A
from . import syntax as S
from .engine import Doc
from .oracle import mark_program


def cmd_check(args) -> int:
    try:
        text = open(args.file).read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        program = S.parse_expr(text)
    except S.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    marked = mark_program(program)
    errors = S.count_errors(marked)
    print(S.print_decorated(marked))
    print(f"errors: {errors}")
    return 0 if errors == 0 else 1


def cmd_trace(args) -> int:
    try:
        trace_text = open(args.file).read()
        program_text = open(args.program).read() if args.program else "?"
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        trace = A.parse_trace(trace_text)
        program = S.parse_expr(program_text)
    except (A.TraceParseError, S.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = Doc(program)
    steps = 0
    for lineno, la in enumerate(trace, 1):
        try:
            doc.apply_action(la)
        except (A.PathInvalid, A.ActionInapplicable) as exc:
            print(f"error: action {lineno} ({A.format_action(la)}): {exc}",
                  file=sys.stderr)
            return 1
        if args.step_mode == "eager":
            steps += doc.run_to_quiescence().steps_taken
        elif args.step_mode == "per-action":
            if doc.step() is not None:
                steps += 1
    if args.step_mode == "per-action":
        steps += doc.run_to_quiescence().steps_taken
    snap = doc.snapshot()
    print(S.print_decorated(snap))
    print(f"actions: {len(trace)}  steps: {steps}  "
          f"quiescent: {doc.is_quiescent()}  errors: {S.count_errors(snap)}")
    return 0


def cmd_bench(args) -> int:
    from .bench import BenchConfig, BenchError, run_benchmark
    cfg = BenchConfig(layers=args.layers, edit_count=args.edits, seed=args.seed,
                      output_path=args.out)
    def progress(done, total):
        if args.verbose and done % 25 == 0:
            print(f"  {done}/{total} edit pairs", file=sys.stderr)
    try:
        report = run_benchmark(cfg, progress=progress if args.verbose else None)
    except BenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.out:
        print(report.to_csv(), end="")
    print(f"# layers={cfg.layers} edits={cfg.edit_count} seed={cfg.seed} "
          f"rows={len(report.rows)} speedup={report.speedup:.2f}x",
          file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from .server import serve
    if args.web is not None:
        from .web import start_background_web
        _, web_port = start_background_web(args.host, args.web)
        print(f"workbench: http://{args.host}:{web_port}/", file=sys.stderr, flush=True)

    def ready(port):
        print(f"session server on {args.host}:{port}", file=sys.stderr, flush=True)

    try:
        serve(args.host, args.port, ready=ready)
    except KeyboardInterrupt:
        pass
    return 0


def main(argv=None) -> int:
    sys.setrecursionlimit(200000)
    parser = argparse.ArgumentParser(prog="incmark",
                                     description="incremental bidirectional type checker")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type check a program file from scratch")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("trace", help="replay an edit trace incrementally")
    p.add_argument("file", help="trace file, one action per line")
    p.add_argument("--program", help="initial program file (default: a hole)")
    p.add_argument("--step-mode", choices=["eager", "per-action", "manual"],
                   default="eager",
                   help="eager: settle after every action; per-action: one step "
                        "per action then settle; manual: no propagation")
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("bench", help="incremental vs from-scratch stress benchmark")
    p.add_argument("--layers", type=int, default=20)
    p.add_argument("--edits", type=int, default=200,
                   help="number of change+revert pairs")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="run the editing session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=4786)
    p.add_argument("--web", type=int, nargs="?", const=8350, default=None,
                   help="also serve the browser workbench on this port")
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
