"""Command line interface.

Subcommands: run, bench, parse, dump-automata, predict, mediate, serve.
"""

from __future__ import annotations

import argparse
import os
import socket
import sys
from typing import List, Optional, Sequence, Tuple

from . import bench as bench_mod
from .driver import (
    CollectChannel,
    NullChannel,
    StreamChannel,
    default_trace_patterns,
    render_default_message,
    run_traced,
)
from .kernel import CATALOG_PROGRAMS, KernelError, catalog_model, load_model
from .match import ActivePatternSet
from .mediator import Mediator, run_session
from .patterns import (
    Pattern,
    PatternError,
    format_pattern,
    parse_patterns,
    typecheck_pattern,
)
from .wire import decode_event, frame_kind


def _load_patterns(args) -> Optional[List[Pattern]]:
    if getattr(args, "patterns", None):
        with open(args.patterns, "r", encoding="utf-8") as fh:
            patterns = parse_patterns(fh.read())
    elif getattr(args, "patterns_set", None):
        patterns = bench_mod.pattern_set(args.patterns_set)
    else:
        return None
    for p in patterns:
        typecheck_pattern(p)
    return patterns


def _open_mediator_channel(spec: str):
    if spec == "null":
        return NullChannel()
    if spec == "stdio":
        return StreamChannel(sys.stdin.buffer, sys.stdout.buffer)
    if spec.startswith("tcp:"):
        port = int(spec.split(":", 1)[1])
        sock = socket.create_connection(("127.0.0.1", port))
        return StreamChannel(sock.makefile("rb"), sock.makefile("wb"))
    raise SystemExit(f"bad --mediator value {spec!r} (use stdio, tcp:PORT or null)")


def _print_solutions(outcome) -> None:
    for sol in outcome.solutions:
        rendered = " ".join(f"{name}={value}" for name, value in sol.items())
        print(f"solution {rendered}")
    print(f"solutions: {len(outcome.solutions)}  nodes: {outcome.nodes}  "
          f"failures: {outcome.failures}")


def cmd_run(args) -> int:
    try:
        if os.path.isfile(args.program):
            with open(args.program, "r", encoding="utf-8") as fh:
                model = load_model(fh.read())
        else:
            model = catalog_model(args.program)
    except KernelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    patterns = _load_patterns(args)

    if args.interactive:
        pats = patterns if patterns is not None else []

        def console_input() -> Optional[str]:
            try:
                sys.stdout.write("> ")
                sys.stdout.flush()
                return sys.stdin.readline() or None
            except KeyboardInterrupt:
                return None

        _mediator, outcome, _driver = run_session(
            model, pats, solution_limit=args.limit, program=args.program,
            console_output=print, console_input=console_input,
        )
        _print_solutions(outcome)
        return 0

    if patterns is None and args.mediator == "null":
        # Default trace, rendered for humans.
        channel = CollectChannel()
        outcome, _driver = run_traced(
            model, patterns=default_trace_patterns(), channel=channel,
            solution_limit=args.limit, program=args.program,
        )
        for line in channel.lines:
            if frame_kind(line) == "event":
                print(render_default_message(decode_event(line)))
        _print_solutions(outcome)
        return 0

    channel = _open_mediator_channel(args.mediator)
    pats = patterns if patterns is not None else default_trace_patterns()
    outcome, driver = run_traced(model, patterns=pats, channel=channel,
                                 solution_limit=args.limit, program=args.program)
    out = sys.stderr if args.mediator == "stdio" else sys.stdout
    print(f"events: {driver.chrono}  messages: {driver.messages_sent}  "
          f"bytes: {getattr(channel, 'bytes_sent', 0)}", file=out)
    if args.mediator != "stdio":
        _print_solutions(outcome)
    return 0


def cmd_bench(args) -> int:
    if args.programs:
        programs: List[Tuple[str, Optional[int]]] = []
        for item in args.programs.split(";"):
            item = item.strip()
            if "@" in item:
                spec, limit = item.split("@", 1)
                programs.append((spec, int(limit)))
            else:
                programs.append((item, None))
    else:
        programs = list(bench_mod.BENCH_PROGRAMS)
    reports, fit = bench_mod.run_benchmark(
        programs, driver_set=args.patterns_set, gcom_set=args.gcom_set, reps=args.reps
    )
    table = bench_mod.report_table(reports, fit)
    print(table)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(table + "\n")
    return 0


def cmd_parse(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        src = fh.read()
    try:
        patterns = parse_patterns(src)
        for p in patterns:
            typecheck_pattern(p)
    except PatternError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in patterns:
        print(format_pattern(p))
    return 0


def cmd_dump_automata(args) -> int:
    with open(args.file, "r", encoding="utf-8") as fh:
        src = fh.read()
    try:
        patterns = parse_patterns(src)
        for p in patterns:
            typecheck_pattern(p)
        active = ActivePatternSet()
        active.add_patterns(patterns)
    except PatternError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for label, entry in active.entries.items():
        auto = entry.automaton
        print(f"{label}: entry={auto.entry}")
        for i, state in enumerate(auto.states):
            cond = format_pattern(
                Pattern("x", state.condition, False, entry.pattern.actions)
            ).split(" when ", 1)[1].rsplit(" do", 1)[0]
            print(f"  s{i}: {cond}  true->{state.on_true} false->{state.on_false}")
    print()
    print(active.dump())
    return 0


def cmd_predict(args) -> int:
    patterns = _load_patterns(args) or bench_mod.pattern_set("5a")
    per_event = bench_mod.calibrate_pattern_cost(patterns, reps=args.reps)
    n = bench_mod.count_events(args.program, args.limit)
    t_prog = bench_mod.run_config(args.program, (), "prog", args.reps, args.limit)
    eps = t_prog * 1e6 / n
    ratio = bench_mod.predict_overhead(eps, per_event)
    print(f"per-event pattern cost: {per_event:.0f}ns")
    print(f"{args.program}: eps={eps:.0f}ns predicted r_driver={ratio:.2f}")
    if ratio > 2.0:
        print("warning: per-event cost is large relative to this program's own "
              "work; expect noticeable slowdown")
    return 0


def cmd_mediate(args) -> int:
    if args.listen.startswith("tcp:"):
        port = int(args.listen.split(":", 1)[1])
        server = socket.create_server(("127.0.0.1", port))
        conn, _addr = server.accept()
        channel = StreamChannel(conn.makefile("rb"), conn.makefile("wb"))
    elif args.listen == "stdio":
        channel = StreamChannel(sys.stdin.buffer, sys.stdout.buffer)
    else:
        raise SystemExit(f"bad --listen value {args.listen!r}")

    def console_input() -> Optional[str]:
        return None  # every freeze resumes immediately

    mediator = Mediator(channel, console_input=console_input, console_output=print)
    mediator.serve()
    print(f"messages: {len(mediator.messages)}  freezes: {len(mediator.freezes)}",
          file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracerforge",
        description="Trace-driven debugging for a finite-domain constraint solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a catalog program under the tracer")
    p_run.add_argument("program",
                       help="model file path, or catalog spec: "
                            + ", ".join(CATALOG_PROGRAMS))
    p_run.add_argument("--patterns", help="pattern file to activate")
    p_run.add_argument("--patterns-set", help="named pattern set (1a..5a, 6b..9b)")
    p_run.add_argument("--mediator", default="null",
                       help="stdio | tcp:PORT | null (default null)")
    p_run.add_argument("--interactive", action="store_true",
                       help="in-process mediator with a console on stdin")
    p_run.add_argument("--limit", type=int, default=None,
                       help="stop after this many solutions")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="measure tracing overhead")
    p_bench.add_argument("--programs", default="",
                         help="semicolon list, each 'spec' or 'spec@limit'")
    p_bench.add_argument("--patterns-set", default="5a")
    p_bench.add_argument("--gcom-set", default="8b")
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument("--report", help="also write the table to this file")
    p_bench.set_defaults(func=cmd_bench)

    p_parse = sub.add_parser("parse", help="check a pattern file, print canonical form")
    p_parse.add_argument("file")
    p_parse.set_defaults(func=cmd_parse)

    p_dump = sub.add_parser("dump-automata",
                            help="show compiled automata and the port table")
    p_dump.add_argument("file")
    p_dump.set_defaults(func=cmd_dump_automata)

    p_pred = sub.add_parser("predict", help="predict driver overhead for a program")
    p_pred.add_argument("program")
    p_pred.add_argument("--patterns")
    p_pred.add_argument("--patterns-set")
    p_pred.add_argument("--reps", type=int, default=3)
    p_pred.add_argument("--limit", type=int, default=None)
    p_pred.set_defaults(func=cmd_predict)

    p_med = sub.add_parser("mediate", help="run the mediator side of a session")
    p_med.add_argument("--listen", default="stdio", help="stdio | tcp:PORT")
    p_med.set_defaults(func=cmd_mediate)

    p_serve = sub.add_parser("serve", help="start the HTTP/WebSocket service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KernelError, PatternError, bench_mod.BenchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
