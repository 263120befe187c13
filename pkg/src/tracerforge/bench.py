"""Overhead measurement harness.

Times catalog programs under four configurations: bare program, hooks with
no patterns, hooks with non-matching patterns (driver cost), and matching
patterns encoded to a byte-counting sink (generation + communication cost).
Ratios against the bare run quantify each layer; the driver ratio follows
r = a + b/epsilon where epsilon is the program's own nanoseconds-per-event.
"""

from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .driver import NullChannel, default_trace_patterns, run_traced
from .kernel import Model, Solver, catalog_model
from .patterns import Pattern, parse_patterns


class BenchError(Exception):
    pass


class FitUnderdeterminedError(BenchError):
    pass


# Pattern sets used for overhead measurements.  The *a sets are built to
# match nothing on catalog programs (pure filtering cost); the *b sets match
# and therefore exercise trace generation and communication.
PATTERN_SETS: Dict[str, str] = {
    "1a": "p1a: when port=post and isNamed(cname) do current(port,chrono,cident).",
    "2a": ("p2a: when port=reduce and (isNamed(vname) and isNamed(cname)) "
           "do current(port,chrono,cident)."),
    "3a": "p3a: when chrono=0 do current(chrono).",
    "4a": ("p4a: when depth=50000 or (chrono>=1 and node=9999999) "
           "do current(chrono,depth)."),
    "6b": ("cstr: when port=post do current(chrono,cident,cinternal).\n"
           "tree: when port in [failure,backTo,choicePoint,solution] "
           "do current(chrono,node,port)."),
    "7b": ("newvar: when port=newVariable do current(chrono,vident,vname).\n"
           "dom: when port in [choicePoint,backTo,solution] "
           "do current(chrono,node,port,named_vars,full_dom)."),
    "8b": "propag1: when port=reduce do current(chrono).",
    "9b": "propag2: when port=awake do current(chrono).",
}


def pattern_set(name: str) -> List[Pattern]:
    if name == "5a":
        out: List[Pattern] = []
        for part in ("1a", "2a", "3a", "4a"):
            out.extend(parse_patterns(PATTERN_SETS[part]))
        return out
    try:
        return parse_patterns(PATTERN_SETS[name])
    except KeyError:
        raise BenchError(f"unknown pattern set {name!r}") from None


# Default measurement programs with per-program solution limits, sized for
# sub-second bare runs while spreading the per-event cost epsilon.
BENCH_PROGRAMS: Tuple[Tuple[str, Optional[int]], ...] = (
    ("queens(8)", None),
    ("queens(12)", 2),
    ("propag(20000)", None),
    ("propag(40000)", None),
    ("sendmory(20)", 1),
    ("sendmory(40)", 1),
    ("sendmory(80)", 1),
)

CONFIGS = ("prog", "tracer", "driver", "gcom")


@dataclass
class TimingReport:
    program: str
    event_count: int
    t_prog: float                     # milliseconds, best of repetitions
    t_tracer: float
    t_driver: float
    t_gcom: float
    trace_bytes: int
    message_count: int

    @property
    def epsilon_ns(self) -> float:
        return self.t_prog * 1e6 / self.event_count

    @property
    def r_tracer(self) -> float:
        return self.t_tracer / self.t_prog

    @property
    def r_driver(self) -> float:
        return self.t_driver / self.t_prog

    @property
    def r_gcom(self) -> float:
        return self.t_gcom / self.t_prog


@dataclass
class ModelFit:
    a: float
    b: float                          # nanoseconds per event
    r2: float


# Process CPU time, not wall clock: the measured work is single-threaded and
# in-process, and CPU time is immune to co-tenant load on a shared machine.
_clock = time.process_time_ns


def _aggregate(samples: Sequence[float]) -> float:
    """Best-of-reps.  Interference on a shared machine only ever adds time
    (stalled cycles still bill to this process), so the minimum is the
    consistent estimator of the undisturbed cost; medians stay biased as
    long as more than half the samples are disturbed."""
    return min(samples)


def _median_time_ms(run, reps: int) -> float:
    run()                             # warm-up, discarded
    samples = []
    for _ in range(reps):
        t0 = _clock()
        run()
        samples.append((_clock() - t0) / 1e6)
    return _aggregate(samples)


def run_config(
    program: str,
    patterns: Sequence[Pattern],
    config: str,
    reps: int = 5,
    solution_limit: Optional[int] = None,
) -> float:
    """Representative CPU time in ms for one program under one configuration."""
    if config not in CONFIGS:
        raise BenchError(f"unknown config {config!r}")
    model = catalog_model(program)

    if config == "prog":
        run = lambda: Solver(model, solution_limit=solution_limit).solve()
    else:
        pats = () if config == "tracer" else tuple(patterns)
        run = lambda: run_traced(
            model, patterns=pats, channel=NullChannel(), solution_limit=solution_limit
        )
    return _median_time_ms(run, reps)


def count_events(program: str, solution_limit: Optional[int] = None) -> int:
    model = catalog_model(program)
    _outcome, driver = run_traced(model, channel=NullChannel(),
                                  solution_limit=solution_limit)
    return driver.chrono


def measure_program(
    program: str,
    driver_patterns: Sequence[Pattern],
    gcom_patterns: Sequence[Pattern],
    reps: int = 5,
    solution_limit: Optional[int] = None,
) -> TimingReport:
    model = catalog_model(program)
    event_count = count_events(program, solution_limit)
    # The gcom run keeps the driver patterns active too, so its work is a
    # strict superset of the driver run's and the cost ordering is structural.
    combined = tuple(driver_patterns) + tuple(gcom_patterns)
    runs = {
        "prog": lambda: Solver(model, solution_limit=solution_limit).solve(),
        "tracer": lambda: run_traced(
            model, patterns=(), channel=NullChannel(),
            solution_limit=solution_limit),
        "driver": lambda: run_traced(
            model, patterns=tuple(driver_patterns), channel=NullChannel(),
            solution_limit=solution_limit),
        "gcom": lambda: run_traced(
            model, patterns=combined, channel=NullChannel(),
            solution_limit=solution_limit),
    }
    # Configurations are timed interleaved, one of each per repetition, and
    # the order rotates every repetition so slow environment drift hits all
    # four configurations alike instead of a single block.  Repetitions
    # continue past the requested count while any configuration's minimum is
    # still improving: on a loaded machine even the best of a small fixed
    # sample can be a disturbed one.
    samples: Dict[str, List[float]] = {name: [] for name in runs}
    order = list(runs)
    for name in order:
        runs[name]()                  # warm-up, discarded
    best: Dict[str, float] = {}
    stable_rounds = 0
    rep = 0
    while rep < reps or (stable_rounds < 3 and rep < reps * 4):
        rotated = order[rep % len(order):] + order[:rep % len(order)]
        improved = False
        for name in rotated:
            # Collect outside the timed window so one sample never pays for
            # garbage left behind by a previous configuration's run.
            gc.collect()
            t0 = _clock()
            runs[name]()
            sample = (_clock() - t0) / 1e6
            samples[name].append(sample)
            if sample < best.get(name, float("inf")) * 0.995:
                best[name] = sample
                improved = True
        stable_rounds = 0 if improved else stable_rounds + 1
        rep += 1
    t_prog = _aggregate(samples["prog"])
    t_tracer = _aggregate(samples["tracer"])
    t_driver = _aggregate(samples["driver"])
    t_gcom = _aggregate(samples["gcom"])
    sink = NullChannel()
    _outcome, driver = run_traced(model, patterns=tuple(gcom_patterns),
                                  channel=sink, solution_limit=solution_limit)
    return TimingReport(
        program=program,
        event_count=event_count,
        t_prog=t_prog,
        t_tracer=t_tracer,
        t_driver=t_driver,
        t_gcom=t_gcom,
        trace_bytes=sink.bytes_sent,
        message_count=driver.messages_sent,
    )


def trace_bytes(
    program: str,
    patterns: Sequence[Pattern],
    solution_limit: Optional[int] = None,
) -> Tuple[int, int]:
    """(encoded bytes, message count) for a program under a pattern set."""
    model = catalog_model(program)
    sink = NullChannel()
    _outcome, driver = run_traced(model, patterns=tuple(patterns), channel=sink,
                                  solution_limit=solution_limit)
    return sink.bytes_sent, driver.messages_sent


def fit_model(points: Sequence[Tuple[float, float]]) -> ModelFit:
    """Least squares of r = a + b/epsilon over (epsilon_ns, r_driver) points."""
    if len(points) < 3:
        raise FitUnderdeterminedError(f"need at least 3 points, got {len(points)}")
    eps = np.array([p[0] for p in points], dtype=float)
    r = np.array([p[1] for p in points], dtype=float)
    design = np.column_stack([np.ones_like(eps), 1.0 / eps])
    coef, *_ = np.linalg.lstsq(design, r, rcond=None)
    a, b = float(coef[0]), float(coef[1])
    predicted = design @ coef
    ss_res = float(np.sum((r - predicted) ** 2))
    ss_tot = float(np.sum((r - np.mean(r)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ModelFit(a, b, r2)


def sigma_check(individual: Sequence[float], combined: float, tol: float = 0.10) -> bool:
    """Activating n patterns together costs no more than the sum of their
    separate overheads (each ratio counts the base run once)."""
    n = len(individual)
    bound = (sum(individual) - (n - 1)) * (1.0 + tol)
    return combined <= bound


def predict_overhead(epsilon_ns: float, per_event_ns: float) -> float:
    return 1.0 + per_event_ns / epsilon_ns


def calibrate_pattern_cost(
    patterns: Sequence[Pattern],
    program: str = "queens(8)",
    reps: int = 5,
    solution_limit: Optional[int] = None,
) -> float:
    """Measured per-event driver cost (ns) of a pattern set on a reference run."""
    n = count_events(program, solution_limit)
    t_prog = run_config(program, (), "prog", reps, solution_limit)
    t_driver = run_config(program, patterns, "driver", reps, solution_limit)
    return max(0.0, (t_driver - t_prog) * 1e6 / n)


def report_table(reports: Sequence[TimingReport], fit: Optional[ModelFit] = None) -> str:
    header = (
        f"{'program':<18} {'events':>9} {'eps(ns)':>9} {'t_prog':>9} "
        f"{'r_tracer':>9} {'r_driver':>9} {'r_gcom':>9} {'bytes':>11}"
    )
    lines = [header, "-" * len(header)]
    for rep in reports:
        lines.append(
            f"{rep.program:<18} {rep.event_count:>9} {rep.epsilon_ns:>9.0f} "
            f"{rep.t_prog:>8.1f}ms {rep.r_tracer:>9.2f} {rep.r_driver:>9.2f} "
            f"{rep.r_gcom:>9.2f} {rep.trace_bytes:>11}"
        )
    if fit is not None:
        lines.append("")
        lines.append(
            f"fit: r_driver = {fit.a:.3f} + {fit.b:.0f}ns/eps   (r2 = {fit.r2:.3f})"
        )
    return "\n".join(lines)


def run_benchmark(
    programs: Sequence[Tuple[str, Optional[int]]] = BENCH_PROGRAMS,
    driver_set: str = "5a",
    gcom_set: str = "8b",
    reps: int = 5,
) -> Tuple[List[TimingReport], Optional[ModelFit]]:
    driver_patterns = pattern_set(driver_set)
    gcom_patterns = pattern_set(gcom_set)
    reports = [
        measure_program(program, driver_patterns, gcom_patterns, reps, limit)
        for program, limit in programs
    ]
    fit = None
    if len(reports) >= 3:
        fit = fit_model([(r.epsilon_ns, r.r_driver) for r in reports])
    return reports, fit
