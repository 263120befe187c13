"""End-to-end acceptance gate.

Each test prints one PASS/FAIL line (bypassing capture) and asserts the same
condition, so the gate reads as a checklist in any run log.
"""

import sys
import time

import pytest

from corpus import VISU_PATTERNS
from oracles import compile_oracle, random_conditions
from tracerforge.bench import (
    fit_model,
    measure_program,
    pattern_set,
    sigma_check,
    trace_bytes,
)
from tracerforge.driver import (
    CollectChannel,
    default_trace_patterns,
    post_hoc_messages,
    record_events,
    render_default_message,
    run_traced,
)
from tracerforge.kernel import catalog_model
from tracerforge.match import compile_condition, run
from tracerforge.mediator import run_session
from tracerforge.patterns import format_pattern, parse_pattern, parse_patterns, typecheck_pattern
from tracerforge.trace_model import AttributeKey, Port
from tracerforge.wire import decode_event, frame_kind


_capture = None


@pytest.fixture(autouse=True)
def _expose_capture(capfd):
    global _capture
    _capture = capfd
    yield
    _capture = None


def report(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    tail = f"  ({detail})" if detail else ""
    line = f"[acceptance] {criterion}: {status}{tail}\n"
    if _capture is not None:
        with _capture.disabled():
            sys.stdout.write(line)
            sys.stdout.flush()
    else:
        sys.__stdout__.write(line)
        sys.__stdout__.flush()


# -- 1: golden trace ---------------------------------------------------------


def test_1_golden_trace():
    t0 = time.monotonic()
    channel = CollectChannel()
    outcome, _ = run_traced(catalog_model("figtrace"),
                            default_trace_patterns(), channel)
    lines = [render_default_message(decode_event(l))
             for l in channel.lines if frame_kind(l) == "event"]
    expected = [
        "1 newVariable v1=[0-268435455]",
        "2 newVariable v2=[0-268435455]",
        "3 newConstraint c1 fd_element([v1,[2,5,7],v2])",
        "4 reduce c1 v1=[1,2,3] delta=[0,4-268435455]",
        "5 reduce c1 v2=[2,5,7] delta=[0-1,3-4,6,8-268435455]",
        "6 suspend c1",
        "7 newConstraint c4 x_eq_y([v2,v1])",
        "8 reduce c4 v2=[2] delta=[5,7]",
        "9 reduce c4 v1=[2] delta=[1,3]",
        "10 suspend c4",
        "11 awake c1",
        "12 reject c1",
    ]
    elapsed = time.monotonic() - t0
    ok = (lines[:12] == expected
          and outcome.solutions == [{"i": 1, "a": 2}]
          and elapsed < 1.0)
    report("1 golden trace", ok, f"{elapsed*1000:.0f}ms")
    assert lines[:12] == expected
    assert outcome.solutions == [{"i": 1, "a": 2}]
    assert elapsed < 1.0


# -- 2: match oracle ---------------------------------------------------------


def test_2_match_oracle():
    t0 = time.monotonic()
    events, _ = record_events(catalog_model("queens(6)"))
    mismatches = 0
    checked = 0
    for cond in random_conditions(seed=20260826, count=1000):
        auto = compile_condition(cond)
        oracle = compile_oracle(cond)
        for event in events:
            checked += 1
            if run(auto, event) != oracle(event):
                mismatches += 1
    elapsed = time.monotonic() - t0
    ok = mismatches == 0 and elapsed < 60.0
    report("2 match oracle", ok,
           f"{checked} checks, {mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60.0


# -- 3: online / post-hoc equivalence ---------------------------------------


def test_3_online_equals_post_hoc():
    model = catalog_model("queens(8)")
    # One run records everything; every pattern set is checked against that
    # same run so volatile attributes (usertime) agree exactly.
    events, _ = record_events(catalog_model("queens(8)"))

    sources = [VISU_PATTERNS] + [
        "\n".join(format_pattern(p) for p in pattern_set(name))
        for name in ("6b", "7b", "8b", "9b")
    ]
    ok = True
    details = []
    for i, source in enumerate(sources):
        patterns = parse_patterns(source)
        online = post_hoc_messages(events, patterns)  # replay over snapshots
        channel = CollectChannel()
        run_traced(model, patterns, channel)
        streamed = [decode_event(l) for l in channel.lines
                    if frame_kind(l) == "event"]

        def view(msgs):
            skip = (AttributeKey.usertime,)
            return [
                (m.chrono, m.labels,
                 tuple((k, v) for k, v in m.data if k not in skip))
                for m in msgs
            ]

        same = view(streamed) == view(online)
        ok = ok and same
        details.append(f"set{i}:{'=' if same else '!='}{len(online)}msgs")
        assert same, f"pattern source {i} diverged"
    report("3 online = post-hoc", ok, " ".join(details))
    assert ok


# -- 4: laziness -------------------------------------------------------------


def test_4_laziness():
    counts = []
    ports = []

    def observer(event):
        counts.append(event.computed_attribute_count())
        ports.append(event.port)

    run_traced(catalog_model("queens(4)"), (), observer=observer)
    zero_ok = all(c == 0 for c in counts)

    # Only pattern 1a active: lazy computations may happen at post events
    # only.  The observer runs before matching, so re-check counts post-run
    # via a second pass keyed by port.
    events = []
    run_traced(catalog_model("queens(4)"), pattern_set("1a"),
               observer=events.append)
    late_ok = all(
        e.computed_attribute_count() == 0
        for e in events if e.port is not Port.post
    )
    ok = zero_ok and late_ok
    report("4 laziness", ok,
           f"{len(counts)} events bare, {len(events)} with 1a")
    assert zero_ok
    assert late_ok


# -- 5 and 6: overhead shape and model fit -----------------------------------


@pytest.fixture(scope="module")
def overhead_reports():
    from tracerforge.bench import BENCH_PROGRAMS

    programs = list(BENCH_PROGRAMS)
    driver_patterns = pattern_set("5a")
    gcom_patterns = pattern_set("8b")
    return [
        measure_program(program, driver_patterns, gcom_patterns,
                        reps=5, solution_limit=limit)
        for program, limit in programs
    ]


def test_5_overhead_shape(overhead_reports):
    slack = 1.05
    order_ok = all(
        r.t_prog <= r.t_tracer * slack
        and r.t_tracer <= r.t_driver * slack
        and r.t_driver <= r.t_gcom * slack
        for r in overhead_reports
    )
    tracer_ok = all(r.r_tracer <= 2.0 for r in overhead_reports)

    # sigma: individual filtering costs of 1a..4a vs the combined set 5a
    program, limit = "queens(8)", None
    individual = []
    for name in ("1a", "2a", "3a", "4a"):
        rep = measure_program(program, pattern_set(name), (), reps=5,
                              solution_limit=limit)
        individual.append(rep.r_driver)
    combined = measure_program(program, pattern_set("5a"), (), reps=5,
                               solution_limit=limit).r_driver
    sigma_ok = sigma_check(individual, combined, tol=0.10)

    ok = order_ok and tracer_ok and sigma_ok
    rs = " ".join(f"{r.r_tracer:.2f}/{r.r_driver:.2f}/{r.r_gcom:.2f}"
                  for r in overhead_reports)
    report("5 overhead shape", ok,
           f"ratios {rs}; sigma {combined:.2f} vs {individual}")
    assert order_ok
    assert tracer_ok
    assert sigma_ok


def test_6_model_fit(overhead_reports):
    points = [(r.epsilon_ns, r.r_driver) for r in overhead_reports]
    fit = fit_model(points)
    ok = fit.r2 >= 0.8
    report("6 model fit", ok,
           f"r = {fit.a:.2f} + {fit.b:.0f}ns/eps, r2 = {fit.r2:.3f}")
    assert ok


# -- 7: filtered vs default trace size ---------------------------------------


def test_7_filtered_trace_size():
    program, limit = "queens(12)", 1
    filtered, _ = trace_bytes(program, pattern_set("8b"), limit)
    full, _ = trace_bytes(program, default_trace_patterns(), limit)
    ok = filtered <= full / 2
    report("7 filtered size", ok,
           f"{filtered} vs {full} bytes (x{full/max(filtered,1):.1f})")
    assert ok


# -- 8: grammar coverage -----------------------------------------------------


def test_8_grammar_coverage():
    from corpus import ALL_REFERENCE_SOURCES

    count = 0
    for src in ALL_REFERENCE_SOURCES:
        for p in parse_patterns(src):
            typecheck_pattern(p)
            assert parse_pattern(format_pattern(p)) == p
            count += 1
    report("8 grammar coverage", True, f"{count} patterns round-tripped")
    assert count >= 13


# -- 9: interactive semantics ------------------------------------------------


def test_9_interactive_semantics():
    # Session A: freeze on awake (chrono 11), skip_reductions stops at the
    # awoken constraint's own status event (12, reject c1), then at its
    # next status event (21, entail c1).
    patterns = parse_patterns(
        "stop: when port=awake dosynchro call(tracer_toplevel)")
    mediator_a, _, _ = run_session(
        catalog_model("figtrace"), patterns,
        console_script=["skipred", "go", "go"],
    )
    a_ok = mediator_a.freezes[:2] == [11, 12]

    # Session B: freeze at chrono 4, step twice -> freezes at 5 then 6.
    patterns = parse_patterns(
        "b: when chrono=4 dosynchro call(tracer_toplevel)")
    mediator_b, _, _ = run_session(
        catalog_model("figtrace"), patterns,
        console_script=["step", "step", "reset", "go"],
    )
    b_ok = mediator_b.freezes == [4, 5, 6]

    ok = a_ok and b_ok
    report("9 interactive semantics", ok,
           f"A freezes {mediator_a.freezes}, B freezes {mediator_b.freezes}")
    assert a_ok
    assert b_ok
