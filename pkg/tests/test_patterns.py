import random

import pytest

from corpus import ALL_REFERENCE_SOURCES, SKIP_PATTERN, VISU_PATTERNS
from oracles import random_conditions
from tracerforge.intset import MAX_INT
from tracerforge.patterns import (
    And,
    CallAction,
    CurrentAction,
    Leaf,
    Named,
    Not,
    Or,
    Pattern,
    PatternSyntaxError,
    PatternTypeError,
    Placeholder,
    TrueCond,
    format_pattern,
    format_patterns,
    parse_pattern,
    parse_patterns,
    typecheck,
    typecheck_pattern,
)
from tracerforge.trace_model import AttributeKey, Port


def test_parse_minimal():
    p = parse_pattern("r: when port=reduce do current(chrono,delta)")
    assert p.label == "r"
    assert p.condition == Leaf(AttributeKey.port, "=", Port.reduce)
    assert not p.synchronous
    assert p.current_keys() == (AttributeKey.chrono, AttributeKey.delta)


def test_parse_synchronous_spellings():
    assert parse_pattern("a: when true do_synchro call f").synchronous
    assert parse_pattern("a: when true dosynchro call f").synchronous
    assert not parse_pattern("a: when true do call f").synchronous


def test_trailing_dot_optional():
    assert parse_pattern("a: when true do call f.") == parse_pattern(
        "a: when true do call f"
    )


def test_unlabeled_needs_default():
    with pytest.raises(PatternSyntaxError):
        parse_pattern("when true do call f")
    p = parse_pattern("when true do call f", default_label="p1")
    assert p.label == "p1"


def test_precedence_not_and_or():
    p = parse_pattern("x: when not port=post and chrono=1 or depth=2 do call f")
    assert p.condition == Or(
        And(Not(Leaf(AttributeKey.port, "=", Port.post)),
            Leaf(AttributeKey.chrono, "=", 1)),
        Leaf(AttributeKey.depth, "=", 2),
    )


def test_parentheses_group():
    p = parse_pattern("x: when not (chrono=1 or depth=2) do call f")
    assert p.condition == Not(
        Or(Leaf(AttributeKey.chrono, "=", 1), Leaf(AttributeKey.depth, "=", 2))
    )


def test_port_aliases_in_lists():
    p = parse_pattern("x: when port in [choicePoint, backTo] do call f")
    assert p.condition.value == (Port.newChild, Port.jumpTo)


def test_max_int_literal():
    p = parse_pattern("x: when delta notcontains [maxInt] do call f")
    assert p.condition.value == (MAX_INT,)


def test_placeholders():
    p = parse_pattern(SKIP_PATTERN)
    leaf = p.condition.left
    assert leaf == Leaf(AttributeKey.cstr, "=", Placeholder("CId"))
    typecheck_pattern(p)  # placeholders typecheck anywhere


def test_quoted_text_and_is_named():
    p = parse_pattern("x: when cstrType='assign' and isNamed(vname) do call f")
    assert p.condition == And(
        Leaf(AttributeKey.cstrType, "=", "assign"), Named(AttributeKey.vname)
    )


def test_current_binders_and_varc():
    src = ("visu_cstr: when port = post "
           "do current(cstr=C and cstrRep=Rep and varC(cstr)=VarC), "
           "call new_cstr(C, Rep, VarC)")
    p = parse_pattern(src)
    current = p.actions[0]
    assert isinstance(current, CurrentAction)
    assert current.items == (
        (AttributeKey.cstr, "C"),
        (AttributeKey.cstrRep, "Rep"),
        (AttributeKey.varC, "VarC"),
    )
    assert p.actions[1] == CallAction("new_cstr", ("C", "Rep", "VarC"))


def test_call_syntaxes():
    assert parse_pattern("a: when true do call(f)").call_targets() == ("f",)
    assert parse_pattern("a: when true do call f").call_targets() == ("f",)
    assert parse_pattern("a: when true do call f(x,y)").actions[0].args == ("x", "y")


def test_syntax_error_position():
    with pytest.raises(PatternSyntaxError) as info:
        parse_pattern("a: when port == post do call f")
    assert info.value.line == 1
    assert info.value.col > 0


def test_unknown_attribute_and_port():
    with pytest.raises(PatternSyntaxError):
        parse_pattern("a: when frobnicate=1 do call f")
    with pytest.raises(PatternSyntaxError):
        parse_pattern("a: when port=warp do call f")


def test_reference_sources_parse_and_typecheck():
    for src in ALL_REFERENCE_SOURCES:
        for p in parse_patterns(src):
            typecheck_pattern(p)


def test_multi_pattern_file():
    patterns = parse_patterns(VISU_PATTERNS)
    assert [p.label for p in patterns] == [
        "visu_tree", "visu_cstr", "visu_prop", "leaf", "symbolic"
    ]
    assert [p.synchronous for p in patterns] == [False, False, False, True, True]


@pytest.mark.parametrize("src", [
    "a: when dom = 3 do call f",            # intset only supports contains ops
    "a: when chrono contains [1] do call f",  # contains needs an intset
    "a: when port > post do call f",        # ports are unordered
    "a: when vname < 'x' do call f",        # text is unordered
    "a: when isNamed(chrono) do call f",    # isNamed needs a text attribute
    "a: when varC = 'x' do call f",         # assoc attributes have no operators
])
def test_typecheck_rejections(src):
    with pytest.raises(PatternTypeError):
        typecheck_pattern(parse_pattern(src))


@pytest.mark.parametrize("src", [
    "a: when chrono in 3 do call f",        # in needs a list
    "a: when chrono = [3] do call f",       # = takes a scalar
    "a: when port = 'post' do call f",      # quoted text is not a port
])
def test_literal_shape_rejections(src):
    with pytest.raises(PatternTypeError):
        typecheck_pattern(parse_pattern(src))


def test_empty_current_rejected():
    p = Pattern("a", TrueCond(), False, (CurrentAction(()),))
    with pytest.raises(Exception):
        typecheck_pattern(p)


def test_format_round_trip_reference():
    for src in ALL_REFERENCE_SOURCES:
        for p in parse_patterns(src):
            assert parse_pattern(format_pattern(p)) == p


def test_format_round_trip_random_conditions():
    rng = random.Random(7)
    actions_pool = [
        (CallAction("f", ()),),
        (CurrentAction(((AttributeKey.chrono, None), (AttributeKey.port, "P"))),
         CallAction("g", ("P",))),
        (CurrentAction(((AttributeKey.varC, "V"),)),),
    ]
    for i, cond in enumerate(random_conditions(seed=99, count=300)):
        p = Pattern(f"p{i}", cond, bool(i % 2), rng.choice(actions_pool))
        assert parse_pattern(format_pattern(p)) == p


def test_format_patterns_joins():
    ps = parse_patterns(VISU_PATTERNS)
    text = format_patterns(ps)
    assert parse_patterns(text) == ps


def test_comments_ignored():
    p = parse_patterns("# leading note\na: when true do call f # tail\n")
    assert len(p) == 1
