"""Compilation of pattern conditions into short-circuit evaluation automata.

Each elementary condition becomes exactly one automaton state with a true
and a false transition; ``and``/``or``/``not`` are encoded purely in the
wiring of those transitions, so evaluating an event never tests a condition
twice and never touches an attribute that does not label a visited state.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

from .intset import IntSet
from .patterns import (
    And,
    Condition,
    Leaf,
    Named,
    Not,
    Or,
    Pattern,
    Placeholder,
    TrueCond,
)
from .trace_model import (
    ALL_PORTS,
    AttributeKey,
    N_PORTS,
    Port,
    TraceEvent,
    UnavailableAttributeError,
)

# Final states.
TRUE = -1
FALSE = -2


class MatchError(Exception):
    pass


class DuplicateLabelError(MatchError):
    def __init__(self, label: str):
        super().__init__(f"pattern label already active: {label!r}")
        self.label = label


class UnknownLabelError(MatchError):
    def __init__(self, label: str):
        super().__init__(f"no active pattern labeled {label!r}")
        self.label = label


@functools.lru_cache(maxsize=4096)
def _leaf_test(cond: Union[Leaf, Named]) -> Callable[[TraceEvent], bool]:
    """Closure evaluating one elementary condition on an event.

    An attribute that is not available at the event's port makes the
    condition false (and its negation true); so does a placeholder value.
    Conditions are immutable, so the closure is cached per condition.
    """
    if isinstance(cond, Named):
        attr = cond.attr

        def test_named(event: TraceEvent) -> bool:
            try:
                value = event.attribute(attr)
            except UnavailableAttributeError:
                return False
            return bool(value)

        return test_named

    attr, op, literal = cond.attr, cond.op, cond.value
    if isinstance(literal, Placeholder) or (
        isinstance(literal, tuple) and any(isinstance(v, Placeholder) for v in literal)
    ):
        return lambda event: False

    if op == "=":
        cmp = lambda v: v == literal
    elif op == "\\=":
        cmp = lambda v: v != literal
    elif op == "<":
        cmp = lambda v: v < literal
    elif op == ">":
        cmp = lambda v: v > literal
    elif op == ">=":
        cmp = lambda v: v >= literal
    elif op == "=<":
        cmp = lambda v: v <= literal
    elif op == "in":
        members = frozenset(literal)
        cmp = lambda v: v in members
    elif op == "notin":
        members = frozenset(literal)
        cmp = lambda v: v not in members
    elif op == "contains":
        values = tuple(literal)
        cmp = lambda v: v.contains_all(values)
    elif op == "notcontains":
        values = tuple(literal)
        cmp = lambda v: not v.contains_all(values)
    else:  # pragma: no cover - parser restricts operators
        raise MatchError(f"unknown operator {op!r}")

    def test_leaf(event: TraceEvent) -> bool:
        try:
            value = event.attribute(attr)
        except UnavailableAttributeError:
            return False
        return cmp(value)

    return test_leaf


@dataclass
class State:
    condition: Union[Leaf, Named]
    test: Callable[[TraceEvent], bool]
    on_true: int
    on_false: int


@dataclass
class Automaton:
    states: List[State]
    entry: int  # state index, or TRUE/FALSE for the trivial conditions


def compile_condition(cond: Condition) -> Automaton:
    """Standard short-circuit construction; one state per elementary condition."""
    states: List[State] = []

    def build(c: Condition, on_true: int, on_false: int) -> int:
        if isinstance(c, TrueCond):
            return on_true
        if isinstance(c, (Leaf, Named)):
            states.append(State(c, _leaf_test(c), on_true, on_false))
            return len(states) - 1
        if isinstance(c, Not):
            return build(c.operand, on_false, on_true)
        if isinstance(c, And):
            right = build(c.right, on_true, on_false)
            return build(c.left, right, on_false)
        if isinstance(c, Or):
            right = build(c.right, on_true, on_false)
            return build(c.left, on_true, right)
        raise TypeError(f"not a condition: {c!r}")

    entry = build(cond, TRUE, FALSE)
    return Automaton(states, entry)


def run(automaton: Automaton, event: TraceEvent) -> bool:
    state = automaton.entry
    states = automaton.states
    while state >= 0:
        s = states[state]
        state = s.on_true if s.test(event) else s.on_false
    return state == TRUE


def naive_eval(cond: Condition, event: TraceEvent) -> bool:
    """Direct recursive oracle; semantically equal to run(compile(cond), event)."""
    if isinstance(cond, TrueCond):
        return True
    if isinstance(cond, (Leaf, Named)):
        return _leaf_test(cond)(event)
    if isinstance(cond, Not):
        return not naive_eval(cond.operand, event)
    if isinstance(cond, And):
        return naive_eval(cond.left, event) and naive_eval(cond.right, event)
    if isinstance(cond, Or):
        return naive_eval(cond.left, event) or naive_eval(cond.right, event)
    raise TypeError(f"not a condition: {cond!r}")


# ---------------------------------------------------------------------------
# Port relevance (sound over-approximation of the ports a condition may hold on)


def _port_leaf_exact(leaf: Leaf) -> Optional[Set[Port]]:
    if leaf.attr is not AttributeKey.port:
        return None
    v = leaf.value
    if isinstance(v, Placeholder):
        return None
    if leaf.op == "=":
        return {v} if isinstance(v, Port) else set()
    if leaf.op == "\\=":
        return set(ALL_PORTS) - {v}
    members = {x for x in v if isinstance(x, Port)} if isinstance(v, tuple) else set()
    if any(isinstance(x, Placeholder) for x in (v if isinstance(v, tuple) else ())):
        return None
    if leaf.op == "in":
        return members
    if leaf.op == "notin":
        return set(ALL_PORTS) - members
    return None


def _relevance(cond: Condition) -> Tuple[Set[Port], Set[Port]]:
    """Returns (over, under) approximations of the satisfying port set."""
    every = set(ALL_PORTS)
    if isinstance(cond, TrueCond):
        return every, every
    if isinstance(cond, Named):
        return every, set()
    if isinstance(cond, Leaf):
        exact = _port_leaf_exact(cond)
        if exact is None:
            return every, set()
        return set(exact), set(exact)
    if isinstance(cond, Not):
        over, under = _relevance(cond.operand)
        return every - under, every - over
    if isinstance(cond, And):
        lo, lu = _relevance(cond.left)
        ro, ru = _relevance(cond.right)
        return lo & ro, lu & ru
    if isinstance(cond, Or):
        lo, lu = _relevance(cond.left)
        ro, ru = _relevance(cond.right)
        return lo | ro, lu | ru
    raise TypeError(f"not a condition: {cond!r}")


def port_relevance(cond: Condition) -> frozenset:
    over, _under = _relevance(cond)
    return frozenset(over)


# ---------------------------------------------------------------------------
# Active pattern set


@dataclass
class ActiveEntry:
    pattern: Pattern
    automaton: Automaton
    ports: frozenset


class ActivePatternSet:
    """Labeled patterns with compiled automata and per-port relevance flags."""

    def __init__(self):
        self.entries: Dict[str, ActiveEntry] = {}
        self.port_flags: List[bool] = [False] * N_PORTS
        self.port_index: List[List[str]] = [[] for _ in range(N_PORTS)]
        # Per-port entry lists in pattern insertion order, precomputed so the
        # per-event hot path is a single list lookup.
        self._relevant: List[List[ActiveEntry]] = [[] for _ in range(N_PORTS)]

    def add_patterns(self, patterns: Sequence[Pattern]) -> None:
        for p in patterns:
            if p.label in self.entries:
                raise DuplicateLabelError(p.label)
        seen = set()
        for p in patterns:
            if p.label in seen:
                raise DuplicateLabelError(p.label)
            seen.add(p.label)
        for p in patterns:
            entry = ActiveEntry(p, compile_condition(p.condition), port_relevance(p.condition))
            self.entries[p.label] = entry
            for port in entry.ports:
                self.port_index[port].append(p.label)
        self._refresh_flags()

    def remove_patterns(self, labels: Sequence[str]) -> None:
        for label in labels:
            if label not in self.entries:
                raise UnknownLabelError(label)
        for label in labels:
            entry = self.entries.pop(label)
            for port in entry.ports:
                self.port_index[port].remove(label)
        self._refresh_flags()

    def reset(self) -> None:
        self.entries.clear()
        for bucket in self.port_index:
            bucket.clear()
        self._refresh_flags()

    def _refresh_flags(self) -> None:
        for port in range(N_PORTS):
            bucket = set(self.port_index[port])
            self._relevant[port] = [
                e for label, e in self.entries.items() if label in bucket
            ]
            self.port_flags[port] = bool(bucket)

    def relevant(self, port: Port):
        """Active entries relevant to a port, in pattern insertion order."""
        return self._relevant[port]

    def labels(self) -> List[str]:
        return list(self.entries)

    def dump(self) -> str:
        """Render the ports-to-automata table as text; irrelevant ports are bare."""
        lines = []
        for port in Port:
            labels = [label for label in self.entries if label in self.port_index[port]]
            if labels:
                cells = []
                for label in labels:
                    entry = self.entries[label]
                    mode = "synchro" if entry.pattern.synchronous else "async"
                    n = len(entry.automaton.states)
                    cells.append(f"{label}[{n} state{'s' if n != 1 else ''}, {mode}]")
                lines.append(f"{port.name:<14} -> " + ", ".join(cells))
            else:
                lines.append(f"{port.name:<14} -")
        return "\n".join(lines)
