"""Event-pattern language: parser, type checker and pretty-printer.

A pattern looks like::

    visu_prop:
      when port = reduce and isNamed(var)
           and (not cstrType='assign')
           and delta notcontains [maxInt]
      do current(cstr=C and var=V),
         call spy_propag(C,V)

Condition precedence is ``not`` > ``and`` > ``or``; parentheses group.
``do`` marks an asynchronous pattern, ``do_synchro`` (also written
``dosynchro``) a synchronous one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from .intset import MAX_INT
from .trace_model import (
    AttributeKey,
    KIND,
    Kind,
    Port,
    UnknownPortError,
    attribute_of_name,
    port_of_name,
)


class PatternError(Exception):
    pass


class PatternSyntaxError(PatternError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class PatternTypeError(PatternError):
    def __init__(self, attr: AttributeKey, op: str, reason: str):
        super().__init__(f"{attr.name} {op}: {reason}")
        self.attr = attr
        self.op = op


# ---------------------------------------------------------------------------
# Literals and condition AST


@dataclass(frozen=True)
class Placeholder:
    """Capitalized metavariable in a condition, e.g. ``cstr = CId``.

    Placeholders parse and typecheck but never match a concrete value; the
    mediator substitutes them with values before activating a pattern.
    """

    name: str


Literal = Union[int, str, Port, Placeholder, Tuple]


@dataclass(frozen=True)
class TrueCond:
    pass


@dataclass(frozen=True)
class Leaf:
    attr: AttributeKey
    op: str
    value: Literal


@dataclass(frozen=True)
class Named:
    """The one unary operator: ``isNamed(attr)``."""

    attr: AttributeKey


@dataclass(frozen=True)
class Not:
    operand: "Condition"


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Or:
    left: "Condition"
    right: "Condition"


Condition = Union[TrueCond, Leaf, Named, Not, And, Or]


@dataclass(frozen=True)
class CurrentAction:
    # (attribute, optional binder name); binders feed handler argument order.
    items: Tuple[Tuple[AttributeKey, Optional[str]], ...]


@dataclass(frozen=True)
class CallAction:
    procedure: str
    args: Tuple[str, ...] = ()


Action = Union[CurrentAction, CallAction]


@dataclass(frozen=True)
class Pattern:
    label: str
    condition: Condition
    synchronous: bool
    actions: Tuple[Action, ...]

    def current_keys(self) -> Tuple[AttributeKey, ...]:
        keys: List[AttributeKey] = []
        for action in self.actions:
            if isinstance(action, CurrentAction):
                for key, _binder in action.items:
                    if key not in keys:
                        keys.append(key)
        return tuple(keys)

    def call_targets(self) -> Tuple[str, ...]:
        return tuple(a.procedure for a in self.actions if isinstance(a, CallAction))


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<str>'[^']*')
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\\=|>=|=<|<|>|=|\(|\)|\[|\]|,|:|\.)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"when", "do", "do_synchro", "dosynchro", "and", "or", "not", "in",
             "notin", "contains", "notcontains", "isNamed", "true", "current",
             "call", "maxInt"}

INT_OPS = ("<", ">", "=", "\\=", ">=", "=<", "in", "notin")
PORT_OPS = ("=", "\\=", "in", "notin")
TEXT_OPS = ("=", "\\=", "in", "notin")
SET_OPS = ("contains", "notcontains")

OPS_BY_KIND = {
    Kind.INT: frozenset(INT_OPS),
    Kind.PORT: frozenset(PORT_OPS),
    Kind.TEXT: frozenset(TEXT_OPS),
    Kind.INTSET: frozenset(SET_OPS),
    Kind.ASSOC: frozenset(),
}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> List[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise PatternSyntaxError(line, col, f"unexpected character {src[pos]!r}")
        text = m.group(0)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str) -> PatternSyntaxError:
        tok = self.peek()
        return PatternSyntaxError(tok.line, tok.col, message)

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise PatternSyntaxError(tok.line, tok.col, f"expected {text!r}, got {tok.text!r}")
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    # pattern := [label ':'] 'when' condition synchro action_list ['.']
    def parse_pattern(self, default_label: Optional[str] = None) -> Pattern:
        if self.peek().kind == "name" and self.tokens[self.i + 1].text == ":":
            label = self.next().text
            self.expect(":")
        elif default_label is not None:
            label = default_label
        else:
            tok = self.peek()
            raise PatternSyntaxError(tok.line, tok.col, "expected pattern label")
        self.expect("when")
        cond = self.parse_or()
        mode_tok = self.next()
        if mode_tok.text == "do":
            synchronous = False
        elif mode_tok.text in ("do_synchro", "dosynchro"):
            synchronous = True
        else:
            raise PatternSyntaxError(
                mode_tok.line, mode_tok.col, f"expected do or do_synchro, got {mode_tok.text!r}"
            )
        actions = [self.parse_action()]
        while self.eat(","):
            actions.append(self.parse_action())
        self.eat(".")
        return Pattern(label, cond, synchronous, tuple(actions))

    def parse_or(self) -> Condition:
        left = self.parse_and()
        while self.eat("or"):
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Condition:
        left = self.parse_not()
        while self.eat("and"):
            left = And(left, self.parse_not())
        return left

    def parse_not(self) -> Condition:
        if self.eat("not"):
            return Not(self.parse_not())
        if self.eat("("):
            cond = self.parse_or()
            self.expect(")")
            return cond
        return self.parse_condition()

    def parse_condition(self) -> Condition:
        tok = self.next()
        if tok.text == "true":
            return TrueCond()
        if tok.text == "isNamed":
            self.expect("(")
            attr = self._attr(self.next())
            self.expect(")")
            return Named(attr)
        if tok.kind != "name":
            raise PatternSyntaxError(tok.line, tok.col, f"expected condition, got {tok.text!r}")
        attr = self._attr(tok)
        op_tok = self.next()
        if op_tok.text not in ("<", ">", "=", "\\=", ">=", "=<", "in", "notin",
                              "contains", "notcontains"):
            raise PatternSyntaxError(
                op_tok.line, op_tok.col, f"expected comparison operator, got {op_tok.text!r}"
            )
        value = self.parse_value(attr)
        return Leaf(attr, op_tok.text, value)

    def _attr(self, tok: _Token) -> AttributeKey:
        if tok.kind != "name":
            raise PatternSyntaxError(tok.line, tok.col, f"expected attribute, got {tok.text!r}")
        try:
            return attribute_of_name(tok.text)
        except Exception:
            raise PatternSyntaxError(tok.line, tok.col, f"unknown attribute {tok.text!r}") from None

    def parse_value(self, attr: AttributeKey) -> Literal:
        if self.eat("["):
            items = []
            if not self.at("]"):
                items.append(self.parse_scalar(attr))
                while self.eat(","):
                    items.append(self.parse_scalar(attr))
            self.expect("]")
            return tuple(items)
        return self.parse_scalar(attr)

    def parse_scalar(self, attr: AttributeKey) -> Literal:
        tok = self.next()
        if tok.kind == "num":
            return int(tok.text)
        if tok.text == "maxInt":
            return MAX_INT
        if tok.kind == "str":
            return tok.text[1:-1]
        if tok.kind == "name":
            if tok.text[0].isupper():
                return Placeholder(tok.text)
            if KIND[attr] is Kind.PORT:
                try:
                    return port_of_name(tok.text)
                except UnknownPortError:
                    raise PatternSyntaxError(
                        tok.line, tok.col, f"unknown port name {tok.text!r}"
                    ) from None
            return tok.text
        raise PatternSyntaxError(tok.line, tok.col, f"expected value, got {tok.text!r}")

    # action := current(...) | call name[(args)] | call(name)
    def parse_action(self) -> Action:
        tok = self.next()
        if tok.text == "current":
            self.expect("(")
            items = [self.parse_current_item()]
            while self.eat(",") or self.eat("and"):
                items.append(self.parse_current_item())
            self.expect(")")
            return CurrentAction(tuple(items))
        if tok.text == "call":
            if self.eat("("):
                name_tok = self.next()
                if name_tok.kind != "name":
                    raise PatternSyntaxError(name_tok.line, name_tok.col, "expected procedure name")
                args = self._call_args()
                self.expect(")")
                return CallAction(name_tok.text, args)
            name_tok = self.next()
            if name_tok.kind != "name":
                raise PatternSyntaxError(name_tok.line, name_tok.col, "expected procedure name")
            args: Tuple[str, ...] = ()
            if self.eat("("):
                args = self._call_args()
                self.expect(")")
            return CallAction(name_tok.text, args)
        raise PatternSyntaxError(tok.line, tok.col, f"expected action, got {tok.text!r}")

    def _call_args(self) -> Tuple[str, ...]:
        args = []
        if self.peek().kind == "name":
            args.append(self.next().text)
            while self.eat(","):
                args.append(self.next().text)
        return tuple(args)

    def parse_current_item(self) -> Tuple[AttributeKey, Optional[str]]:
        attr = self._attr(self.next())
        # function-style attribute: varC(cstr)
        if attr is AttributeKey.varC and self.eat("("):
            inner = self.next()
            if inner.text != "cstr":
                raise PatternSyntaxError(inner.line, inner.col, "varC applies to cstr")
            self.expect(")")
        binder = None
        if self.eat("="):
            tok = self.next()
            if tok.kind != "name":
                raise PatternSyntaxError(tok.line, tok.col, "expected binder name")
            binder = tok.text
        return (attr, binder)


def parse_pattern(src: str, default_label: Optional[str] = None) -> Pattern:
    parser = _Parser(src)
    pattern = parser.parse_pattern(default_label)
    tok = parser.peek()
    if tok.kind != "eof":
        raise PatternSyntaxError(tok.line, tok.col, f"trailing input {tok.text!r}")
    return pattern


def parse_patterns(src: str) -> List[Pattern]:
    """Parse a pattern file; unlabeled rules get labels p1, p2, ..."""
    parser = _Parser(src)
    out = []
    while parser.peek().kind != "eof":
        out.append(parser.parse_pattern(f"p{len(out) + 1}"))
    return out


# ---------------------------------------------------------------------------
# Type checking


def typecheck(cond: Condition) -> None:
    """Reject leaves whose (attribute kind, operator) pair is not in the table."""
    if isinstance(cond, TrueCond):
        return
    if isinstance(cond, Named):
        if KIND[cond.attr] is not Kind.TEXT:
            raise PatternTypeError(cond.attr, "isNamed", "isNamed applies to text attributes")
        return
    if isinstance(cond, Leaf):
        kind = KIND[cond.attr]
        if cond.op not in OPS_BY_KIND[kind]:
            raise PatternTypeError(
                cond.attr, cond.op, f"operator not valid for {kind.value} attribute"
            )
        _check_literal(cond)
        return
    if isinstance(cond, Not):
        typecheck(cond.operand)
        return
    if isinstance(cond, (And, Or)):
        typecheck(cond.left)
        typecheck(cond.right)
        return
    raise TypeError(f"not a condition: {cond!r}")


def _check_literal(leaf: Leaf) -> None:
    kind = KIND[leaf.attr]
    list_expected = leaf.op in ("in", "notin", "contains", "notcontains")
    is_list = isinstance(leaf.value, tuple)
    if list_expected and not is_list:
        raise PatternTypeError(leaf.attr, leaf.op, "operator needs a list value")
    if not list_expected and is_list:
        raise PatternTypeError(leaf.attr, leaf.op, "operator takes a scalar value")
    scalars = leaf.value if is_list else (leaf.value,)
    for v in scalars:
        if isinstance(v, Placeholder):
            continue
        if kind is Kind.PORT and not isinstance(v, Port):
            raise PatternTypeError(leaf.attr, leaf.op, f"expected a port value, got {v!r}")
        if kind is Kind.INT and not isinstance(v, int):
            raise PatternTypeError(leaf.attr, leaf.op, f"expected an integer, got {v!r}")
        if kind is Kind.TEXT and not isinstance(v, str):
            raise PatternTypeError(leaf.attr, leaf.op, f"expected text, got {v!r}")
        if kind is Kind.INTSET and not isinstance(v, int):
            raise PatternTypeError(leaf.attr, leaf.op, f"domain test expects integers, got {v!r}")


def typecheck_pattern(p: Pattern) -> None:
    if not p.label:
        raise PatternError("pattern label must be non-empty")
    if not p.actions:
        raise PatternError(f"{p.label}: pattern needs at least one action")
    for action in p.actions:
        if isinstance(action, CurrentAction) and not action.items:
            raise PatternError(f"{p.label}: empty current() list")
    typecheck(p.condition)


# ---------------------------------------------------------------------------
# Pretty-printer (canonical form; parse(format(p)) is structurally p)


def _format_scalar(v: Literal) -> str:
    if isinstance(v, Port):
        return v.name
    if isinstance(v, Placeholder):
        return v.name
    if isinstance(v, int):
        return str(v)
    return f"'{v}'"


def _format_value(v: Literal) -> str:
    if isinstance(v, tuple):
        return "[" + ", ".join(_format_scalar(x) for x in v) + "]"
    return _format_scalar(v)


def _format_cond(cond: Condition, parent: str = "top", side: str = "left") -> str:
    if isinstance(cond, TrueCond):
        return "true"
    if isinstance(cond, Named):
        return f"isNamed({cond.attr.value})"
    if isinstance(cond, Leaf):
        return f"{cond.attr.value} {cond.op} {_format_value(cond.value)}"
    if isinstance(cond, Not):
        return f"not {_format_cond(cond.operand, 'not')}"
    if isinstance(cond, And):
        text = (f"{_format_cond(cond.left, 'and', 'left')} and "
                f"{_format_cond(cond.right, 'and', 'right')}")
        # parenthesize where left-associative re-parsing would regroup
        if parent == "not" or (parent == "and" and side == "right"):
            return f"({text})"
        return text
    if isinstance(cond, Or):
        text = (f"{_format_cond(cond.left, 'or', 'left')} or "
                f"{_format_cond(cond.right, 'or', 'right')}")
        if parent in ("and", "not") or (parent == "or" and side == "right"):
            return f"({text})"
        return text
    raise TypeError(f"not a condition: {cond!r}")


def _format_action(action: Action) -> str:
    if isinstance(action, CurrentAction):
        parts = []
        for key, binder in action.items:
            name = "varC(cstr)" if key is AttributeKey.varC else key.value
            parts.append(f"{name}={binder}" if binder else name)
        return "current(" + ", ".join(parts) + ")"
    if action.args:
        return f"call {action.procedure}(" + ",".join(action.args) + ")"
    return f"call {action.procedure}"


def format_pattern(p: Pattern) -> str:
    mode = "do_synchro" if p.synchronous else "do"
    actions = ", ".join(_format_action(a) for a in p.actions)
    return f"{p.label}: when {_format_cond(p.condition)} {mode} {actions}"


def format_patterns(ps: List[Pattern]) -> str:
    return "\n\n".join(format_pattern(p) for p in ps)
