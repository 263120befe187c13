"""Ports, trace events and the lazy, memoized per-event attribute cache."""

from __future__ import annotations

import enum
from typing import Callable, Dict, Optional, Tuple

from .intset import IntSet


class Port(enum.IntEnum):
    """The 14 event types, split into control and propagation events."""

    newVariable = 0
    newConstraint = 1
    post = 2
    newChild = 3
    jumpTo = 4
    solution = 5
    failure = 6
    reduce = 7
    suspend = 8
    entail = 9
    reject = 10
    schedule = 11
    awake = 12
    endOfTrace = 13


ALL_PORTS = frozenset(Port)
N_PORTS = len(Port)

# Alternative spellings accepted on the pattern-language surface.
PORT_ALIASES = {
    "choicePoint": Port.newChild,
    "backTo": Port.jumpTo,
}


class TraceError(Exception):
    pass


class UnknownPortError(TraceError):
    def __init__(self, name: str):
        super().__init__(f"unknown port name: {name!r}")
        self.name = name


class UnavailableAttributeError(TraceError):
    def __init__(self, key: "AttributeKey", port: Port):
        super().__init__(f"attribute {key.name} is not available at port {port.name}")
        self.key = key
        self.port = port


def port_of_name(name: str) -> Port:
    try:
        return Port[name]
    except KeyError:
        pass
    try:
        return PORT_ALIASES[name]
    except KeyError:
        raise UnknownPortError(name) from None


class Kind(enum.Enum):
    INT = "integer"
    TEXT = "text"
    PORT = "port"
    INTSET = "intset"
    ASSOC = "assoc"


class AttributeKey(enum.Enum):
    port = "port"
    chrono = "chrono"
    depth = "depth"
    node = "node"
    usertime = "usertime"
    vident = "vident"
    vname = "vname"
    var = "var"
    cident = "cident"
    cname = "cname"
    cstr = "cstr"
    cstrRep = "cstrRep"
    cstrType = "cstrType"
    cinternal = "cinternal"
    delta = "delta"
    dom = "dom"
    full_dom = "full_dom"
    named_vars = "named_vars"
    varC = "varC"


def attribute_of_name(name: str) -> AttributeKey:
    try:
        return AttributeKey(name)
    except ValueError:
        raise TraceError(f"unknown attribute: {name!r}") from None


KIND: Dict[AttributeKey, Kind] = {
    AttributeKey.port: Kind.PORT,
    AttributeKey.chrono: Kind.INT,
    AttributeKey.depth: Kind.INT,
    AttributeKey.node: Kind.INT,
    AttributeKey.usertime: Kind.INT,
    AttributeKey.vident: Kind.INT,
    AttributeKey.vname: Kind.TEXT,
    AttributeKey.var: Kind.TEXT,
    AttributeKey.cident: Kind.INT,
    AttributeKey.cname: Kind.TEXT,
    AttributeKey.cstr: Kind.TEXT,
    AttributeKey.cstrRep: Kind.TEXT,
    AttributeKey.cstrType: Kind.TEXT,
    AttributeKey.cinternal: Kind.TEXT,
    AttributeKey.delta: Kind.INTSET,
    AttributeKey.dom: Kind.INTSET,
    AttributeKey.full_dom: Kind.INTSET,
    AttributeKey.named_vars: Kind.ASSOC,
    AttributeKey.varC: Kind.ASSOC,
}

# Common attributes are pre-materialized on every event; they never hit the
# lazy computation path and never increment the computed counter.
COMMON_KEYS = frozenset(
    {
        AttributeKey.port,
        AttributeKey.chrono,
        AttributeKey.depth,
        AttributeKey.node,
        AttributeKey.usertime,
    }
)

_VAR_PORTS = frozenset({Port.newVariable, Port.reduce, Port.schedule})
_CSTR_PORTS = frozenset(
    {
        Port.newConstraint,
        Port.post,
        Port.reduce,
        Port.suspend,
        Port.entail,
        Port.reject,
        Port.awake,
    }
)

AVAILABILITY: Dict[AttributeKey, frozenset] = {
    AttributeKey.port: ALL_PORTS,
    AttributeKey.chrono: ALL_PORTS,
    AttributeKey.depth: ALL_PORTS,
    AttributeKey.node: ALL_PORTS,
    AttributeKey.usertime: ALL_PORTS,
    AttributeKey.vident: _VAR_PORTS,
    AttributeKey.vname: _VAR_PORTS,
    AttributeKey.var: _VAR_PORTS,
    AttributeKey.cident: _CSTR_PORTS,
    AttributeKey.cname: _CSTR_PORTS,
    AttributeKey.cstr: _CSTR_PORTS,
    AttributeKey.cstrRep: _CSTR_PORTS,
    AttributeKey.cstrType: _CSTR_PORTS,
    AttributeKey.cinternal: _CSTR_PORTS,
    AttributeKey.delta: frozenset({Port.reduce}),
    AttributeKey.dom: _VAR_PORTS,
    AttributeKey.full_dom: ALL_PORTS,
    AttributeKey.named_vars: ALL_PORTS,
    AttributeKey.varC: _CSTR_PORTS,
}

# Heavyweight state dumps are excluded from the untargeted default trace.
DEFAULT_TRACE_EXCLUDED = frozenset({AttributeKey.full_dom, AttributeKey.named_vars})


def default_trace_keys(port: Port) -> Tuple[AttributeKey, ...]:
    """Fixed per-port attribute set of the default (untargeted) trace."""
    return tuple(
        key
        for key in AttributeKey
        if port in AVAILABILITY[key] and key not in DEFAULT_TRACE_EXCLUDED
    )


# A provider computes one non-common attribute for one event.  The live
# provider reads the solver state; the replay provider reads recorded data.
Provider = Callable[["TraceEvent", AttributeKey], object]


class TraceEvent:
    """One execution event; non-common attributes are computed on demand."""

    __slots__ = ("port", "chrono", "depth", "node", "usertime", "_provider", "_cache")

    def __init__(
        self,
        port: Port,
        chrono: int,
        depth: int,
        node: int,
        usertime: int,
        provider: Optional[Provider] = None,
    ):
        self.port = port
        self.chrono = chrono
        self.depth = depth
        self.node = node
        self.usertime = usertime
        self._provider = provider
        self._cache: Optional[Dict[AttributeKey, object]] = None

    def attribute(self, key: AttributeKey):
        if key is AttributeKey.port:
            return self.port
        if key is AttributeKey.chrono:
            return self.chrono
        if key is AttributeKey.depth:
            return self.depth
        if key is AttributeKey.node:
            return self.node
        if key is AttributeKey.usertime:
            return self.usertime
        if self.port not in AVAILABILITY[key]:
            raise UnavailableAttributeError(key, self.port)
        cache = self._cache
        if cache is None:
            cache = self._cache = {}
        elif key in cache:
            return cache[key]
        if self._provider is None:
            raise UnavailableAttributeError(key, self.port)
        value = self._provider(self, key)
        cache[key] = value
        return value

    def computed_attribute_count(self) -> int:
        return 0 if self._cache is None else len(self._cache)

    def __repr__(self) -> str:
        return f"<event {self.chrono} {self.port.name}>"


class ReplayProvider:
    """Attribute provider backed by a recorded (decoded) attribute mapping."""

    __slots__ = ("data",)

    def __init__(self, data: Dict[AttributeKey, object]):
        self.data = data

    def __call__(self, event: TraceEvent, key: AttributeKey):
        try:
            return self.data[key]
        except KeyError:
            raise UnavailableAttributeError(key, event.port) from None


def replay_event(
    port: Port,
    chrono: int,
    depth: int,
    node: int,
    usertime: int,
    data: Dict[AttributeKey, object],
) -> TraceEvent:
    return TraceEvent(port, chrono, depth, node, usertime, ReplayProvider(data))
