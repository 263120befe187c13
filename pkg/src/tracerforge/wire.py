"""Framing of trace messages and requests as newline-terminated JSON lines.

One frame is one UTF-8 line holding a single JSON object whose first field
is ``kind`` (hello, event, request, reply or bye).  Encoding is canonical:
fixed field order, compact separators, so identical payloads produce
identical bytes and round-trips are byte-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .intset import IntSet, parse_interval_str
from .patterns import Pattern, format_pattern, parse_pattern
from .trace_model import (
    KIND,
    AttributeKey,
    Kind,
    Port,
    attribute_of_name,
    port_of_name,
)


class WireError(Exception):
    pass


class MalformedFrameError(WireError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class TraceMessage:
    chrono: int
    sync: bool
    labels: Tuple[str, ...]
    # Ordered union of the tagged patterns' requested attributes, each once;
    # None marks an attribute unavailable at the event's port.
    data: Tuple[Tuple[AttributeKey, object], ...]
    calls: Tuple[Tuple[str, str], ...]  # (pattern label, procedure name)


@dataclass(frozen=True)
class CurrentReq:
    attrs: Tuple[AttributeKey, ...]


@dataclass(frozen=True)
class AddReq:
    patterns: Tuple[Pattern, ...]


@dataclass(frozen=True)
class RemoveReq:
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class ResetReq:
    pass


@dataclass(frozen=True)
class GoReq:
    pass


Request = Union[CurrentReq, AddReq, RemoveReq, ResetReq, GoReq]


@dataclass(frozen=True)
class Reply:
    status: str                      # "ok" | "error"
    pairs: Tuple[Tuple[AttributeKey, object], ...] = ()
    unavailable: Tuple[AttributeKey, ...] = ()
    reason: str = ""


def _encode_value(value) -> object:
    if value is None:
        return None
    if isinstance(value, Port):
        return value.name
    if isinstance(value, IntSet):
        return value.interval_str()
    if isinstance(value, tuple):  # assoc
        return [[k, v] for k, v in value]
    return value


def _decode_value(key: AttributeKey, raw) -> object:
    if raw is None:
        return None
    kind = KIND[key]
    try:
        if kind is Kind.PORT:
            return port_of_name(raw)
        if kind is Kind.INTSET:
            return parse_interval_str(raw)
        if kind is Kind.ASSOC:
            return tuple((k, v) for k, v in raw)
        if kind is Kind.INT:
            return int(raw)
        return str(raw)
    except Exception as exc:
        raise MalformedFrameError(f"bad {key.name} value {raw!r}: {exc}") from None


def _dump(obj: dict) -> bytes:
    return (json.dumps(obj, separators=(",", ":")) + "\n").encode("utf-8")


def _load(line: bytes) -> dict:
    try:
        obj = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedFrameError(str(exc)) from None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise MalformedFrameError("frame is not an object with a 'kind' field")
    return obj


def frame_kind(line: bytes) -> str:
    return _load(line)["kind"]


# -- events -----------------------------------------------------------------


def encode_event(m: TraceMessage) -> bytes:
    return _dump({
        "kind": "event",
        "chrono": m.chrono,
        "sync": m.sync,
        "labels": list(m.labels),
        "data": {key.value: _encode_value(v) for key, v in m.data},
        "calls": [[label, proc] for label, proc in m.calls],
    })


def decode_event(line: bytes) -> TraceMessage:
    obj = _load(line)
    if obj.get("kind") != "event":
        raise MalformedFrameError(f"not an event frame: {obj.get('kind')!r}")
    try:
        data = tuple(
            (attribute_of_name(name), _decode_value(attribute_of_name(name), raw))
            for name, raw in obj["data"].items()
        )
        return TraceMessage(
            chrono=int(obj["chrono"]),
            sync=bool(obj["sync"]),
            labels=tuple(obj["labels"]),
            data=data,
            calls=tuple((label, proc) for label, proc in obj["calls"]),
        )
    except MalformedFrameError:
        raise
    except Exception as exc:
        raise MalformedFrameError(f"bad event frame: {exc}") from None


# -- requests ---------------------------------------------------------------


def encode_request(r: Request) -> bytes:
    if isinstance(r, GoReq):
        return _dump({"kind": "request", "op": "go"})
    if isinstance(r, ResetReq):
        return _dump({"kind": "request", "op": "reset"})
    if isinstance(r, CurrentReq):
        return _dump({"kind": "request", "op": "current",
                      "attrs": [a.value for a in r.attrs]})
    if isinstance(r, RemoveReq):
        return _dump({"kind": "request", "op": "remove", "labels": list(r.labels)})
    if isinstance(r, AddReq):
        # Patterns travel as source text and are re-parsed on the driver side.
        return _dump({"kind": "request", "op": "add",
                      "patterns": [format_pattern(p) for p in r.patterns]})
    raise TypeError(f"not a request: {r!r}")


def decode_request(line: bytes) -> Request:
    obj = _load(line)
    if obj.get("kind") != "request":
        raise MalformedFrameError(f"not a request frame: {obj.get('kind')!r}")
    op = obj.get("op")
    try:
        if op == "go":
            return GoReq()
        if op == "reset":
            return ResetReq()
        if op == "current":
            attrs = tuple(attribute_of_name(a) for a in obj["attrs"])
            if not attrs:
                raise MalformedFrameError("empty current request")
            return CurrentReq(attrs)
        if op == "remove":
            return RemoveReq(tuple(obj["labels"]))
        if op == "add":
            return AddReq(tuple(parse_pattern(src) for src in obj["patterns"]))
    except MalformedFrameError:
        raise
    except Exception as exc:
        raise MalformedFrameError(f"bad {op} request: {exc}") from None
    raise MalformedFrameError(f"unknown request op {op!r}")


# -- replies / session frames ----------------------------------------------


def encode_reply(reply: Reply) -> bytes:
    obj: dict = {"kind": "reply", "status": reply.status}
    if reply.status == "error":
        obj["reason"] = reply.reason
    else:
        obj["pairs"] = [[key.value, _encode_value(v)] for key, v in reply.pairs]
        obj["unavailable"] = [key.value for key in reply.unavailable]
    return _dump(obj)


def decode_reply(line: bytes) -> Reply:
    obj = _load(line)
    if obj.get("kind") != "reply":
        raise MalformedFrameError(f"not a reply frame: {obj.get('kind')!r}")
    if obj.get("status") == "error":
        return Reply("error", reason=obj.get("reason", ""))
    try:
        pairs = tuple(
            (attribute_of_name(name), _decode_value(attribute_of_name(name), raw))
            for name, raw in obj.get("pairs", [])
        )
        unavailable = tuple(attribute_of_name(name) for name in obj.get("unavailable", []))
    except Exception as exc:
        raise MalformedFrameError(f"bad reply frame: {exc}") from None
    return Reply("ok", pairs=pairs, unavailable=unavailable)


def encode_hello(program: str = "") -> bytes:
    return _dump({"kind": "hello", "version": 1, "program": program})


def encode_bye() -> bytes:
    return _dump({"kind": "bye"})
