import json

import pytest
from hypothesis import given, strategies as st

from tracerforge.driver import CollectChannel, run_traced
from tracerforge.intset import IntSet, MAX_INT
from tracerforge.kernel import catalog_model
from tracerforge.patterns import parse_pattern, parse_patterns
from tracerforge.trace_model import AttributeKey, Port
from tracerforge.wire import (
    AddReq,
    CurrentReq,
    GoReq,
    MalformedFrameError,
    RemoveReq,
    Reply,
    ResetReq,
    TraceMessage,
    decode_event,
    decode_reply,
    decode_request,
    encode_bye,
    encode_event,
    encode_hello,
    encode_reply,
    encode_request,
    frame_kind,
)


# -- golden frames ----------------------------------------------------------


def test_golden_event_frame():
    patterns = parse_patterns("r: when port=reduce do current(chrono,delta)")
    channel = CollectChannel()
    run_traced(catalog_model("figtrace"), patterns, channel)
    event_lines = [l for l in channel.lines if frame_kind(l) == "event"]
    assert event_lines[0] == (
        b'{"kind":"event","chrono":4,"sync":false,"labels":["r"],'
        b'"data":{"chrono":4,"delta":"0,4-268435455"},"calls":[]}\n'
    )


def test_hello_and_bye_frames():
    hello = encode_hello("figtrace")
    assert json.loads(hello) == {"kind": "hello", "version": 1,
                                 "program": "figtrace"}
    assert frame_kind(hello) == "hello"
    assert json.loads(encode_bye()) == {"kind": "bye"}


def test_go_frame():
    line = encode_request(GoReq())
    assert json.loads(line) == {"kind": "request", "op": "go"}
    assert isinstance(decode_request(line), GoReq)


def test_field_order_is_stable():
    msg = TraceMessage(chrono=7, sync=True, labels=("a",),
                       data=((AttributeKey.port, Port.suspend),),
                       calls=(("a", "f"),))
    keys = list(json.loads(encode_event(msg)))
    assert keys == ["kind", "chrono", "sync", "labels", "data", "calls"]


# -- value encodings --------------------------------------------------------


def test_value_encodings():
    msg = TraceMessage(
        chrono=1, sync=False, labels=("x",),
        data=(
            (AttributeKey.port, Port.newChild),
            (AttributeKey.dom, IntSet.from_values([0] + list(range(4, 9)))),
            (AttributeKey.vname, "q1"),
            (AttributeKey.depth, 3),
            (AttributeKey.varC, (("1", "v1"), ("2", "v2"))),
            (AttributeKey.delta, None),
        ),
        calls=(),
    )
    raw = json.loads(encode_event(msg))
    assert raw["data"]["port"] == "newChild"
    assert raw["data"]["dom"] == "0,4-8"
    assert raw["data"]["varC"] == [["1", "v1"], ["2", "v2"]]
    assert raw["data"]["delta"] is None
    assert decode_event(encode_event(msg)) == msg


@given(st.sets(st.integers(min_value=0, max_value=MAX_INT), max_size=12))
def test_intset_round_trip_via_frames(values):
    dom = IntSet.from_values(sorted(values)) if values else IntSet.empty()
    msg = TraceMessage(chrono=1, sync=False, labels=("x",),
                       data=((AttributeKey.dom, dom),), calls=())
    back = decode_event(encode_event(msg))
    assert dict(back.data)[AttributeKey.dom] == dom


# -- request/reply round trips ----------------------------------------------


@pytest.mark.parametrize("req", [
    GoReq(),
    ResetReq(),
    CurrentReq((AttributeKey.chrono, AttributeKey.delta)),
    RemoveReq(("a", "b")),
    AddReq((parse_pattern("x: when port=reduce do current(chrono)"),)),
])
def test_request_round_trip(req):
    assert decode_request(encode_request(req)) == req


@pytest.mark.parametrize("reply", [
    Reply(status="ok"),
    Reply(status="ok",
          pairs=((AttributeKey.chrono, 4),
                 (AttributeKey.delta, IntSet.from_values([2]))),
          unavailable=(AttributeKey.node,)),
    Reply(status="error", reason="not frozen"),
])
def test_reply_round_trip(reply):
    assert decode_reply(encode_reply(reply)) == reply


# -- malformed input --------------------------------------------------------


@pytest.mark.parametrize("raw", [
    b"not json at all\n",
    b'{"chrono": 1}\n',
    b'{"kind":"event","chrono":"x","sync":false,"labels":[],"data":{},"calls":[]}\n',
    b'{"kind":"event","chrono":1,"sync":false,"labels":[],'
    b'"data":{"nosuchattr":1},"calls":[]}\n',
    b'{"kind":"request","op":"frobnicate"}\n',
    b'{"kind":"request","op":"current","attrs":["nosuchattr"]}\n',
    b'{"kind":"request","op":"current","attrs":[]}\n',
    b'{"kind":"request","op":"add","patterns":["when when when"]}\n',
    b'{"kind":"reply","status":"ok","pairs":[["nosuchattr",1]]}\n',
])
def test_malformed_frames_raise(raw):
    with pytest.raises(MalformedFrameError):
        kind = frame_kind(raw)
        if kind == "event":
            decode_event(raw)
        elif kind == "request":
            decode_request(raw)
        elif kind == "reply":
            decode_reply(raw)
        else:
            raise MalformedFrameError("unknown kind")


def test_frames_are_single_lines():
    patterns = parse_patterns("r: when port=reduce do current(chrono,delta)")
    channel = CollectChannel()
    run_traced(catalog_model("queens(4)"), patterns, channel)
    for line in channel.lines:
        assert line.endswith(b"\n")
        assert line.count(b"\n") == 1
