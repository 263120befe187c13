"""The tracer driver: the in-process, per-event side of the tracing protocol.

The solver hook increments the event clock, checks the per-port flags, and
only then builds an event object.  Matching events produce one message with
the union of the tagged patterns' requested attributes; a synchronous match
freezes the solver in a request/reply loop until the mediator sends go.
"""

from __future__ import annotations

import queue
import time
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .intset import render_domain
from .kernel import LiveAttributeProvider, Model, Solver, SolveOutcome, StopSearch
from .match import ActivePatternSet, MatchError, naive_eval, run
from .patterns import (
    CurrentAction,
    Leaf,
    Pattern,
    PatternError,
)
from .trace_model import (
    AttributeKey,
    AVAILABILITY,
    Port,
    TraceEvent,
    UnavailableAttributeError,
    default_trace_keys,
    replay_event,
)
from .wire import (
    AddReq,
    CurrentReq,
    GoReq,
    MalformedFrameError,
    RemoveReq,
    Reply,
    Request,
    ResetReq,
    TraceMessage,
    decode_request,
    encode_bye,
    encode_event,
    encode_hello,
    encode_reply,
)


class DriverError(Exception):
    pass


class NotFrozenError(DriverError):
    pass


class ChannelClosedError(DriverError):
    pass


_GO_LINE = b'{"kind":"request","op":"go"}\n'


class NullChannel:
    """Counts and discards outgoing frames; answers every freeze with go."""

    def __init__(self):
        self.bytes_sent = 0
        self.frames_sent = 0

    def send(self, line: bytes) -> None:
        self.bytes_sent += len(line)
        self.frames_sent += 1

    def receive(self) -> bytes:
        return _GO_LINE

    def close(self) -> None:
        pass


class CollectChannel(NullChannel):
    """NullChannel that also keeps every outgoing frame (for tests and replay)."""

    def __init__(self):
        super().__init__()
        self.lines: List[bytes] = []

    def send(self, line: bytes) -> None:
        super().send(line)
        self.lines.append(line)


class QueueChannel:
    """One endpoint of an in-process duplex link built from two queues."""

    def __init__(self, outbox: "queue.Queue", inbox: "queue.Queue"):
        self.outbox = outbox
        self.inbox = inbox
        self.bytes_sent = 0
        self.frames_sent = 0

    def send(self, line: bytes) -> None:
        self.bytes_sent += len(line)
        self.frames_sent += 1
        self.outbox.put(line)

    def receive(self) -> bytes:
        line = self.inbox.get()
        if line is None:
            raise ChannelClosedError("peer closed the channel")
        return line

    def close(self) -> None:
        self.outbox.put(None)


def queue_channel_pair(maxsize: int = 1024) -> Tuple[QueueChannel, QueueChannel]:
    """Bounded both ways: a slow consumer backpressures the solver thread."""
    a2b: "queue.Queue" = queue.Queue(maxsize)
    b2a: "queue.Queue" = queue.Queue(maxsize)
    return QueueChannel(a2b, b2a), QueueChannel(b2a, a2b)


class StreamChannel:
    """Channel over a binary (reader, writer) pair: pipe or socket file."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer
        self.bytes_sent = 0
        self.frames_sent = 0

    def send(self, line: bytes) -> None:
        self.bytes_sent += len(line)
        self.frames_sent += 1
        try:
            self.writer.write(line)
            self.writer.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ChannelClosedError(str(exc)) from None

    def receive(self) -> bytes:
        line = self.reader.readline()
        if not line:
            raise ChannelClosedError("end of stream")
        return line

    def close(self) -> None:
        try:
            self.writer.close()
        except Exception:
            pass


class TracerDriver:
    """Hook target for the solver plus the per-event matching algorithm."""

    def __init__(
        self,
        channel=None,
        patterns: Sequence[Pattern] = (),
        use_port_flags: bool = True,
        observer: Optional[Callable[[TraceEvent], None]] = None,
        program: str = "",
    ):
        self.channel = channel if channel is not None else NullChannel()
        self.active = ActivePatternSet()
        if patterns:
            self.active.add_patterns(list(patterns))
        self.use_port_flags = use_port_flags
        self.observer = observer
        self.program = program
        self.chrono = 0
        self.solver: Optional[Solver] = None
        self.frozen = False
        self.current_event: Optional[TraceEvent] = None
        self.messages_sent = 0
        self._t0 = 0

    def attach(self, solver: Solver) -> Solver:
        self.solver = solver
        solver.hook = self
        self._t0 = time.monotonic_ns()
        self.channel.send(encode_hello(self.program))
        return solver

    # The solver hook.  Flag check before any allocation: unflagged ports
    # cost one dict lookup and one comparison.
    def __call__(self, port: Port, specifics: dict) -> None:
        self.chrono += 1
        flagged = (not self.use_port_flags) or self.active.port_flags[port]
        if not flagged and self.observer is None and port is not Port.endOfTrace:
            return
        solver = self.solver
        event = TraceEvent(
            port,
            self.chrono,
            solver.depth,
            solver.node,
            time.monotonic_ns() - self._t0,
            LiveAttributeProvider(solver, specifics),
        )
        if self.observer is not None:
            self.observer(event)
        if flagged:
            self.on_event(event)
        if port is Port.endOfTrace:
            self.channel.send(encode_bye())

    def on_event(self, event: TraceEvent) -> None:
        tagged = [
            entry
            for entry in self.active.relevant(event.port)
            if run(entry.automaton, event)
        ]
        if not tagged:
            return
        msg = build_message([entry.pattern for entry in tagged], event)
        try:
            self.channel.send(encode_event(msg))
        except ChannelClosedError:
            raise StopSearch() from None
        self.messages_sent += 1
        if msg.sync:
            self._freeze(event)

    def _freeze(self, event: TraceEvent) -> None:
        self.frozen = True
        self.current_event = event
        try:
            while True:
                try:
                    line = self.channel.receive()
                except ChannelClosedError:
                    raise StopSearch() from None
                try:
                    request = decode_request(line)
                except MalformedFrameError as exc:
                    self.channel.send(encode_reply(Reply("error", reason=str(exc))))
                    continue
                if isinstance(request, GoReq):
                    return
                try:
                    reply = self.execute_request(request)
                except (MatchError, PatternError, DriverError) as exc:
                    reply = Reply("error", reason=str(exc))
                self.channel.send(encode_reply(reply))
        finally:
            self.frozen = False
            self.current_event = None

    def execute_request(self, request: Request) -> Reply:
        if isinstance(request, CurrentReq):
            if not self.frozen:
                raise NotFrozenError("current request outside a freeze")
            pairs: List[Tuple[AttributeKey, object]] = []
            unavailable: List[AttributeKey] = []
            for key in request.attrs:
                try:
                    pairs.append((key, self.current_event.attribute(key)))
                except UnavailableAttributeError:
                    unavailable.append(key)
            return Reply("ok", tuple(pairs), tuple(unavailable))
        if isinstance(request, AddReq):
            self.active.add_patterns(list(request.patterns))
            return Reply("ok")
        if isinstance(request, RemoveReq):
            self.active.remove_patterns(list(request.labels))
            return Reply("ok")
        if isinstance(request, ResetReq):
            self.active.reset()
            return Reply("ok")
        if isinstance(request, GoReq):
            raise NotFrozenError("go outside a freeze")
        raise DriverError(f"unknown request {request!r}")


def _message_value(event: TraceEvent, key: AttributeKey):
    try:
        return event.attribute(key)
    except UnavailableAttributeError:
        return None


def build_message(tagged: Sequence[Pattern], event: TraceEvent) -> TraceMessage:
    labels = tuple(p.label for p in tagged)
    sync = any(p.synchronous for p in tagged)
    keys: List[AttributeKey] = []
    for p in tagged:
        for key in p.current_keys():
            if key not in keys:
                keys.append(key)
    data = tuple((key, _message_value(event, key)) for key in keys)
    calls = tuple((p.label, proc) for p in tagged for proc in p.call_targets())
    return TraceMessage(event.chrono, sync, labels, data, calls)


def post_hoc_messages(
    events: Iterable[TraceEvent], patterns: Sequence[Pattern]
) -> List[TraceMessage]:
    """Filter a recorded trace with the same message-building rules as online."""
    out = []
    for event in events:
        tagged = [p for p in patterns if naive_eval(p.condition, event)]
        if tagged:
            out.append(build_message(tagged, event))
    return out


# ---------------------------------------------------------------------------
# Default trace


def default_trace_patterns() -> List[Pattern]:
    """One asynchronous pattern per port requesting its fixed attribute set."""
    return [
        Pattern(
            label=f"t_{port.name}",
            condition=Leaf(AttributeKey.port, "=", port),
            synchronous=False,
            actions=(CurrentAction(tuple((k, None) for k in default_trace_keys(port))),),
        )
        for port in Port
    ]


def render_default_message(msg: TraceMessage) -> str:
    """Human line for a default-trace message, e.g. ``4 reduce c1 v1=[1,2,3] delta=[...]``."""
    data = dict(msg.data)
    port = data[AttributeKey.port]
    parts = [str(msg.chrono), port.name]
    cstr = data.get(AttributeKey.cstr)
    if cstr is not None:
        parts.append(cstr)
    if port is Port.newConstraint:
        parts.append(data[AttributeKey.cstrRep])
    var = data.get(AttributeKey.var)
    if var is not None:
        parts.append(f"{var}=[{render_domain(data[AttributeKey.dom])}]")
    delta = data.get(AttributeKey.delta)
    if delta is not None:
        parts.append(f"delta=[{render_domain(delta)}]")
    if port in (Port.newChild, Port.jumpTo):
        parts.append(f"node{data[AttributeKey.node]}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Convenience runners


def run_traced(
    model: Model,
    patterns: Sequence[Pattern] = (),
    channel=None,
    solution_limit: Optional[int] = None,
    use_port_flags: bool = True,
    observer: Optional[Callable[[TraceEvent], None]] = None,
    program: str = "",
) -> Tuple[SolveOutcome, TracerDriver]:
    driver = TracerDriver(
        channel=channel,
        patterns=patterns,
        use_port_flags=use_port_flags,
        observer=observer,
        program=program,
    )
    solver = Solver(model, solution_limit=solution_limit)
    driver.attach(solver)
    outcome = solver.solve()
    return outcome, driver


def record_events(
    model: Model, solution_limit: Optional[int] = None
) -> Tuple[List[TraceEvent], SolveOutcome]:
    """Record every event as a replayable snapshot with all attributes captured.

    The returned events are detached from the solver: each one carries the
    values of every attribute available at its port.
    """
    recorded: List[TraceEvent] = []

    def observer(event: TraceEvent) -> None:
        data: Dict[AttributeKey, object] = {}
        for key, ports in AVAILABILITY.items():
            if key.name in ("port", "chrono", "depth", "node", "usertime"):
                continue
            if event.port in ports:
                data[key] = event.attribute(key)
        recorded.append(
            replay_event(event.port, event.chrono, event.depth, event.node,
                         event.usertime, data)
        )

    outcome, _driver = run_traced(model, observer=observer, solution_limit=solution_limit)
    return recorded, outcome
