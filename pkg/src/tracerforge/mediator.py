"""The analyzer mediator: consumes trace messages, runs analyzer handlers,
and centralizes requests back to the driver.

Each matched label is dispatched with its own pattern's data slice.  For a
synchronous message the mediator sends exactly one go, after every handler
has returned; handlers may issue current/add/remove/reset requests through
the sync context while the solver is frozen.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .driver import (
    ChannelClosedError,
    TracerDriver,
    queue_channel_pair,
    run_traced,
)
from .kernel import Model, SolveOutcome
from .patterns import Pattern, parse_pattern
from .trace_model import AttributeKey, Port
from .wire import (
    AddReq,
    CurrentReq,
    GoReq,
    RemoveReq,
    Reply,
    Request,
    ResetReq,
    TraceMessage,
    decode_event,
    decode_reply,
    encode_request,
    frame_kind,
)


def _render_value(value) -> str:
    from .intset import IntSet

    if isinstance(value, Port):
        return value.name
    if isinstance(value, IntSet):
        return value.interval_str()
    if isinstance(value, tuple):
        return " ".join(f"{k}:{v}" for k, v in value)
    return str(value)


class MediatorError(Exception):
    pass


class DuplicateNameError(MediatorError):
    def __init__(self, name: str):
        super().__init__(f"handler already registered: {name!r}")
        self.name = name


# ---------------------------------------------------------------------------
# Search tree model


@dataclass
class TreeNode:
    label: int
    depth: int
    kind: str                        # choice | solution | failure
    usertime: int = 0
    parent: Optional[int] = None
    children: List[int] = field(default_factory=list)
    reduce_count: int = 0
    awake_count: int = 0


class SearchTreeModel:
    """Mirror of the search tree built from newChild/jumpTo/solution/failure."""

    def __init__(self):
        root = TreeNode(label=0, depth=0, kind="choice")
        self.nodes: Dict[int, TreeNode] = {0: root}
        self.path: List[int] = [0]   # node labels from root to current

    def observe(self, port: Port, node: int, depth: int, usertime: int = 0) -> None:
        if port is Port.newChild:
            parent = self.path[depth - 1]
            child = TreeNode(label=node, depth=depth, kind="choice",
                             usertime=usertime, parent=parent)
            if node in self.nodes:
                raise MediatorError(f"duplicate tree node {node}")
            self.nodes[node] = child
            self.nodes[parent].children.append(node)
            del self.path[depth:]
            self.path.append(node)
        elif port is Port.jumpTo:
            while self.path and self.path[-1] != node:
                self.path.pop()
            if not self.path:
                raise MediatorError(f"jump to unknown node {node}")
        elif port in (Port.solution, Port.failure):
            self.nodes[node].kind = port.name
            self.nodes[node].usertime = usertime

    def note_reduce(self) -> None:
        for label in self.path:
            self.nodes[label].reduce_count += 1

    def note_awake(self) -> None:
        for label in self.path:
            self.nodes[label].awake_count += 1

    def leaves(self) -> List[TreeNode]:
        return [n for n in self.nodes.values() if not n.children and n.label != 0]

    def solution_leaves(self) -> List[TreeNode]:
        return [n for n in self.leaves() if n.kind == "solution"]

    def check(self) -> None:
        for node in self.nodes.values():
            if node.parent is not None:
                assert node.depth == self.nodes[node.parent].depth + 1
            for child in node.children:
                assert self.nodes[child].parent == node.label

    def render(self) -> str:
        lines: List[str] = []

        def walk(label: int) -> None:
            node = self.nodes[label]
            deco = ""
            if node.reduce_count or node.awake_count:
                deco = f" [r={node.reduce_count} a={node.awake_count}]"
            lines.append("  " * node.depth + f"n{node.label} {node.kind}{deco}")
            for child in node.children:
                walk(child)

        walk(0)
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Sync context


class SyncContext:
    """Request capability handed to handlers during a synchronous dispatch."""

    def __init__(self, mediator: "Mediator"):
        self.mediator = mediator
        self.closed = False

    def request(self, request: Request) -> Reply:
        if self.closed:
            raise MediatorError("sync context used outside its dispatch")
        channel = self.mediator.channel
        channel.send(encode_request(request))
        if isinstance(request, GoReq):
            return Reply("ok")
        line = channel.receive()
        if frame_kind(line) != "reply":
            raise MediatorError("expected a reply frame while frozen")
        return decode_reply(line)

    def current(self, *attrs: AttributeKey) -> Reply:
        return self.request(CurrentReq(tuple(attrs)))


Handler = Callable[[str, Dict[AttributeKey, object], Optional[SyncContext]], None]


class Mediator:
    def __init__(
        self,
        channel,
        patterns: Sequence[Pattern] = (),
        console_input: Optional[Callable[[], Optional[str]]] = None,
        console_output: Optional[Callable[[str], None]] = None,
        frame_tap: Optional[Callable[[bytes], None]] = None,
    ):
        self.channel = channel
        self.patterns: Dict[str, Pattern] = {p.label: p for p in patterns}
        self.console_input = console_input
        self.console_output = console_output or (lambda text: None)
        self.frame_tap = frame_tap
        self.handlers: Dict[str, Handler] = {}
        self.tree = SearchTreeModel()
        self.constraint_table: Dict[str, Tuple[str, object]] = {}
        self.propag_counters: Dict[Tuple[str, str], int] = {}
        self.leaf_notes: List[Tuple[Port, int, int]] = []
        self.symbolic_log: List[int] = []
        self.freezes: List[int] = []     # chrono of each synchronous message
        self.go_sent = 0
        self.messages: List[TraceMessage] = []
        self.last_message: Optional[TraceMessage] = None
        self.warnings: List[str] = []
        self._register_builtins()

    # -- registry -----------------------------------------------------------

    def register_handler(self, name: str, handler: Handler) -> None:
        if name in self.handlers:
            raise DuplicateNameError(name)
        self.handlers[name] = handler

    def _register_builtins(self) -> None:
        self.register_handler("search_tree", self._h_search_tree)
        self.register_handler("new_cstr", self._h_new_cstr)
        self.register_handler("spy_propag", self._h_spy_propag)
        self.register_handler("new_leaf", self._h_new_leaf)
        self.register_handler("symbolic_monitor", self._h_symbolic_monitor)
        self.register_handler("tracer_toplevel", self._h_tracer_toplevel)

    # -- main loop ----------------------------------------------------------

    def serve(self) -> None:
        while True:
            try:
                line = self.channel.receive()
            except ChannelClosedError:
                return
            if self.frame_tap is not None:
                self.frame_tap(line)
            kind = frame_kind(line)
            if kind == "hello":
                continue
            if kind == "bye":
                return
            if kind == "event":
                self.dispatch(decode_event(line))

    def dispatch(self, msg: TraceMessage) -> None:
        self.messages.append(msg)
        self.last_message = msg
        ctx: Optional[SyncContext] = None
        if msg.sync:
            self.freezes.append(msg.chrono)
            ctx = SyncContext(self)
        data = dict(msg.data)
        try:
            for label in msg.labels:
                pattern = self.patterns.get(label)
                if pattern is not None:
                    keys = pattern.current_keys()
                    data_slice = {k: data[k] for k in keys if k in data}
                else:
                    data_slice = dict(data)
                for call_label, proc in msg.calls:
                    if call_label != label:
                        continue
                    handler = self.handlers.get(proc)
                    if handler is None:
                        self.warnings.append(f"no handler for {proc!r} (pattern {label})")
                        continue
                    handler(label, data_slice, ctx)
        finally:
            if msg.sync:
                self.channel.send(encode_request(GoReq()))
                self.go_sent += 1
                ctx.closed = True
        self.tree.check()

    # -- built-in analyzers --------------------------------------------------

    def _h_search_tree(self, label, data, ctx) -> None:
        self.tree.observe(
            data[AttributeKey.port],
            data[AttributeKey.node],
            data[AttributeKey.depth],
            data.get(AttributeKey.usertime, 0),
        )

    def _h_new_cstr(self, label, data, ctx) -> None:
        self.constraint_table[data[AttributeKey.cstr]] = (
            data.get(AttributeKey.cstrRep),
            data.get(AttributeKey.varC),
        )

    def _h_spy_propag(self, label, data, ctx) -> None:
        key = (data[AttributeKey.cstr], data[AttributeKey.var])
        self.propag_counters[key] = self.propag_counters.get(key, 0) + 1
        self.tree.note_reduce()

    def _h_new_leaf(self, label, data, ctx) -> None:
        self.leaf_notes.append(
            (data[AttributeKey.port], data[AttributeKey.node], data[AttributeKey.depth])
        )

    def _h_symbolic_monitor(self, label, data, ctx) -> None:
        self.symbolic_log.append(self.last_message.chrono)

    # -- interactive command layer -------------------------------------------

    def _mirror_reset(self) -> None:
        self.patterns.clear()

    def _mirror_add(self, patterns: Sequence[Pattern]) -> None:
        for p in patterns:
            self.patterns[p.label] = p

    def cmd_step(self, ctx: SyncContext) -> None:
        """Stop at the very next event."""
        ctx.request(ResetReq())
        self._mirror_reset()
        p = parse_pattern("step: when true dosynchro call(tracer_toplevel)")
        ctx.request(AddReq((p,)))
        self._mirror_add([p])

    def cmd_skip_reductions(self, ctx: SyncContext) -> None:
        """From an awake, run to the awoken constraint's own status event."""
        reply = ctx.current(AttributeKey.cstr, AttributeKey.port)
        values = dict(reply.pairs)
        port = values.get(AttributeKey.port)
        cid = values.get(AttributeKey.cstr)
        if port is Port.awake and cid is not None:
            ctx.request(ResetReq())
            self._mirror_reset()
            p = parse_pattern(
                f"sr: when cstr = '{cid}' and port in [suspend,reject,entail] "
                "dosynchro call(tracer_toplevel)"
            )
            ctx.request(AddReq((p,)))
            self._mirror_add([p])
        else:
            self.cmd_step(ctx)

    def _h_tracer_toplevel(self, label, data, ctx) -> None:
        if ctx is None:
            self.warnings.append("tracer_toplevel called without a freeze")
            return
        while True:
            line = self.console_input() if self.console_input else None
            if line is None:
                line = "go"
            line = line.strip()
            if not line:
                continue
            words = line.split()
            cmd, rest = words[0], words[1:]
            try:
                if cmd == "go":
                    return
                if cmd == "step":
                    self.cmd_step(ctx)
                    return
                if cmd == "skipred":
                    self.cmd_skip_reductions(ctx)
                    return
                if cmd == "reset":
                    ctx.request(ResetReq())
                    self._mirror_reset()
                elif cmd == "current":
                    names = " ".join(rest).replace(",", " ").split()
                    attrs = tuple(AttributeKey(n) for n in names)
                    reply = ctx.request(CurrentReq(attrs))
                    for key, value in reply.pairs:
                        self.console_output(f"{key.value} = {_render_value(value)}")
                    for key in reply.unavailable:
                        self.console_output(f"{key.value} unavailable")
                elif cmd == "add":
                    p = parse_pattern(line[len("add"):].strip())
                    reply = ctx.request(AddReq((p,)))
                    if reply.status == "ok":
                        self._mirror_add([p])
                    else:
                        self.console_output(f"error: {reply.reason}")
                elif cmd == "remove":
                    labels = tuple(" ".join(rest).replace(",", " ").split())
                    reply = ctx.request(RemoveReq(labels))
                    if reply.status == "ok":
                        for l in labels:
                            self.patterns.pop(l, None)
                    else:
                        self.console_output(f"error: {reply.reason}")
                elif cmd == "tree":
                    self.console_output(self.tree.render())
                elif cmd == "stats":
                    self.console_output(
                        f"messages={len(self.messages)} freezes={len(self.freezes)} "
                        f"go={self.go_sent} propag={sum(self.propag_counters.values())}"
                    )
                else:
                    self.console_output(f"unknown command: {cmd}")
            except Exception as exc:
                self.console_output(f"error: {exc}")


# ---------------------------------------------------------------------------
# In-process sessions (mediator on a background thread)


def run_session(
    model: Model,
    patterns: Sequence[Pattern],
    console_script: Sequence[str] = (),
    solution_limit: Optional[int] = None,
    console_output: Optional[Callable[[str], None]] = None,
    console_input: Optional[Callable[[], Optional[str]]] = None,
    frame_tap: Optional[Callable[[bytes], None]] = None,
    program: str = "",
) -> Tuple[Mediator, SolveOutcome, TracerDriver]:
    """Run a traced execution with an in-process mediator; returns all parties."""
    driver_channel, mediator_channel = queue_channel_pair()
    if console_input is None:
        script = iter(console_script)

        def console_input() -> Optional[str]:
            return next(script, None)

    mediator = Mediator(
        mediator_channel,
        patterns=patterns,
        console_input=console_input,
        console_output=console_output,
        frame_tap=frame_tap,
    )
    thread = threading.Thread(target=mediator.serve, daemon=True)
    thread.start()
    try:
        outcome, driver = run_traced(
            model, patterns=patterns, channel=driver_channel,
            solution_limit=solution_limit, program=program,
        )
    finally:
        driver_channel.close()
        thread.join(timeout=30)
    if thread.is_alive():
        raise MediatorError("mediator did not shut down")
    return mediator, outcome, driver
