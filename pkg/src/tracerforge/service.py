"""HTTP/WebSocket service wrapping the tracer.

REST endpoints cover the stateless operations (catalog, pattern checking,
one-shot runs); the WebSocket endpoint bridges a live debugging session:
wire frames flow to the client verbatim, console commands flow back.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
from typing import List, Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .bench import PATTERN_SETS, pattern_set
from .driver import CollectChannel, default_trace_patterns, run_traced
from .kernel import CATALOG_PROGRAMS, KernelError, catalog_model
from .mediator import run_session
from .patterns import (
    PatternError,
    format_pattern,
    parse_patterns,
    typecheck_pattern,
)
from .wire import decode_event, frame_kind
from .driver import render_default_message


class ParseRequest(BaseModel):
    source: str


class ParseResponse(BaseModel):
    patterns: List[str]


class RunRequest(BaseModel):
    program: str
    patterns_source: Optional[str] = None
    patterns_set: Optional[str] = None
    limit: Optional[int] = None
    render: bool = False


class RunResponse(BaseModel):
    events: int
    messages: int
    bytes: int
    solutions: List[dict]
    nodes: int
    failures: int
    rendered: List[str] = []


def _resolve_patterns(req: RunRequest):
    if req.patterns_source:
        patterns = parse_patterns(req.patterns_source)
        for p in patterns:
            typecheck_pattern(p)
        return patterns
    if req.patterns_set:
        return pattern_set(req.patterns_set)
    return None


def create_app() -> FastAPI:
    app = FastAPI(title="tracerforge")

    @app.get("/programs")
    def programs() -> dict:
        return {"programs": list(CATALOG_PROGRAMS),
                "pattern_sets": sorted(PATTERN_SETS) + ["5a"]}

    @app.post("/parse", response_model=ParseResponse)
    def parse(req: ParseRequest) -> ParseResponse:
        try:
            patterns = parse_patterns(req.source)
            for p in patterns:
                typecheck_pattern(p)
        except PatternError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return ParseResponse(patterns=[format_pattern(p) for p in patterns])

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        try:
            model = catalog_model(req.program)
            patterns = _resolve_patterns(req)
        except (KernelError, PatternError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        channel = CollectChannel()
        pats = patterns if patterns is not None else default_trace_patterns()
        outcome, driver = run_traced(model, patterns=pats, channel=channel,
                                     solution_limit=req.limit, program=req.program)
        rendered: List[str] = []
        if req.render and patterns is None:
            rendered = [
                render_default_message(decode_event(line))
                for line in channel.lines
                if frame_kind(line) == "event"
            ]
        return RunResponse(
            events=driver.chrono,
            messages=driver.messages_sent,
            bytes=channel.bytes_sent,
            solutions=outcome.solutions,
            nodes=outcome.nodes,
            failures=outcome.failures,
            rendered=rendered,
        )

    @app.websocket("/session")
    async def session(ws: WebSocket) -> None:
        await ws.accept()
        start = json.loads(await ws.receive_text())
        try:
            model = catalog_model(start["program"])
            patterns = parse_patterns(start.get("patterns", ""))
            for p in patterns:
                typecheck_pattern(p)
        except (KeyError, KernelError, PatternError) as exc:
            await ws.send_text(json.dumps({"kind": "error", "reason": str(exc)}))
            await ws.close()
            return

        outbox: "queue.Queue" = queue.Queue()
        commands: "queue.Queue" = queue.Queue()

        def console_input() -> Optional[str]:
            try:
                return commands.get(timeout=600)
            except queue.Empty:
                return None

        def console_output(text: str) -> None:
            outbox.put(json.dumps({"kind": "console", "text": text}))

        def frame_tap(line: bytes) -> None:
            outbox.put(line.decode("utf-8").rstrip("\n"))

        def work() -> None:
            try:
                _mediator, outcome, _driver = run_session(
                    model, patterns,
                    solution_limit=start.get("limit"),
                    console_output=console_output,
                    console_input=console_input,
                    frame_tap=frame_tap,
                    program=start["program"],
                )
                outbox.put(json.dumps({
                    "kind": "done",
                    "solutions": outcome.solutions,
                    "nodes": outcome.nodes,
                    "failures": outcome.failures,
                }))
            except Exception as exc:  # surfaced to the client, not the server log
                outbox.put(json.dumps({"kind": "error", "reason": str(exc)}))
            finally:
                outbox.put(None)

        thread = threading.Thread(target=work, daemon=True)
        thread.start()
        loop = asyncio.get_event_loop()

        async def pump_out() -> None:
            while True:
                item = await loop.run_in_executor(None, outbox.get)
                if item is None:
                    break
                await ws.send_text(item)

        async def pump_in() -> None:
            while True:
                text = await ws.receive_text()
                obj = json.loads(text)
                if obj.get("kind") == "command":
                    commands.put(obj.get("line", "go"))

        out_task = asyncio.ensure_future(pump_out())
        in_task = asyncio.ensure_future(pump_in())
        try:
            await out_task
        except WebSocketDisconnect:
            pass
        finally:
            in_task.cancel()
            commands.put("go")
            try:
                await ws.close()
            except Exception:
                pass

    return app


app = create_app()
