/**
 * UI session state: a pure function of the incoming frame stream plus the
 * commands the user has issued.  Nothing here talks to the network; the
 * client feeds frames in arrival order and re-renders after each change.
 */

import { EventFrame, Frame, resumesExecution } from "./protocol.js";
import { SearchTreeModel } from "./tree.js";

export type Connection = "connecting" | "open" | "closed" | "error";

export interface UiSession {
  connection: Connection;
  program: string | null;
  lastEvent: EventFrame | null;
  frozen: boolean;
  tree: SearchTreeModel;
  consoleLines: string[];
  commandHistory: string[];
  solutions: Record<string, number>[] | null;
  nodes: number;
  failures: number;
  error: string | null;
  done: boolean;
}

export function newSession(): UiSession {
  return {
    connection: "connecting",
    program: null,
    lastEvent: null,
    frozen: false,
    tree: new SearchTreeModel(),
    consoleLines: [],
    commandHistory: [],
    solutions: null,
    nodes: 0,
    failures: 0,
    error: null,
    done: false,
  };
}

function callsInclude(event: EventFrame, proc: string): boolean {
  return event.calls.some(([, p]) => p === proc);
}

export function applyFrame(session: UiSession, frame: Frame): UiSession {
  switch (frame.kind) {
    case "hello":
      session.connection = "open";
      session.program = frame.program;
      break;
    case "event":
      session.lastEvent = frame;
      if (frame.sync) session.frozen = true;
      if (callsInclude(frame, "search_tree")) {
        const { port, node, depth } = frame.data as {
          port: string; node: number; depth: number;
        };
        session.tree.observe(port, node, depth);
      }
      break;
    case "console":
      session.consoleLines.push(frame.text);
      break;
    case "done":
      session.solutions = frame.solutions;
      session.nodes = frame.nodes;
      session.failures = frame.failures;
      session.done = true;
      session.frozen = false;
      break;
    case "bye":
      session.frozen = false;
      break;
    case "error":
      session.error = frame.reason;
      session.connection = "error";
      break;
  }
  return session;
}

export function applyCommand(session: UiSession, line: string): UiSession {
  session.commandHistory.push(line);
  if (resumesExecution(line)) session.frozen = false;
  return session;
}

/** The fields the event panel always shows for the current event. */
export interface EventPanel {
  chrono: number;
  port: string | null;
  node: number | null;
  depth: number | null;
  sync: boolean;
  labels: string[];
  extra: [string, unknown][];
}

export function eventPanel(session: UiSession): EventPanel | null {
  const e = session.lastEvent;
  if (e === null) return null;
  const data = e.data;
  const shown = new Set(["port", "node", "depth"]);
  return {
    chrono: e.chrono,
    port: typeof data.port === "string" ? data.port : null,
    node: typeof data.node === "number" ? data.node : null,
    depth: typeof data.depth === "number" ? data.depth : null,
    sync: e.sync,
    labels: e.labels,
    extra: Object.entries(data).filter(([k]) => !shown.has(k)),
  };
}
