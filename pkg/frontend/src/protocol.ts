/**
 * Wire protocol spoken over the /session WebSocket: one JSON object per
 * text message.  Frames flow server -> client; the only client -> server
 * message is a console command line, identical to what the mediator's
 * text console accepts.
 */

export interface HelloFrame {
  kind: "hello";
  version: number;
  program: string;
}

export interface EventFrame {
  kind: "event";
  chrono: number;
  sync: boolean;
  labels: string[];
  data: Record<string, unknown>;
  calls: [string, string][];
}

export interface ByeFrame {
  kind: "bye";
}

export interface ConsoleFrame {
  kind: "console";
  text: string;
}

export interface DoneFrame {
  kind: "done";
  solutions: Record<string, number>[];
  nodes: number;
  failures: number;
}

export interface ErrorFrame {
  kind: "error";
  reason: string;
}

export type Frame =
  | HelloFrame
  | EventFrame
  | ByeFrame
  | ConsoleFrame
  | DoneFrame
  | ErrorFrame;

const KINDS = new Set(["hello", "event", "bye", "console", "done", "error"]);

export class ProtocolError extends Error {}

export function parseFrame(line: string): Frame {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch {
    throw new ProtocolError(`not a JSON frame: ${line.slice(0, 80)}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("frame is not an object");
  }
  const kind = (obj as { kind?: unknown }).kind;
  if (typeof kind !== "string" || !KINDS.has(kind)) {
    throw new ProtocolError(`unknown frame kind: ${String(kind)}`);
  }
  if (kind === "event") {
    const e = obj as Partial<EventFrame>;
    if (typeof e.chrono !== "number" || typeof e.sync !== "boolean"
        || !Array.isArray(e.labels) || typeof e.data !== "object"
        || !Array.isArray(e.calls)) {
      throw new ProtocolError("malformed event frame");
    }
  }
  return obj as Frame;
}

/** Client -> server: one mediator console command line. */
export function encodeCommand(line: string): string {
  return JSON.stringify({ kind: "command", line });
}

/** Client -> server: the session-opening handshake. */
export function encodeStart(program: string, patterns: string, limit?: number): string {
  const start: Record<string, unknown> = { program, patterns };
  if (limit !== undefined) start.limit = limit;
  return JSON.stringify(start);
}

/**
 * Toolbar buttons map one-to-one onto mediator console commands; the UI
 * adds no protocol surface of its own.
 */
export type Button = "step" | "skipReductions" | "continue" | "stopAtPattern";

export function commandForButton(button: Button, patternSource?: string): string {
  switch (button) {
    case "step":
      return "step";
    case "skipReductions":
      return "skipred";
    case "continue":
      return "go";
    case "stopAtPattern":
      if (!patternSource) throw new ProtocolError("stopAtPattern needs a pattern");
      return `add ${patternSource}`;
  }
}

/** Commands that resume the frozen execution (as opposed to querying it). */
export function resumesExecution(command: string): boolean {
  const word = command.trim().split(/\s+/)[0];
  return word === "go" || word === "step" || word === "skipred";
}
