/**
 * WebSocket client for a live debugging session.  The socket is injected
 * as a minimal interface so tests can drive the client without a network.
 */

import { commandForButton, Button, encodeCommand, encodeStart, parseFrame } from "./protocol.js";
import { applyCommand, applyFrame, newSession, UiSession } from "./session.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface StartOptions {
  program: string;
  patterns: string;
  limit?: number;
}

export class DebuggerClient {
  readonly session: UiSession;
  private socket: SocketLike | null = null;

  constructor(
    private readonly factory: SocketFactory,
    private readonly onChange: (session: UiSession) => void = () => {},
  ) {
    this.session = newSession();
  }

  connect(endpoint: string, start: StartOptions): void {
    const socket = this.factory(endpoint);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(encodeStart(start.program, start.patterns, start.limit));
    };
    socket.onmessage = (ev) => {
      applyFrame(this.session, parseFrame(ev.data));
      this.onChange(this.session);
    };
    socket.onclose = () => {
      if (this.session.connection !== "error") this.session.connection = "closed";
      this.onChange(this.session);
    };
    socket.onerror = () => {
      this.session.connection = "error";
      this.onChange(this.session);
    };
  }

  /** Send one mediator console command line (only legal while frozen). */
  command(line: string): void {
    if (this.socket === null) throw new Error("not connected");
    this.socket.send(encodeCommand(line));
    applyCommand(this.session, line);
    this.onChange(this.session);
  }

  press(button: Button, patternSource?: string): void {
    this.command(commandForButton(button, patternSource));
  }

  disconnect(): void {
    this.socket?.close();
  }
}
