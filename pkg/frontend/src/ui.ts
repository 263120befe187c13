/**
 * Page rendering.  All views are string renderers over the session state,
 * so they are testable without a DOM; main() wires them to the page.
 */

import { DebuggerClient, SocketLike } from "./client.js";
import { eventPanel, UiSession } from "./session.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

export function renderEventPanel(session: UiSession): string {
  const panel = eventPanel(session);
  if (panel === null) return "<p>no event yet</p>";
  const rows = [
    `<tr><th>chrono</th><td>${panel.chrono}</td></tr>`,
    `<tr><th>port</th><td>${panel.port ?? "–"}</td></tr>`,
    `<tr><th>node</th><td>${panel.node ?? "–"}</td></tr>`,
    `<tr><th>depth</th><td>${panel.depth ?? "–"}</td></tr>`,
  ];
  for (const [key, value] of panel.extra) {
    rows.push(`<tr><th>${escapeHtml(key)}</th><td>${escapeHtml(String(value))}</td></tr>`);
  }
  const state = panel.sync ? " (frozen)" : "";
  return `<h3>event${state}</h3><table>${rows.join("")}</table>`
    + `<p>labels: ${panel.labels.map(escapeHtml).join(", ")}</p>`;
}

export function renderTreeView(session: UiSession): string {
  const solved = session.tree.solutionLeaves().length;
  return `<pre>${escapeHtml(session.tree.render())}</pre>`
    + `<p>${session.tree.nodeCount()} nodes, ${solved} solution leaves</p>`;
}

export function renderConsole(session: UiSession): string {
  return `<pre>${session.consoleLines.map(escapeHtml).join("\n")}</pre>`;
}

export function renderStatus(session: UiSession): string {
  if (session.error !== null) return `error: ${escapeHtml(session.error)}`;
  if (session.done) {
    const n = session.solutions?.length ?? 0;
    return `done: ${n} solutions, ${session.nodes} nodes, ${session.failures} failures`;
  }
  if (session.frozen) return "frozen — use Step / Skip Reductions / Continue";
  return session.connection;
}

export function main(): void {
  const doc = document;
  const byId = (id: string) => doc.getElementById(id)!;
  const client = new DebuggerClient(
    (url) => new WebSocket(url) as unknown as SocketLike,
    (session) => {
      byId("event").innerHTML = renderEventPanel(session);
      byId("tree").innerHTML = renderTreeView(session);
      byId("console").innerHTML = renderConsole(session);
      byId("status").textContent = renderStatus(session);
    },
  );
  byId("connect").onclick = () => {
    const program = (byId("program") as HTMLInputElement).value;
    const patterns = (byId("patterns") as HTMLTextAreaElement).value;
    client.connect(`ws://${location.host}/session`, { program, patterns });
  };
  byId("step").onclick = () => client.press("step");
  byId("skipred").onclick = () => client.press("skipReductions");
  byId("continue").onclick = () => client.press("continue");
  byId("stop-at").onclick = () => {
    const source = (byId("stop-pattern") as HTMLInputElement).value;
    client.press("stopAtPattern", source);
  };
  byId("command").onkeydown = (ev: KeyboardEvent) => {
    if (ev.key === "Enter") {
      const input = byId("command") as HTMLInputElement;
      client.command(input.value);
      input.value = "";
    }
  };
}

if (typeof document !== "undefined" && document.getElementById("event") !== null) {
  main();
}
