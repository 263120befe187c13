import { readFileSync } from "node:fs";

import { Frame, parseFrame } from "../src/protocol.js";

export function loadFixture(name: string): Frame[] {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return readFileSync(url, "utf-8")
    .split("\n")
    .filter((line) => line.trim() !== "")
    .map(parseFrame);
}
