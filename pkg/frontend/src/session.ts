/**
 * Mirrors the server session: config tree, latest frame, log ring,
 * playback state. Edits render optimistically but the server's config
 * events always win; a rejected patch restores the prior value and
 * surfaces the reason in the log.
 */

import {
  ConfigTree,
  FrameEvent,
  PlaybackState,
  ProtocolClient,
} from "./protocol.js";
import { RingBuffer } from "./ring.js";

export type LogEntry = { level: string; source: string; message: string };

export const LOG_CAPACITY = 1000;

/** Read a dotted config path from the mirrored tree; undefined if absent. */
export function getAtPath(config: ConfigTree, path: string): unknown {
  const parts = path.split(".");
  let node: any = config;
  for (const part of parts) {
    if (node === null || typeof node !== "object" || !(part in node)) {
      return undefined;
    }
    node = node[part];
  }
  return node;
}

/** Write a dotted config path; returns false if the path does not exist. */
export function setAtPath(config: ConfigTree, path: string, value: unknown): boolean {
  const parts = path.split(".");
  let node: any = config;
  for (const part of parts.slice(0, -1)) {
    if (node === null || typeof node !== "object" || !(part in node)) {
      return false;
    }
    node = node[part];
  }
  const leaf = parts[parts.length - 1];
  if (node === null || typeof node !== "object" || !(leaf in node)) {
    return false;
  }
  node[leaf] = value;
  return true;
}

/**
 * Client-side type gate: a patch whose value cannot possibly be accepted
 * never leaves the browser. Mirrors the server's coercion rules.
 */
export function validateEdit(config: ConfigTree, path: string, value: unknown): string | null {
  const current = getAtPath(config, path);
  if (current === undefined) {
    return `unknown config path: ${path}`;
  }
  const leaf = path.split(".").pop()!;
  if (typeof current === "boolean") {
    return typeof value === "boolean" ? null : `${leaf} expects a boolean`;
  }
  if (typeof current === "number") {
    if (typeof value !== "number" || Number.isNaN(value)) {
      return `${leaf} expects a number`;
    }
    if ((leaf === "priority" || Number.isInteger(current)) && !Number.isInteger(value)) {
      return `${leaf} expects an integer`;
    }
    return null;
  }
  if (typeof current === "string") {
    return typeof value === "string" ? null : `${leaf} expects a string`;
  }
  if (Array.isArray(current)) {
    return Array.isArray(value) ? null : `${leaf} expects a list`;
  }
  return `${leaf} is not editable`;
}

export interface ViewOptions {
  pointSize: number;
  showBoxLabels: boolean;
  trailLength: number;
}

export class UiSession {
  config: ConfigTree | null = null;
  latestFrame: FrameEvent | null = null;
  playback: PlaybackState = { current: -1, playing: false, total: 0 };
  logs = new RingBuffer<LogEntry>(LOG_CAPACITY);
  connected = false;
  view: ViewOptions = { pointSize: 2, showBoxLabels: true, trailLength: 10 };

  private listeners: {
    config: Array<() => void>;
    frame: Array<() => void>;
    log: Array<() => void>;
    state: Array<() => void>;
  } = { config: [], frame: [], log: [], state: [] };

  constructor(private client: ProtocolClient) {
    client.on("config", (config) => {
      this.config = config; // server wins over any optimistic value
      this.emit("config");
    });
    client.on("frame", (event) => {
      this.latestFrame = event;
      for (const [level, source, message] of event.payload.logs) {
        this.logs.push({ level, source, message });
      }
      this.emit("frame");
      this.emit("log");
    });
    client.on("log", (entries) => {
      for (const [level, source, message] of entries) {
        this.logs.push({ level, source, message });
      }
      this.emit("log");
    });
    client.on("state", (state) => {
      this.playback = state;
      this.emit("state");
    });
  }

  onChange(kind: keyof UiSession["listeners"], cb: () => void): void {
    this.listeners[kind].push(cb);
  }

  private emit(kind: keyof UiSession["listeners"]): void {
    for (const cb of this.listeners[kind]) cb();
  }

  logLocal(level: string, source: string, message: string): void {
    this.logs.push({ level, source, message });
    this.emit("log");
  }

  /** Fetch the authoritative config (connect/reload path). */
  async refreshConfig(): Promise<void> {
    const response = await this.client.request("get_config");
    if (response.ok) {
      this.config = response.payload as ConfigTree;
      this.emit("config");
    }
  }

  /**
   * Optimistic parameter edit. Returns true when the server accepted it;
   * on rejection the previous value is restored and the reason logged.
   */
  async editParam(path: string, value: unknown): Promise<boolean> {
    if (this.config === null) {
      this.logLocal("error", "ui", "not connected: no config mirror yet");
      return false;
    }
    const problem = validateEdit(this.config, path, value);
    if (problem !== null) {
      this.logLocal("warning", "ui", `edit blocked: ${problem}`);
      return false;
    }
    const previous = getAtPath(this.config, path);
    setAtPath(this.config, path, value);
    this.emit("config");

    const response = await this.client.request("patch_config", { path, value });
    if (!response.ok) {
      setAtPath(this.config, path, previous);
      this.emit("config");
      this.logLocal("warning", "server", `patch rejected: ${response.error}`);
      return false;
    }
    return true;
  }

  async toggleFunction(category: string, name: string): Promise<boolean> {
    const current = getAtPath(this.config ?? ({} as ConfigTree),
                              `proc.${category}.${name}.enabled`);
    return this.editParam(`proc.${category}.${name}.enabled`, !(current as boolean));
  }

  play(): Promise<unknown> {
    return this.client.request("play");
  }

  pause(): Promise<unknown> {
    return this.client.request("pause");
  }

  step(): Promise<unknown> {
    return this.client.request("step");
  }

  seek(n: number): Promise<unknown> {
    return this.client.request("seek", { n });
  }
}
