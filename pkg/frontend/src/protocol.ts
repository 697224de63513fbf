/**
 * liguard-proto/1 client: JSON text frames for requests/events, binary
 * frames for the attachments a frame event references (in order).
 */

export const PROTOCOL_VERSION = "liguard-proto/1";

export interface LabelSnapshot {
  class_name: string;
  box3d: { center: number[]; extent: number[]; yaw: number } | null;
  box2d: number[] | null;
  track_id: number | null;
  source: string;
  velocity: number[] | null;
  past_trajectory: number[][];
  future_trajectory: number[][];
}

export interface FrameSnapshot {
  index: number;
  stem: string;
  timestamp: number;
  point_count: number;
  sent_points: number;
  labels: LabelSnapshot[];
  logs: [string, string, string][];
  points_ref: number | null;
  colors_ref: number | null;
  image_ref: number | null;
  binary_count: number;
}

export interface FrameEvent {
  payload: FrameSnapshot;
  attachments: ArrayBuffer[];
}

export interface PlaybackState {
  current: number;
  playing: boolean;
  total: number;
}

export interface Response {
  id: number;
  ok: boolean;
  payload?: unknown;
  error?: string;
}

export type ConfigTree = {
  data: Record<string, unknown>;
  proc: Record<string, Record<string, Record<string, unknown>>>;
  visualization: Record<string, unknown>;
  logging: Record<string, unknown>;
};

/** Minimal transport so tests can fake the socket. */
export interface Transport {
  send(text: string): void;
  close(): void;
  onMessage(cb: (data: string | ArrayBuffer) => void): void;
}

export function pointsFromBuffer(buf: ArrayBuffer): Float32Array {
  return new Float32Array(buf);
}

export function colorsFromBuffer(buf: ArrayBuffer): Uint8Array {
  return new Uint8Array(buf);
}

interface Pending {
  resolve: (r: Response) => void;
  reject: (e: Error) => void;
}

export type EventHandlers = {
  hello?: (proto: string) => void;
  frame?: (event: FrameEvent) => void;
  log?: (entries: [string, string, string][]) => void;
  config?: (config: ConfigTree) => void;
  state?: (state: PlaybackState) => void;
};

/**
 * Pairs responses to request ids and reassembles frame events with the
 * binary frames that follow them.
 */
export class ProtocolClient {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private handlers: EventHandlers = {};
  private awaitingBinary: { payload: FrameSnapshot; blobs: ArrayBuffer[] } | null = null;
  proto: string | null = null;

  constructor(private transport: Transport) {
    transport.onMessage((data) => this.feed(data));
  }

  on<K extends keyof EventHandlers>(kind: K, handler: EventHandlers[K]): void {
    this.handlers[kind] = handler;
  }

  request(cmd: string, args: Record<string, unknown> = {}): Promise<Response> {
    const id = this.nextId++;
    const promise = new Promise<Response>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    this.transport.send(JSON.stringify({ id, cmd, args }));
    return promise;
  }

  /** Reject anything still in flight (socket closed underneath us). */
  abortPending(reason: string): void {
    for (const [, entry] of this.pending) {
      entry.reject(new Error(reason));
    }
    this.pending.clear();
  }

  private feed(data: string | ArrayBuffer): void {
    if (typeof data !== "string") {
      this.feedBinary(data);
      return;
    }
    const msg = JSON.parse(data);
    if (typeof msg.id === "number" && this.pending.has(msg.id)) {
      const entry = this.pending.get(msg.id)!;
      this.pending.delete(msg.id);
      entry.resolve(msg as Response);
      return;
    }
    switch (msg.type) {
      case "hello":
        this.proto = msg.proto;
        this.handlers.hello?.(msg.proto);
        break;
      case "frame": {
        const payload = msg.payload as FrameSnapshot;
        if (payload.binary_count > 0) {
          this.awaitingBinary = { payload, blobs: [] };
        } else {
          this.handlers.frame?.({ payload, attachments: [] });
        }
        break;
      }
      case "log":
        this.handlers.log?.(msg.payload);
        break;
      case "config":
        this.handlers.config?.(msg.payload);
        break;
      case "state":
        this.handlers.state?.(msg.payload);
        break;
    }
  }

  private feedBinary(blob: ArrayBuffer): void {
    if (this.awaitingBinary === null) {
      return; // stray binary frame; nothing references it
    }
    this.awaitingBinary.blobs.push(blob);
    if (this.awaitingBinary.blobs.length === this.awaitingBinary.payload.binary_count) {
      const done = this.awaitingBinary;
      this.awaitingBinary = null;
      this.handlers.frame?.({ payload: done.payload, attachments: done.blobs });
    }
  }
}
