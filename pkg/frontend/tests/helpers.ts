/** Fake transport speaking liguard-proto/1 for driving the client in tests. */

import { ConfigTree, Transport } from "../src/protocol.js";

export class FakeTransport implements Transport {
  sent: { id: number; cmd: string; args: Record<string, unknown> }[] = [];
  private handler: ((data: string | ArrayBuffer) => void) | null = null;

  send(text: string): void {
    this.sent.push(JSON.parse(text));
  }

  close(): void {}

  onMessage(cb: (data: string | ArrayBuffer) => void): void {
    this.handler = cb;
  }

  push(data: string | ArrayBuffer): void {
    this.handler?.(data);
  }

  pushJson(obj: unknown): void {
    this.push(JSON.stringify(obj));
  }

  lastRequest() {
    return this.sent[this.sent.length - 1];
  }

  respond(ok: boolean, payload?: unknown, error?: string): void {
    const req = this.lastRequest();
    this.pushJson({ id: req.id, ok, payload, error });
  }
}

export function sampleConfig(): ConfigTree {
  return {
    data: { main_dir: "/data", pcd_type: ".pcd", replay_hz: 10.0, lidar_enabled: true },
    proc: {
      pre: {},
      lidar: {
        crop: {
          enabled: false, priority: 20,
          min_x: -100.0, max_x: 100.0, min_y: -100.0, max_y: 100.0,
          min_z: -10.0, max_z: 10.0,
        },
        dbscan: { enabled: false, priority: 50, eps: 0.7, min_points: 5 },
      },
      camera: {},
      calib: {},
      label: {},
      post: {},
    },
    visualization: { point_size: 2.0, max_points: 200000 },
    logging: { level: "info", path: "logs" },
  };
}

export function frameEventJson(index: number, binaryCount: number, overrides = {}) {
  return {
    type: "frame",
    payload: {
      index,
      stem: String(index).padStart(6, "0"),
      timestamp: index / 10,
      point_count: 100,
      sent_points: 100,
      labels: [],
      logs: [],
      points_ref: binaryCount > 0 ? 0 : null,
      colors_ref: binaryCount > 1 ? 1 : null,
      image_ref: null,
      binary_count: binaryCount,
      ...overrides,
    },
  };
}
