/**
 * PointCloud Feed: Canvas2D renderer working directly on the binary
 * point/color buffers. Boxes are wireframes colored by source
 * (ground truth light, predictions dark); past trajectories draw as
 * polyline trails.
 */

import { OrbitCamera } from "./camera.js";
import { FrameEvent, LabelSnapshot, colorsFromBuffer, pointsFromBuffer } from "./protocol.js";
import { ViewOptions } from "./session.js";

export const SOURCE_COLORS: Record<string, string> = {
  ground_truth: "#9be89b", // light: dataset annotations
  lidar: "#1f4e9c",        // dark: pipeline predictions
  fused: "#8c1f1f",
  camera: "#6a3d9a",
  stub: "#b05a00",
};

export function sourceColor(source: string): string {
  return SOURCE_COLORS[source] ?? "#555555";
}

const BOX_EDGES: [number, number][] = [
  [0, 1], [0, 2], [1, 3], [2, 3],
  [4, 5], [4, 6], [5, 7], [6, 7],
  [0, 4], [1, 5], [2, 6], [3, 7],
];

export function boxCorners(box: { center: number[]; extent: number[]; yaw: number }): number[][] {
  const [l, w, h] = box.extent;
  const c = Math.cos(box.yaw);
  const s = Math.sin(box.yaw);
  const corners: number[][] = [];
  for (const sx of [1, -1]) {
    for (const sy of [1, -1]) {
      for (const sz of [1, -1]) {
        const lx = (sx * l) / 2;
        const ly = (sy * w) / 2;
        corners.push([
          box.center[0] + c * lx - s * ly,
          box.center[1] + s * lx + c * ly,
          box.center[2] + (sz * h) / 2,
        ]);
      }
    }
  }
  return corners;
}

export class PointCloudRenderer {
  camera = new OrbitCamera();

  constructor(private ctx: CanvasRenderingContext2D) {}

  render(frame: FrameEvent | null, view: ViewOptions): void {
    const { width, height } = this.ctx.canvas;
    this.ctx.fillStyle = "#0b0e14";
    this.ctx.fillRect(0, 0, width, height);
    if (frame === null) return;

    this.drawPoints(frame, view, width, height);
    for (const label of frame.payload.labels) {
      if (label.box3d !== null) this.drawBox(label, width, height, view);
      this.drawTrail(label, width, height, view);
    }
  }

  private drawPoints(frame: FrameEvent, view: ViewOptions, width: number, height: number): void {
    const { points_ref, colors_ref } = frame.payload;
    if (points_ref === null) return;
    const pts = pointsFromBuffer(frame.attachments[points_ref]);
    const colors = colors_ref !== null ? colorsFromBuffer(frame.attachments[colors_ref]) : null;
    const projected = this.camera.projectAll(pts, width, height);

    const image = this.ctx.getImageData(0, 0, width, height);
    const data = image.data;
    const size = Math.max(1, Math.round(view.pointSize));
    const n = Math.floor(projected.length / 3);
    for (let i = 0; i < n; i++) {
      const depth = projected[3 * i + 2];
      if (depth <= 0) continue;
      const x0 = Math.round(projected[3 * i]);
      const y0 = Math.round(projected[3 * i + 1]);
      const r = colors ? colors[3 * i] : 180;
      const g = colors ? colors[3 * i + 1] : 180;
      const b = colors ? colors[3 * i + 2] : 180;
      for (let dy = 0; dy < size; dy++) {
        const y = y0 + dy;
        if (y < 0 || y >= height) continue;
        for (let dx = 0; dx < size; dx++) {
          const x = x0 + dx;
          if (x < 0 || x >= width) continue;
          const o = 4 * (y * width + x);
          data[o] = r;
          data[o + 1] = g;
          data[o + 2] = b;
          data[o + 3] = 255;
        }
      }
    }
    this.ctx.putImageData(image, 0, 0);
  }

  private drawBox(label: LabelSnapshot, width: number, height: number, view: ViewOptions): void {
    const corners = boxCorners(label.box3d!).map(([x, y, z]) =>
      this.camera.projectPoint(x, y, z, width, height),
    );
    if (corners.some((c) => c[2] <= 0)) return;
    this.ctx.strokeStyle = sourceColor(label.source);
    this.ctx.lineWidth = 1.5;
    this.ctx.beginPath();
    for (const [a, b] of BOX_EDGES) {
      this.ctx.moveTo(corners[a][0], corners[a][1]);
      this.ctx.lineTo(corners[b][0], corners[b][1]);
    }
    this.ctx.stroke();

    if (view.showBoxLabels) {
      const top = corners.reduce((best, c) => (c[1] < best[1] ? c : best));
      this.ctx.fillStyle = sourceColor(label.source);
      this.ctx.font = "11px sans-serif";
      const tag = label.track_id !== null
        ? `${label.class_name} #${label.track_id}`
        : label.class_name;
      this.ctx.fillText(tag, top[0] + 3, top[1] - 3);
    }
  }

  private drawTrail(label: LabelSnapshot, width: number, height: number, view: ViewOptions): void {
    const trail = label.past_trajectory.slice(-view.trailLength);
    if (trail.length < 2) return;
    this.ctx.strokeStyle = sourceColor(label.source);
    this.ctx.lineWidth = 1;
    this.ctx.beginPath();
    let started = false;
    for (const [x, y, z] of trail) {
      const [sx, sy, depth] = this.camera.projectPoint(x, y, z, width, height);
      if (depth <= 0) continue;
      if (!started) {
        this.ctx.moveTo(sx, sy);
        started = true;
      } else {
        this.ctx.lineTo(sx, sy);
      }
    }
    this.ctx.stroke();
  }
}
