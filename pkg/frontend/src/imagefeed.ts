/** Image Feed: PNG snapshot plus 2D boxes, scaled to the canvas. */

import { FrameEvent } from "./protocol.js";
import { ViewOptions } from "./session.js";
import { sourceColor } from "./renderer.js";

export class ImageFeed {
  private bitmap: ImageBitmap | null = null;
  private bitmapFor = -1;

  constructor(private ctx: CanvasRenderingContext2D) {}

  async render(frame: FrameEvent | null, view: ViewOptions): Promise<void> {
    const { width, height } = this.ctx.canvas;
    this.ctx.fillStyle = "#11141b";
    this.ctx.fillRect(0, 0, width, height);
    if (frame === null || frame.payload.image_ref === null) {
      this.ctx.fillStyle = "#3a4152";
      this.ctx.font = "12px sans-serif";
      this.ctx.fillText("no image stream", 12, 20);
      return;
    }
    if (this.bitmapFor !== frame.payload.index) {
      const blob = new Blob(
        [frame.attachments[frame.payload.image_ref]], { type: "image/png" },
      );
      this.bitmap = await createImageBitmap(blob);
      this.bitmapFor = frame.payload.index;
    }
    const bmp = this.bitmap!;
    const scale = Math.min(width / bmp.width, height / bmp.height);
    const dw = bmp.width * scale;
    const dh = bmp.height * scale;
    const ox = (width - dw) / 2;
    const oy = (height - dh) / 2;
    this.ctx.drawImage(bmp, ox, oy, dw, dh);

    for (const label of frame.payload.labels) {
      if (label.box2d === null) continue;
      const [xmin, ymin, xmax, ymax] = label.box2d;
      this.ctx.strokeStyle = sourceColor(label.source);
      this.ctx.lineWidth = 1.5;
      this.ctx.strokeRect(
        ox + xmin * scale, oy + ymin * scale,
        (xmax - xmin) * scale, (ymax - ymin) * scale,
      );
      if (view.showBoxLabels) {
        this.ctx.fillStyle = sourceColor(label.source);
        this.ctx.font = "11px sans-serif";
        this.ctx.fillText(label.class_name, ox + xmin * scale + 2, oy + ymin * scale - 2);
      }
    }
  }
}
