/** Wires the four windows to a live control-service connection. */

import { ConfigPanel } from "./configpanel.js";
import { ImageFeed } from "./imagefeed.js";
import { LogWindow } from "./logwindow.js";
import { ProtocolClient, Transport } from "./protocol.js";
import { PointCloudRenderer } from "./renderer.js";
import { UiSession } from "./session.js";

function websocketTransport(url: string): { transport: Transport; socket: WebSocket } {
  const socket = new WebSocket(url);
  socket.binaryType = "arraybuffer";
  let handler: ((data: string | ArrayBuffer) => void) | null = null;
  socket.onmessage = (ev) => handler?.(ev.data);
  return {
    socket,
    transport: {
      send: (text) => socket.send(text),
      close: () => socket.close(),
      onMessage: (cb) => {
        handler = cb;
      },
    },
  };
}

function byId<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

async function start(): Promise<void> {
  const proto = location.protocol === "https:" ? "wss" : "ws";
  const { transport, socket } = websocketTransport(`${proto}://${location.host}/ws`);
  const client = new ProtocolClient(transport);
  const session = new UiSession(client);

  const cloudCanvas = byId<HTMLCanvasElement>("cloud-canvas");
  const imageCanvas = byId<HTMLCanvasElement>("image-canvas");
  const renderer = new PointCloudRenderer(cloudCanvas.getContext("2d")!);
  const imageFeed = new ImageFeed(imageCanvas.getContext("2d")!);
  new ConfigPanel(byId("config-panel"), session);
  new LogWindow(byId("log-window"), session);

  const statusEl = byId("status");
  const frameEl = byId("frame-indicator");

  const redraw = () => {
    renderer.render(session.latestFrame, session.view);
    void imageFeed.render(session.latestFrame, session.view);
    if (session.latestFrame) {
      const p = session.latestFrame.payload;
      frameEl.textContent =
        `frame ${p.index} (${p.stem}) | ${p.point_count} pts | ${p.labels.length} labels`;
    }
  };
  session.onChange("frame", redraw);
  session.onChange("state", () => {
    statusEl.textContent = session.playback.playing
      ? `playing ${session.playback.current + 1}/${session.playback.total}`
      : `paused at ${session.playback.current}/${session.playback.total}`;
  });

  socket.onopen = async () => {
    session.connected = true;
    statusEl.textContent = "connected";
    await session.refreshConfig();
    await session.step(); // materialize the first frame
  };
  socket.onclose = () => {
    session.connected = false;
    statusEl.textContent = "disconnected";
    client.abortPending("socket closed");
  };

  byId("btn-play").addEventListener("click", () => void session.play());
  byId("btn-pause").addEventListener("click", () => void session.pause());
  byId("btn-step").addEventListener("click", () => void session.step());
  byId<HTMLInputElement>("seek-input").addEventListener("change", (ev) => {
    const n = parseInt((ev.target as HTMLInputElement).value, 10);
    if (!Number.isNaN(n)) void session.seek(n);
  });

  // Visualization toggles: point size, box labels, trail length.
  byId<HTMLInputElement>("view-point-size").addEventListener("change", (ev) => {
    session.view.pointSize = parseFloat((ev.target as HTMLInputElement).value) || 2;
    redraw();
  });
  byId<HTMLInputElement>("view-box-labels").addEventListener("change", (ev) => {
    session.view.showBoxLabels = (ev.target as HTMLInputElement).checked;
    redraw();
  });
  byId<HTMLInputElement>("view-trail").addEventListener("change", (ev) => {
    session.view.trailLength = parseInt((ev.target as HTMLInputElement).value, 10) || 10;
    redraw();
  });

  // Orbit / pan / zoom; camera state survives frame changes.
  let dragging = false;
  let panning = false;
  let lastX = 0;
  let lastY = 0;
  cloudCanvas.addEventListener("mousedown", (ev) => {
    dragging = ev.button === 0;
    panning = ev.button === 2;
    lastX = ev.clientX;
    lastY = ev.clientY;
  });
  window.addEventListener("mouseup", () => {
    dragging = panning = false;
  });
  window.addEventListener("mousemove", (ev) => {
    const dx = ev.clientX - lastX;
    const dy = ev.clientY - lastY;
    lastX = ev.clientX;
    lastY = ev.clientY;
    if (dragging) {
      renderer.camera.orbit(-dx * 0.008, dy * 0.008);
      redraw();
    } else if (panning) {
      const scale = renderer.camera.distance / renderer.camera.focal;
      renderer.camera.pan(-dx * scale, dy * scale);
      redraw();
    }
  });
  cloudCanvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    renderer.camera.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
    redraw();
  });
  cloudCanvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
}

window.addEventListener("DOMContentLoaded", () => void start());
