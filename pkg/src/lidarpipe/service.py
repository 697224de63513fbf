"""Network control surface: commands in, frame/log/config streams out.

One WebSocket per client. Text frames carry JSON; large payloads (point
buffers, PNG snapshots) ride as binary frames directly after the event
that references them, in reference order. Every request gets exactly one
response; events are broadcast to all subscribed clients. A slow client
loses frame events first, never log or config events.
"""

from __future__ import annotations

import asyncio
import json
import logging
import threading
from pathlib import Path
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .engine import PipelineEngine
from .errors import PipelineError
from .frame import Frame
from .io.png import write_png

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = "liguard-proto/1"
EVENT_CHANNELS = ("frame", "log", "config", "state")
MAX_PENDING_FRAMES = 3

# Distinct cluster colors; noise points stay gray.
_PALETTE = np.array([
    [230, 60, 60], [60, 160, 230], [90, 200, 90], [240, 180, 50],
    [170, 110, 230], [240, 120, 190], [110, 220, 220], [250, 140, 70],
    [150, 200, 60], [100, 130, 250],
], dtype=np.uint8)


def _label_payload(lb) -> dict[str, Any]:
    return {
        "class_name": lb.class_name,
        "box3d": None if lb.box3d is None else {
            "center": lb.box3d.center.tolist(),
            "extent": lb.box3d.extent.tolist(),
            "yaw": lb.box3d.yaw,
        },
        "box2d": None if lb.box2d is None else lb.box2d.tolist(),
        "track_id": lb.track_id,
        "source": lb.source,
        "velocity": None if lb.velocity is None else lb.velocity.tolist(),
        "past_trajectory": lb.past_trajectory.tolist(),
        "future_trajectory": lb.future_trajectory.tolist(),
    }


def frame_event(frame: Frame, max_points: int) -> tuple[dict[str, Any], list[bytes]]:
    """Serialize a frame into an event dict plus its binary attachments."""
    payload: dict[str, Any] = {
        "index": frame.index,
        "stem": frame.stem,
        "timestamp": frame.timestamp,
        "labels": [_label_payload(lb) for lb in frame.labels],
        "logs": [e.as_tuple() for e in frame.logs],
        "point_count": 0,
        "sent_points": 0,
        "points_ref": None,
        "colors_ref": None,
        "image_ref": None,
    }
    attachments: list[bytes] = []

    pc = frame.point_cloud
    if pc is not None and len(pc):
        n = len(pc)
        stride = max(1, int(np.ceil(n / max_points)))
        sel = np.arange(0, n, stride)
        payload["point_count"] = n
        payload["sent_points"] = len(sel)
        payload["points_ref"] = len(attachments)
        attachments.append(pc.xyz[sel].astype("<f4").tobytes())

        if pc.colors is not None:
            rgb = np.clip(pc.colors[sel] * 255.0, 0, 255).astype(np.uint8)
        elif frame.cluster_ids is not None:
            ids = frame.cluster_ids[sel]
            rgb = np.full((len(sel), 3), 140, dtype=np.uint8)
            clustered = ids >= 0
            rgb[clustered] = _PALETTE[ids[clustered] % len(_PALETTE)]
        else:
            gray = np.clip(pc.intensity[sel] * 255.0, 0, 255).astype(np.uint8)
            rgb = np.repeat(gray[:, None], 3, axis=1)
        payload["colors_ref"] = len(attachments)
        attachments.append(rgb.tobytes())

    if frame.image is not None:
        payload["image_ref"] = len(attachments)
        attachments.append(write_png(frame.image))

    payload["binary_count"] = len(attachments)
    return payload, attachments


class _Client:
    """Outbound queue per connection; one writer task drains it."""

    def __init__(self, loop: asyncio.AbstractEventLoop):
        self.loop = loop
        self.queue: asyncio.Queue = asyncio.Queue()
        self.channels: set[str] = set(EVENT_CHANNELS)
        self.pending_frames = 0
        self.dropped_frames = 0

    def enqueue(self, messages: list[tuple[str, Any]], is_frame: bool) -> None:
        if is_frame:
            if self.pending_frames >= MAX_PENDING_FRAMES:
                self.dropped_frames += 1
                return
            self.pending_frames += 1
        self.queue.put_nowait((messages, is_frame))

    def enqueue_threadsafe(self, messages: list[tuple[str, Any]], is_frame: bool) -> None:
        self.loop.call_soon_threadsafe(self.enqueue, messages, is_frame)


class ControlService:
    """Bridges one engine to any number of WebSocket clients."""

    def __init__(self, engine: PipelineEngine):
        self.engine = engine
        self._clients: set[_Client] = set()
        self._clients_lock = threading.Lock()
        engine.frame_listeners.append(self._on_frame)
        engine.log_listeners.append(self._on_logs)
        engine.config_listeners.append(self._on_config)
        engine.state_listeners.append(self._on_state)

    # -- broadcasting ------------------------------------------------------

    def _broadcast(self, channel: str, messages: list[tuple[str, Any]]) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            if channel in client.channels:
                client.enqueue_threadsafe(messages, is_frame=(channel == "frame"))

    def _on_frame(self, frame: Frame) -> None:
        payload, attachments = frame_event(
            frame, int(self.engine.config.visualization.get("max_points", 200000))
        )
        messages: list[tuple[str, Any]] = [
            ("text", json.dumps({"type": "frame", "payload": payload}))
        ]
        messages.extend(("bytes", blob) for blob in attachments)
        self._broadcast("frame", messages)

    def _on_logs(self, entries: list) -> None:
        payload = [e.as_tuple() for e in entries]
        self._broadcast("log", [("text", json.dumps({"type": "log", "payload": payload}))])

    def _on_config(self, config) -> None:
        self._broadcast(
            "config",
            [("text", json.dumps({"type": "config", "payload": config.to_dict()}))],
        )

    def _on_state(self, state: dict) -> None:
        self._broadcast("state", [("text", json.dumps({"type": "state", "payload": state}))])

    # -- request handling ----------------------------------------------------

    def handle(self, client: _Client, cmd: str, args: dict[str, Any]) -> Any:
        engine = self.engine
        if cmd == "get_config":
            return engine.config.to_dict()
        if cmd == "patch_config":
            engine.patch(args["path"], args.get("value"))
            return {"path": args["path"]}
        if cmd == "toggle_function":
            enabled = engine.toggle(args["category"], args["name"])
            return {"enabled": enabled}
        if cmd == "scaffold_function":
            paths = engine.scaffold(args["category"], args["name"])
            return {"paths": [str(p) for p in paths]}
        if cmd == "play":
            engine.play()
            return engine.state()
        if cmd == "pause":
            engine.pause()
            return engine.state()
        if cmd == "step":
            frame = engine.step()
            return {"index": None if frame is None else frame.index, **engine.state()}
        if cmd == "seek":
            frame = engine.seek(int(args["n"]))
            return {"index": None if frame is None else frame.index, **engine.state()}
        if cmd == "get_frame":
            frame = engine.seek(int(args["n"]))
            return {"index": None if frame is None else frame.index}
        if cmd == "subscribe":
            channels = set(args.get("channels", EVENT_CHANNELS)) & set(EVENT_CHANNELS)
            client.channels = channels
            return {"channels": sorted(channels)}
        raise PipelineError(f"unknown cmd '{cmd}'")

    # -- connection lifecycle ----------------------------------------------------

    async def serve_client(self, websocket: WebSocket) -> None:
        await websocket.accept()
        client = _Client(asyncio.get_running_loop())
        with self._clients_lock:
            self._clients.add(client)
        client.enqueue(
            [("text", json.dumps({"type": "hello", "proto": PROTOCOL_VERSION}))],
            is_frame=False,
        )
        writer = asyncio.create_task(self._write_loop(websocket, client))
        try:
            while True:
                raw = await websocket.receive_text()
                await self._process_request(client, raw)
        except WebSocketDisconnect:
            pass
        finally:
            with self._clients_lock:
                self._clients.discard(client)
            writer.cancel()

    async def _process_request(self, client: _Client, raw: str) -> None:
        request_id = None
        try:
            request = json.loads(raw)
            request_id = request.get("id")
            cmd = request["cmd"]
            args = request.get("args", {}) or {}
            payload = await asyncio.to_thread(self.handle, client, cmd, args)
            response = {"id": request_id, "ok": True, "payload": payload}
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            response = {"id": request_id, "ok": False, "error": f"malformed request: {exc}"}
        except PipelineError as exc:
            response = {"id": request_id, "ok": False, "error": str(exc)}
        except Exception as exc:  # engine bugs must not kill the connection
            logger.exception("command failed")
            response = {"id": request_id, "ok": False, "error": f"internal error: {exc}"}
        client.enqueue([("text", json.dumps(response))], is_frame=False)

    async def _write_loop(self, websocket: WebSocket, client: _Client) -> None:
        try:
            while True:
                messages, is_frame = await client.queue.get()
                if is_frame:
                    client.pending_frames -= 1
                for kind, body in messages:
                    if kind == "text":
                        await websocket.send_text(body)
                    else:
                        await websocket.send_bytes(body)
        except asyncio.CancelledError:
            pass
        except Exception:
            logger.debug("client writer stopped", exc_info=True)


_INDEX_FALLBACK = """<!doctype html>
<html><head><title>lidarpipe</title></head>
<body><h1>lidarpipe control service</h1>
<p>WebSocket endpoint at <code>/ws</code> (protocol {proto}).
No UI bundle found; build the frontend and serve its dist/ directory.</p>
</body></html>"""


def create_app(engine: PipelineEngine, static_dir: Optional[Path | str] = None) -> FastAPI:
    app = FastAPI(title="lidarpipe control service")
    service = ControlService(engine)
    app.state.service = service

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await service.serve_client(websocket)

    static = Path(static_dir) if static_dir is not None else None
    if static is not None and static.is_dir():
        app.mount("/", StaticFiles(directory=str(static), html=True), name="ui")
    else:
        @app.get("/")
        async def root():
            return HTMLResponse(_INDEX_FALLBACK.format(proto=PROTOCOL_VERSION))

    return app
