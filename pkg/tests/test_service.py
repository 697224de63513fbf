"""Control-service protocol over an in-process WebSocket client."""

import json

import numpy as np
import pytest
from starlette.testclient import TestClient

from lidarpipe.engine import PipelineEngine, build_default_registry, default_config
from lidarpipe.frame import PointCloud
from lidarpipe.io import write_pcd
from lidarpipe.service import PROTOCOL_VERSION, create_app


class WsSession:
    """Reads interleaved responses/events; binary frames stay attached."""

    def __init__(self, ws):
        self.ws = ws
        self.events = []
        self._next_id = 0

    def _receive_message(self):
        raw = self.ws.receive()
        if raw.get("type") == "websocket.close":
            raise ConnectionError("closed")
        if "text" in raw and raw["text"] is not None:
            return json.loads(raw["text"])
        return {"type": "_binary", "payload": raw["bytes"]}

    def pump_until_response(self, request_id):
        while True:
            msg = self._receive_message()
            if "cmd" not in msg and "type" in msg:
                if msg["type"] == "frame":
                    blobs = [
                        self._receive_message()["payload"]
                        for _ in range(msg["payload"]["binary_count"])
                    ]
                    msg["attachments"] = blobs
                self.events.append(msg)
                continue
            if msg.get("id") == request_id:
                return msg
            self.events.append(msg)

    def request(self, cmd, **args):
        self._next_id += 1
        self.ws.send_text(json.dumps({"id": self._next_id, "cmd": cmd, "args": args}))
        return self.pump_until_response(self._next_id)

    def events_of(self, kind):
        return [e for e in self.events if e.get("type") == kind]


@pytest.fixture
def app(tmp_path):
    lidar = tmp_path / "lidar"
    lidar.mkdir()
    rng = np.random.default_rng(33)
    for i in range(5):
        pts = rng.uniform(-2, 2, size=(30, 4))
        (lidar / f"{i:06d}.pcd").write_bytes(write_pcd(PointCloud(pts)))
    registry = build_default_registry()
    config = default_config(registry)
    config.data.main_dir = str(tmp_path)
    config.data.pcd_type = ".pcd"
    crop = config.find("lidar", "crop")
    crop.params.update(min_x=-0.5, max_x=0.5, min_y=-0.5, max_y=0.5, min_z=-0.5, max_z=0.5)
    engine = PipelineEngine(config=config, registry=registry)
    return create_app(engine)


def connect(client):
    return client.websocket_connect("/ws")


class TestProtocol:
    def test_hello_handshake(self, app):
        with TestClient(app) as client, connect(client) as ws:
            hello = json.loads(ws.receive_text())
            assert hello == {"type": "hello", "proto": PROTOCOL_VERSION}

    def test_get_config(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("get_config")
            assert response["ok"] is True
            assert "proc" in response["payload"]
            assert response["payload"]["data"]["pcd_type"] == ".pcd"

    def test_unknown_cmd(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("frobnicate")
            assert response["ok"] is False
            assert "unknown cmd" in response["error"]

    def test_malformed_request_keeps_connection(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            ws.send_text("{not json")
            response = json.loads(ws.receive_text())
            assert response["ok"] is False and "malformed" in response["error"]
            session = WsSession(ws)
            assert session.request("get_config")["ok"] is True

    def test_request_response_id_pairing(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            ws.send_text(json.dumps({"id": 7, "cmd": "get_config", "args": {}}))
            ws.send_text(json.dumps({"id": 8, "cmd": "pause", "args": {}}))
            seen = {}
            while len(seen) < 2:
                msg = json.loads(ws.receive_text())
                if "id" in msg and msg.get("id") is not None:
                    seen[msg["id"]] = msg
            assert set(seen) == {7, 8}


class TestFrameEvents:
    def test_step_emits_frame_with_attachments(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("step")
            assert response["ok"] and response["payload"]["index"] == 0
            frames = session.events_of("frame")
            assert len(frames) == 1
            payload = frames[0]["payload"]
            assert payload["index"] == 0
            assert payload["point_count"] == 30
            points = np.frombuffer(frames[0]["attachments"][payload["points_ref"]],
                                   dtype="<f4").reshape(-1, 3)
            assert len(points) == payload["sent_points"] == 30
            colors = np.frombuffer(frames[0]["attachments"][payload["colors_ref"]],
                                   dtype=np.uint8).reshape(-1, 3)
            assert len(colors) == 30

    def test_patch_changes_next_frame_point_count(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            session.request("step")
            before = session.events_of("frame")[-1]["payload"]["point_count"]
            assert before == 30

            response = session.request("patch_config",
                                       path="proc.lidar.crop.enabled", value=True)
            assert response["ok"] is True
            session.request("step")
            after = session.events_of("frame")[-1]["payload"]["point_count"]
            assert after < before

    def test_rejected_patch_relays_reason(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("patch_config",
                                       path="proc.lidar.crop.max_x", value=-999.0)
            assert response["ok"] is False
            assert "min_x exceeds max_x" in response["error"]

    def test_frame_event_labels_roundtrip(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            session.request("patch_config", path="proc.lidar.dbscan.enabled", value=True)
            session.request("patch_config", path="proc.lidar.dbscan.eps", value=10.0)
            session.request("patch_config",
                            path="proc.lidar.cluster_to_object.enabled", value=True)
            session.request("step")
            payload = session.events_of("frame")[-1]["payload"]
            assert len(payload["labels"]) >= 1
            label = payload["labels"][0]
            assert set(label) >= {"class_name", "box3d", "box2d", "track_id",
                                  "source", "past_trajectory", "future_trajectory"}
            assert label["box3d"] is not None and len(label["box3d"]["center"]) == 3


class TestBroadcast:
    def test_config_event_reaches_all_clients(self, app):
        with TestClient(app) as client:
            with connect(client) as ws_a, connect(client) as ws_b:
                ws_a.receive_text()
                ws_b.receive_text()
                session_a = WsSession(ws_a)
                response = session_a.request("toggle_function",
                                             category="lidar", name="crop")
                assert response["ok"] and response["payload"]["enabled"] is True
                # Both clients see the config event.
                event_b = json.loads(ws_b.receive_text())
                assert event_b["type"] == "config"
                config_events = session_a.events_of("config")
                if not config_events:
                    msg = session_a._receive_message()
                    assert msg["type"] == "config"

    def test_subscribe_filters_channels(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("subscribe", channels=["log", "config"])
            assert sorted(response["payload"]["channels"]) == ["config", "log"]
            session.request("step")
            assert session.events_of("frame") == []


class TestPlaybackCommands:
    def test_seek_and_state(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("seek", n=3)
            assert response["payload"]["index"] == 3
            response = session.request("seek", n=10**6)
            assert response["payload"]["index"] == 4  # clamped

    def test_get_frame(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("get_frame", n=2)
            assert response["payload"]["index"] == 2
            assert session.events_of("frame")[-1]["payload"]["index"] == 2

    def test_play_pause(self, app):
        with TestClient(app) as client, connect(client) as ws:
            ws.receive_text()
            session = WsSession(ws)
            response = session.request("play")
            assert response["ok"]
            response = session.request("pause")
            assert response["ok"] and response["payload"]["playing"] is False
