"""The serial execution loop that turns config + dataset into processed frames.

One engine owns one pipeline: its config, registry, dataset index, and
playback state. All engine-affecting calls take the engine lock, so live
edits land exactly on frame boundaries: frame t runs with the pre-patch
schedule, frame t+1 with the post-patch one.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter
from typing import Any, Callable, Optional

from ..config import PipelineConfig, apply_config_patch
from ..errors import ConfigError, MissingInputError, PatchError
from ..frame import Frame
from ..io.dataset import FrameIndex, load_frame, scan_dataset
from ..io.replay import ReplaySensor
from .builtins import build_default_registry
from .registry import FunctionRegistry
from .scaffold import CONFIG_NAME, CustomFunctionLoader, scaffold_custom_function
from .schedule import Schedule, build_schedule

logger = logging.getLogger(__name__)


@dataclass
class FrameStats:
    index: int
    stem: str
    points_in: int
    points_out: int
    labels: int
    errors: int
    warnings: int
    seconds: float


@dataclass
class RunStats:
    """What happened during a run, for summaries and reports."""

    frames: list[FrameStats] = field(default_factory=list)
    fn_seconds: dict[str, float] = field(default_factory=dict)
    fn_calls: dict[str, int] = field(default_factory=dict)

    @property
    def error_count(self) -> int:
        return sum(f.errors for f in self.frames)

    @property
    def warning_count(self) -> int:
        return sum(f.warnings for f in self.frames)

    def record_call(self, key: str, seconds: float) -> None:
        self.fn_seconds[key] = self.fn_seconds.get(key, 0.0) + seconds
        self.fn_calls[key] = self.fn_calls.get(key, 0) + 1


class PipelineEngine:
    """Loads a pipeline directory and drives frames through its schedule."""

    def __init__(
        self,
        pipeline_dir: Optional[Path | str] = None,
        config: Optional[PipelineConfig] = None,
        registry: Optional[FunctionRegistry] = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if pipeline_dir is None and config is None:
            raise ConfigError("engine needs a pipeline directory or a config")
        self.pipeline_dir = Path(pipeline_dir) if pipeline_dir is not None else None
        self.registry = registry if registry is not None else build_default_registry()
        if config is None:
            config = PipelineConfig.load(self.pipeline_dir / CONFIG_NAME)
        self.config = config
        if self.pipeline_dir is not None:
            self.config.base_dir = str(self.pipeline_dir)
            self.loader: Optional[CustomFunctionLoader] = CustomFunctionLoader(
                self.pipeline_dir, self.registry
            )
            self.loader.refresh(self.config)
        else:
            self.loader = None

        self._clock = clock
        self._sleep = sleep
        self._lock = threading.RLock()
        self._schedule: Optional[Schedule] = None
        self._index: Optional[FrameIndex] = None
        self.current = -1
        self._playing = False
        self._play_thread: Optional[threading.Thread] = None
        self.stats = RunStats()
        self.last_frame: Optional[Frame] = None

        self.frame_listeners: list[Callable[[Frame], None]] = []
        self.log_listeners: list[Callable[[list], None]] = []
        self.config_listeners: list[Callable[[PipelineConfig], None]] = []
        self.state_listeners: list[Callable[[dict], None]] = []

    # -- dataset -------------------------------------------------------------

    @property
    def index(self) -> FrameIndex:
        if self._index is None:
            self._index = scan_dataset(self.config)
        return self._index

    def rescan(self) -> None:
        with self._lock:
            self._index = None

    @property
    def total_frames(self) -> int:
        return len(self.index)

    # -- schedule ------------------------------------------------------------

    def schedule(self) -> Schedule:
        with self._lock:
            if self.loader is not None:
                changed = self.loader.refresh(self.config)
                if changed:
                    self._schedule = None
            if self._schedule is None:
                self._schedule = build_schedule(self.config, self.registry)
            return self._schedule

    def _invalidate_schedule(self) -> None:
        self._schedule = None

    # -- execution -------------------------------------------------------------

    def execute_frame(self, frame: Frame, schedule: Optional[Schedule] = None) -> Frame:
        """Run every scheduled function; failures never escape the frame."""
        sched = schedule if schedule is not None else self.schedule()
        for category, name in sched:
            fn = self.registry.resolve(category, name)
            if fn is None:
                frame.log("error", name, f"({category}, {name}) vanished from registry")
                continue
            entry = self.config.find(category, name)
            params = dict(fn.default_params())
            if entry is not None:
                params.update(entry.params)
            started = perf_counter()
            try:
                fn.run(frame, params, self.config)
            except MissingInputError as exc:
                frame.log("warning", name, f"skipped: {exc}")
            except Exception as exc:
                frame.log("error", name, f"failed: {exc}")
            finally:
                self.stats.record_call(f"{category}.{name}", perf_counter() - started)
        return frame

    def process_index(self, i: int) -> Frame:
        """Load, execute, record, and broadcast frame i."""
        with self._lock:
            started = perf_counter()
            frame = load_frame(self.index, i, self.config)
            points_in = 0 if frame.point_cloud is None else len(frame.point_cloud)
            self.execute_frame(frame)
            points_out = 0 if frame.point_cloud is None else len(frame.point_cloud)
            self.stats.frames.append(FrameStats(
                index=i,
                stem=frame.stem,
                points_in=points_in,
                points_out=points_out,
                labels=len(frame.labels),
                errors=sum(1 for e in frame.logs if e.level == "error"),
                warnings=sum(1 for e in frame.logs if e.level == "warning"),
                seconds=perf_counter() - started,
            ))
            self.current = i
            self.last_frame = frame
        for cb in self.frame_listeners:
            cb(frame)
        if frame.logs:
            for cb in self.log_listeners:
                cb(list(frame.logs))
        return frame

    # -- playback --------------------------------------------------------------

    def step(self) -> Optional[Frame]:
        """Process exactly the next frame; None when the dataset is done."""
        with self._lock:
            nxt = self.current + 1
            if nxt >= self.total_frames:
                return None
            return self.process_index(nxt)

    def seek(self, n: int) -> Optional[Frame]:
        """Jump to frame n (clamped into range) and process it."""
        total = self.total_frames
        if total == 0:
            return None
        clamped = min(max(n, 0), total - 1)
        if clamped != n:
            logger.warning("seek(%d) clamped to %d", n, clamped)
        return self.process_index(clamped)

    def play(self) -> None:
        with self._lock:
            if self._playing:
                return
            self._playing = True
        self._play_thread = threading.Thread(target=self._play_loop, daemon=True)
        self._play_thread.start()
        self._notify_state()

    def _play_loop(self) -> None:
        hz = max(self.config.data.replay_hz, 1e-3)
        sensor = ReplaySensor(
            self.total_frames, hz, clock=self._clock, sleep=self._sleep,
            start=self.current + 1,
        )
        while self._playing:
            i = sensor.poll()
            if i is None:
                break
            if not self._playing:
                break
            self.process_index(i)
        self._playing = False
        self._notify_state()

    def pause(self) -> None:
        self._playing = False
        thread = self._play_thread
        if thread is not None and thread is not threading.current_thread():
            thread.join(timeout=5.0)
        self._notify_state()

    def state(self) -> dict[str, Any]:
        try:
            total = self.total_frames
        except ConfigError:
            total = 0
        return {"current": self.current, "playing": self._playing, "total": total}

    def _notify_state(self) -> None:
        snapshot = self.state()
        for cb in self.state_listeners:
            cb(snapshot)

    # -- live edits --------------------------------------------------------------

    def patch(self, path: str, value: Any) -> PipelineConfig:
        """Apply one config edit between frames; raises PatchError on rejection."""
        with self._lock:
            new_config = apply_config_patch(self.config, path, value, schema=self.registry)
            new_config.base_dir = getattr(self.config, "base_dir", None)
            self.config = new_config
            self._invalidate_schedule()
            if path.startswith("data."):
                self._index = None
        for cb in self.config_listeners:
            cb(self.config)
        return self.config

    def toggle(self, category: str, name: str) -> bool:
        """Flip a function's enabled flag; returns the new value."""
        with self._lock:
            entry = self.config.find(category, name)
            if entry is None:
                raise PatchError(f"no function '{name}' in category '{category}'")
            target = not entry.enabled
        self.patch(f"proc.{category}.{name}.enabled", target)
        return target

    def scaffold(self, category: str, name: str) -> list[Path]:
        """Create a custom function in this pipeline's directory."""
        if self.pipeline_dir is None:
            raise ConfigError("engine has no pipeline directory to scaffold into")
        with self._lock:
            paths = scaffold_custom_function(
                self.pipeline_dir, category, name, registry=self.registry
            )
            self.loader.refresh(self.config)
            self._invalidate_schedule()
        for cb in self.config_listeners:
            cb(self.config)
        return paths

    # -- batch -------------------------------------------------------------------

    def run_headless(self) -> RunStats:
        """Process every frame in order as fast as possible."""
        self.stats = RunStats()
        self.current = -1
        total = self.total_frames
        for i in range(total):
            self.process_index(i)
        return self.stats
