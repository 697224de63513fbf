"""Domain types shared by every pipeline stage.

Values flow through the pipeline inside a :class:`Frame`, a keyed store
that decouples functions from each other: any function may read any slot
and write results back, but no function ever calls another one directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from .errors import FrameStoreError

PROCESS_CATEGORIES = ("pre", "lidar", "camera", "calib", "label", "post")

# Slots with dedicated storage on Frame; everything else lands in `extras`.
FRAME_SLOTS = ("point_cloud", "image", "calibration", "labels", "cluster_ids")


def _as_points(points: Any) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return pts.reshape(0, 4)
    if pts.ndim != 2 or pts.shape[1] not in (3, 4):
        raise ValueError(f"points must be N x 3 or N x 4, got shape {pts.shape}")
    if pts.shape[1] == 3:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    return pts


class PointCloud:
    """One lidar sweep: N points of (x, y, z, intensity), meters and [0, 1].

    ``colors`` is an optional (N, 3) float array in [0, 1] aligned 1:1 with
    the points. ``organized`` optionally records the sensor's (width, height)
    grid for clouds whose point order follows a fixed beam layout.
    """

    __slots__ = ("points", "colors", "organized")

    def __init__(
        self,
        points: Any = (),
        colors: Any = None,
        organized: Optional[tuple[int, int]] = None,
    ):
        self.points = _as_points(points)
        if colors is not None:
            colors = np.asarray(colors, dtype=np.float64).reshape(-1, 3)
            if len(colors) != len(self.points):
                raise ValueError(
                    f"colors length {len(colors)} != point count {len(self.points)}"
                )
        self.colors = colors
        if organized is not None:
            w, h = int(organized[0]), int(organized[1])
            if w <= 0 or h <= 0 or w * h != len(self.points):
                raise ValueError(
                    f"organized dims {organized} do not match point count {len(self.points)}"
                )
            organized = (w, h)
        self.organized = organized

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xyz(self) -> np.ndarray:
        return self.points[:, :3]

    @property
    def intensity(self) -> np.ndarray:
        return self.points[:, 3]

    def with_points(self, points: np.ndarray, colors: Any = None) -> "PointCloud":
        """New cloud with replaced data; organized dims are dropped."""
        return PointCloud(points, colors=colors)

    def select(self, mask_or_index: np.ndarray) -> "PointCloud":
        """Subset of points (and aligned colors) by mask or index array."""
        colors = self.colors[mask_or_index] if self.colors is not None else None
        return PointCloud(self.points[mask_or_index], colors=colors)

    def copy(self) -> "PointCloud":
        return PointCloud(
            self.points.copy(),
            colors=None if self.colors is None else self.colors.copy(),
            organized=self.organized,
        )

    def __repr__(self) -> str:
        extra = ", organized" if self.organized else ""
        extra += ", colored" if self.colors is not None else ""
        return f"PointCloud({len(self)} pts{extra})"


class ImageRaster:
    """Row-major 8-bit RGB raster."""

    __slots__ = ("data",)

    def __init__(self, data: Any):
        arr = np.asarray(data, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"image data must be H x W x 3, got shape {arr.shape}")
        self.data = arr

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def copy(self) -> "ImageRaster":
        return ImageRaster(self.data.copy())

    def __repr__(self) -> str:
        return f"ImageRaster({self.width}x{self.height})"


def _check_rotation(name: str, rot: np.ndarray, tol: float = 1e-3) -> None:
    err = np.abs(rot @ rot.T - np.eye(3)).max()
    if err > tol:
        raise ValueError(f"{name} rotation block is not orthonormal (max error {err:.2e})")


@dataclass
class Calibration:
    """KITTI-style projection chain: pixel = P2 . R0_rect . Tr_velo_to_cam . p."""

    Tr_velo_to_cam: np.ndarray  # 3x4, lidar -> camera
    R0_rect: np.ndarray         # 3x3 rectification
    P2: np.ndarray              # 3x4 camera projection

    def __post_init__(self):
        self.Tr_velo_to_cam = np.asarray(self.Tr_velo_to_cam, dtype=np.float64).reshape(3, 4)
        self.R0_rect = np.asarray(self.R0_rect, dtype=np.float64).reshape(3, 3)
        self.P2 = np.asarray(self.P2, dtype=np.float64).reshape(3, 4)
        _check_rotation("R0_rect", self.R0_rect)
        _check_rotation("Tr_velo_to_cam", self.Tr_velo_to_cam[:, :3])

    @staticmethod
    def identity() -> "Calibration":
        return Calibration(
            Tr_velo_to_cam=np.hstack([np.eye(3), np.zeros((3, 1))]),
            R0_rect=np.eye(3),
            P2=np.hstack([np.eye(3), np.zeros((3, 1))]),
        )


@dataclass
class Box3D:
    """Oriented z-up box: center (m), extent l/w/h (m), yaw about +z (rad)."""

    center: np.ndarray
    extent: np.ndarray
    yaw: float = 0.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.extent = np.asarray(self.extent, dtype=np.float64).reshape(3)
        self.yaw = float(self.yaw)
        if not np.all(self.extent > 0):
            raise ValueError(f"box extents must be strictly positive, got {self.extent}")

    def copy(self) -> "Box3D":
        return Box3D(self.center.copy(), self.extent.copy(), self.yaw)


_EMPTY_TRAJ = np.zeros((0, 3), dtype=np.float64)


@dataclass
class ObjectLabel:
    """One detected or annotated object.

    ``box3d`` lives in the lidar frame; ``box2d`` in image pixels as
    (xmin, ymin, xmax, ymax). Camera-only detections may carry just a 2D
    box. Trajectories are ordered oldest to newest.
    """

    class_name: str
    box3d: Optional[Box3D] = None
    box2d: Optional[np.ndarray] = None
    track_id: Optional[int] = None
    past_trajectory: np.ndarray = field(default_factory=lambda: _EMPTY_TRAJ.copy())
    future_trajectory: np.ndarray = field(default_factory=lambda: _EMPTY_TRAJ.copy())
    velocity: Optional[np.ndarray] = None
    source: str = "unknown"

    def __post_init__(self):
        if self.box2d is not None:
            self.box2d = np.asarray(self.box2d, dtype=np.float64).reshape(4)
            if self.box2d[0] > self.box2d[2] or self.box2d[1] > self.box2d[3]:
                raise ValueError(f"box2d min exceeds max: {self.box2d}")
        self.past_trajectory = np.asarray(self.past_trajectory, dtype=np.float64).reshape(-1, 3)
        self.future_trajectory = np.asarray(self.future_trajectory, dtype=np.float64).reshape(-1, 3)
        for name, traj in (("past", self.past_trajectory), ("future", self.future_trajectory)):
            if traj.size and not np.all(np.isfinite(traj)):
                raise ValueError(f"{name} trajectory contains non-finite values")
        if self.velocity is not None:
            self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(3)


@dataclass
class LogEntry:
    level: str   # debug | info | warning | error
    source: str
    message: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.level, self.source, self.message)


class Frame:
    """One time-step's bundle flowing through the pipeline.

    Functions read and write exclusively through :meth:`get` / :meth:`put`;
    unknown keys go to the open ``extras`` mapping so custom functions can
    hand data to each other without touching the core slots.
    """

    def __init__(self, index: int = 0, timestamp: float = 0.0, stem: Optional[str] = None):
        self.index = int(index)
        self.timestamp = float(timestamp)
        self.stem = stem if stem is not None else f"{self.index:06d}"
        self.point_cloud: Optional[PointCloud] = None
        self.image: Optional[ImageRaster] = None
        self.calibration: Optional[Calibration] = None
        self.labels: list[ObjectLabel] = []
        self.cluster_ids: Optional[np.ndarray] = None
        self.extras: dict[str, Any] = {}
        self.logs: list[LogEntry] = []

    # -- keyed store -------------------------------------------------------

    def get(self, key: str) -> Any:
        """Slot value, or the absent marker (None; empty list for labels)."""
        if key in FRAME_SLOTS:
            return getattr(self, key)
        return self.extras.get(key)

    def put(self, key: str, value: Any) -> "Frame":
        """Replace a slot value. Rejects writes that break store invariants."""
        if key == "cluster_ids":
            value = self._check_cluster_ids(value)
        if key == "labels" and value is None:
            value = []
        if key in FRAME_SLOTS:
            setattr(self, key, value)
        else:
            self.extras[key] = value
        return self

    def _check_cluster_ids(self, value: Any) -> Optional[np.ndarray]:
        if value is None:
            return None
        ids = np.asarray(value, dtype=np.int64).reshape(-1)
        npts = 0 if self.point_cloud is None else len(self.point_cloud)
        if len(ids) != npts:
            raise FrameStoreError(
                f"cluster_ids length {len(ids)} != point count {npts}"
            )
        return ids

    def require(self, key: str) -> Any:
        """Like :meth:`get` but raises MissingInputError when absent."""
        from .errors import MissingInputError

        value = self.get(key)
        if value is None or (key == "labels" and len(value) == 0):
            raise MissingInputError(key)
        return value

    # -- logging -----------------------------------------------------------

    def log(self, level: str, source: str, message: str) -> None:
        self.logs.append(LogEntry(level, source, message))

    def iter_logs(self, min_index: int = 0) -> Iterator[LogEntry]:
        return iter(self.logs[min_index:])

    def __repr__(self) -> str:
        parts = [f"idx={self.index}"]
        if self.point_cloud is not None:
            parts.append(f"pc={len(self.point_cloud)}")
        if self.image is not None:
            parts.append("img")
        if self.calibration is not None:
            parts.append("calib")
        if self.labels:
            parts.append(f"labels={len(self.labels)}")
        return f"Frame({', '.join(parts)})"
