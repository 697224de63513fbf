"""KITTI-format readers: velodyne .bin, calib text, and object labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ParseError
from ..frame import Calibration, PointCloud


def read_kitti_bin(data: bytes) -> PointCloud:
    """Packed little-endian float32 (x, y, z, intensity) quadruples."""
    if len(data) % 16 != 0:
        raise ParseError(f"velodyne buffer of {len(data)} bytes is not a multiple of 16")
    pts = np.frombuffer(data, dtype="<f4").reshape(-1, 4).astype(np.float64)
    return PointCloud(pts)


def write_kitti_bin(pc: PointCloud) -> bytes:
    return pc.points.astype("<f4").tobytes()


_CALIB_ARITY = {"P2": 12, "R0_rect": 9, "Tr_velo_to_cam": 12}


def read_kitti_calib(text: str) -> Calibration:
    """Parse 'KEY: v1 v2 ...' lines; P0/P1/P3 and other keys are ignored."""
    values: dict[str, np.ndarray] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or ":" not in line:
            continue
        key, rest = line.split(":", 1)
        key = key.strip()
        if key not in _CALIB_ARITY:
            continue
        try:
            nums = np.array([float(v) for v in rest.split()], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"calib key {key}: {exc}")
        if len(nums) != _CALIB_ARITY[key]:
            raise ParseError(f"calib key {key} expects {_CALIB_ARITY[key]} values, got {len(nums)}")
        values[key] = nums
    for key in _CALIB_ARITY:
        if key not in values:
            raise ParseError(f"calib text missing required key: {key}")
    return Calibration(
        Tr_velo_to_cam=values["Tr_velo_to_cam"].reshape(3, 4),
        R0_rect=values["R0_rect"].reshape(3, 3),
        P2=values["P2"].reshape(3, 4),
    )


@dataclass
class RawCameraLabel:
    """One KITTI label line, still in camera coordinates.

    ``location`` is the box bottom-center, ``dimensions`` are (h, w, l),
    ``rotation_y`` is the camera-frame yaw. Lidar-frame conversion is a
    separate pipeline step.
    """

    class_name: str
    truncated: float
    occluded: int
    alpha: float
    box2d: np.ndarray          # xmin, ymin, xmax, ymax
    dimensions: np.ndarray     # h, w, l
    location: np.ndarray       # camera x, y, z of box bottom-center
    rotation_y: float
    dont_care: bool = False

    def __post_init__(self):
        self.box2d = np.asarray(self.box2d, dtype=np.float64).reshape(4)
        self.dimensions = np.asarray(self.dimensions, dtype=np.float64).reshape(3)
        self.location = np.asarray(self.location, dtype=np.float64).reshape(3)


def read_kitti_label(text: str) -> tuple[list[RawCameraLabel], list[str]]:
    """Parse label lines; malformed lines are skipped, not fatal.

    Returns (labels, errors) where each error names the offending line.
    """
    labels: list[RawCameraLabel] = []
    errors: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 15:
            errors.append(f"line {lineno}: expected 15 fields, got {len(parts)}")
            continue
        try:
            label = RawCameraLabel(
                class_name=parts[0],
                truncated=float(parts[1]),
                occluded=int(float(parts[2])),
                alpha=float(parts[3]),
                box2d=[float(v) for v in parts[4:8]],
                dimensions=[float(v) for v in parts[8:11]],
                location=[float(v) for v in parts[11:14]],
                rotation_y=float(parts[14]),
                dont_care=(parts[0] == "DontCare"),
            )
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")
            continue
        labels.append(label)
    return labels, errors


def format_kitti_calib(calib: Calibration) -> str:
    """Write the three required keys in KITTI's flat text layout."""
    def row(name: str, mat: np.ndarray) -> str:
        return name + ": " + " ".join(f"{v:.12e}" for v in np.asarray(mat).reshape(-1))

    return "\n".join(
        [
            row("P2", calib.P2),
            row("R0_rect", calib.R0_rect),
            row("Tr_velo_to_cam", calib.Tr_velo_to_cam),
        ]
    ) + "\n"


def format_kitti_label(labels: list[RawCameraLabel]) -> str:
    lines = []
    for lb in labels:
        fields15 = [
            lb.class_name,
            f"{lb.truncated:.2f}",
            str(lb.occluded),
            f"{lb.alpha:.2f}",
            *(f"{v:.2f}" for v in lb.box2d),
            *(f"{v:.6f}" for v in lb.dimensions),
            *(f"{v:.6f}" for v in lb.location),
            f"{lb.rotation_y:.6f}",
        ]
        lines.append(" ".join(fields15))
    return "\n".join(lines) + ("\n" if lines else "")
