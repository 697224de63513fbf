"""Point-cloud functions: sanitization, cropping, rotation, colorization."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..frame import Calibration, ImageRaster, PointCloud
from .projection import project_lidar_to_image


def sanitize_pcd(pc: PointCloud) -> PointCloud:
    """Drop points with non-finite coordinates or exact (0, 0, 0) position."""
    xyz = pc.xyz
    finite = np.isfinite(pc.points).all(axis=1)
    nonzero = ~np.all(xyz == 0.0, axis=1)
    return pc.select(finite & nonzero)


def crop(pc: PointCloud, min_xyz, max_xyz) -> PointCloud:
    """Keep points with min <= p <= max on all axes (inclusive)."""
    lo = np.asarray(min_xyz, dtype=np.float64).reshape(3)
    hi = np.asarray(max_xyz, dtype=np.float64).reshape(3)
    if np.any(lo > hi):
        raise ConfigError(f"crop bounds inverted: min {lo.tolist()} > max {hi.tolist()}")
    xyz = pc.xyz
    mask = np.all((xyz >= lo) & (xyz <= hi), axis=1)
    return pc.select(mask)


def rotation_matrix(euler_xyz) -> np.ndarray:
    """R = Rz(yaw) . Ry(pitch) . Rx(roll) for angles in radians."""
    ax, ay, az = (float(a) for a in euler_xyz)
    cx, sx = np.cos(ax), np.sin(ax)
    cy, sy = np.cos(ay), np.sin(ay)
    cz, sz = np.cos(az), np.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return rz @ ry @ rx


def rotate(pc: PointCloud, euler_xyz) -> PointCloud:
    """Rotate all points about the origin by intrinsic x-y-z Euler angles."""
    rot = rotation_matrix(euler_xyz)
    pts = pc.points.copy()
    pts[:, :3] = pc.xyz @ rot.T
    return PointCloud(pts, colors=None if pc.colors is None else pc.colors.copy())


def colorize_points_from_image(
    pc: PointCloud, img: ImageRaster, calib: Calibration
) -> PointCloud:
    """Color each point with its projected pixel; off-image points get black."""
    n = len(pc)
    colors = np.zeros((n, 3), dtype=np.float64)
    if n:
        uv, w = project_lidar_to_image(pc.xyz, calib)
        px = np.rint(uv).astype(np.int64)
        visible = (
            (w > 0)
            & (px[:, 0] >= 0)
            & (px[:, 0] < img.width)
            & (px[:, 1] >= 0)
            & (px[:, 1] < img.height)
        )
        idx = np.nonzero(visible)[0]
        colors[idx] = img.data[px[idx, 1], px[idx, 0]] / 255.0
    return PointCloud(pc.points.copy(), colors=colors, organized=pc.organized)
