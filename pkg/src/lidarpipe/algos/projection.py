"""Calibration-chain projections: lidar points and 3D boxes onto images."""

from __future__ import annotations

import numpy as np

from ..frame import Box3D, Calibration, ImageRaster, ObjectLabel


def lidar_to_camera_matrix(calib: Calibration) -> np.ndarray:
    """Homogeneous 4x4 taking lidar points into the rectified camera frame."""
    tr = np.eye(4)
    tr[:3, :] = calib.Tr_velo_to_cam
    r0 = np.eye(4)
    r0[:3, :3] = calib.R0_rect
    return r0 @ tr


def project_lidar_to_image(
    xyz: np.ndarray, calib: Calibration
) -> tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates (u, v) and projective depth w for each point.

    Points with w <= 0 are behind the camera; their (u, v) is meaningless.
    """
    pts = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    homog = np.column_stack([pts, np.ones(len(pts))])
    cam = (lidar_to_camera_matrix(calib) @ homog.T).T  # N x 4
    proj = (calib.P2 @ cam.T).T  # N x 3
    w = proj[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        uv = proj[:, :2] / w[:, None]
    return uv, w


def box3d_corners(box: Box3D) -> np.ndarray:
    """The 8 corners of an oriented box, lidar frame, shape (8, 3)."""
    l, w, h = box.extent
    signs = np.array(
        [
            [1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1],
            [-1, 1, 1], [-1, 1, -1], [-1, -1, 1], [-1, -1, -1],
        ],
        dtype=np.float64,
    )
    local = signs * np.array([l / 2, w / 2, h / 2])
    c, s = np.cos(box.yaw), np.sin(box.yaw)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    return local @ rot.T + box.center


def gen_bbox_2d(
    labels: list[ObjectLabel],
    calib: Calibration,
    image_width: int,
    image_height: int,
) -> list[ObjectLabel]:
    """Fill box2d from each label's projected 3D corners, clipped to the raster.

    Labels entirely behind the camera keep box2d absent. Mutates and
    returns the input list.
    """
    for label in labels:
        if label.box3d is None:
            continue
        corners = box3d_corners(label.box3d)
        uv, w = project_lidar_to_image(corners, calib)
        front = w > 0
        if not np.any(front):
            label.box2d = None
            continue
        uv = uv[front]
        xmin = float(np.clip(uv[:, 0].min(), 0, image_width))
        xmax = float(np.clip(uv[:, 0].max(), 0, image_width))
        ymin = float(np.clip(uv[:, 1].min(), 0, image_height))
        ymax = float(np.clip(uv[:, 1].max(), 0, image_height))
        label.box2d = np.array([xmin, ymin, xmax, ymax])
    return labels


def depth_color(depth: np.ndarray, max_depth: float) -> np.ndarray:
    """Near-red to far-blue ramp over [0, max_depth], as uint8 RGB."""
    t = np.clip(np.asarray(depth, dtype=np.float64) / max_depth, 0.0, 1.0)
    rgb = np.zeros((len(t), 3), dtype=np.uint8)
    rgb[:, 0] = np.floor(255.0 * (1.0 - t) + 0.5).astype(np.uint8)
    rgb[:, 2] = np.floor(255.0 * t + 0.5).astype(np.uint8)
    return rgb


def project_points_to_image(
    img: ImageRaster,
    pc,
    calib: Calibration,
    point_size: int = 2,
    max_depth: float = 50.0,
) -> ImageRaster:
    """New raster with visible points drawn as depth-colored squares."""
    out = img.copy()
    if len(pc) == 0:
        return out
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
    if len(idx) == 0:
        return out
    colors = depth_color(w[idx], max_depth)
    half = max(int(point_size) // 2, 0)
    data = out.data
    for (x, y), rgb in zip(px[idx], colors):
        x0, x1 = max(x - half, 0), min(x + half + 1, img.width)
        y0, y1 = max(y - half, 0), min(y + half + 1, img.height)
        data[y0:y1, x0:x1] = rgb
    return out
