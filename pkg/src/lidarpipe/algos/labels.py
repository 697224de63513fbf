"""Label-stream functions: coordinate conversion, filtering, fusion."""

from __future__ import annotations

import numpy as np

from ..errors import AlgoError, ConfigError
from ..frame import Box3D, Calibration, ObjectLabel
from ..io.kitti import RawCameraLabel


def wrap_pi(angle: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = (angle + np.pi) % (2 * np.pi) - np.pi
    return np.pi if wrapped == -np.pi else float(wrapped)


def convert_labels_camera_to_lidar(
    raw_labels: list[RawCameraLabel], calib: Calibration
) -> list[ObjectLabel]:
    """Camera-frame KITTI labels into lidar-frame oriented boxes.

    The KITTI location is the box bottom-center; after mapping into the
    lidar frame the center is lifted by h/2. DontCare entries are dropped.
    """
    tr = np.eye(4)
    tr[:3, :] = calib.Tr_velo_to_cam
    r0 = np.eye(4)
    r0[:3, :3] = calib.R0_rect
    try:
        inv = np.linalg.inv(tr) @ np.linalg.inv(r0)
    except np.linalg.LinAlgError as exc:
        raise AlgoError(f"calibration is singular: {exc}")

    out: list[ObjectLabel] = []
    for raw in raw_labels:
        if raw.dont_care:
            continue
        h, w, l = raw.dimensions
        loc = inv @ np.append(raw.location, 1.0)
        center = loc[:3].copy()
        center[2] += h / 2
        out.append(
            ObjectLabel(
                class_name=raw.class_name,
                box3d=Box3D(
                    center=center,
                    extent=np.array([l, w, h]),
                    yaw=wrap_pi(-raw.rotation_y - np.pi / 2),
                ),
                box2d=raw.box2d.copy(),
                source="ground_truth",
            )
        )
    return out


def remove_out_of_bound_labels(
    labels: list[ObjectLabel], min_xyz, max_xyz
) -> list[ObjectLabel]:
    """Keep labels whose box center lies inside the bounds (inclusive)."""
    lo = np.asarray(min_xyz, dtype=np.float64).reshape(3)
    hi = np.asarray(max_xyz, dtype=np.float64).reshape(3)
    if np.any(lo > hi):
        raise ConfigError(f"bounds inverted: min {lo.tolist()} > max {hi.tolist()}")
    return [
        lb
        for lb in labels
        if lb.box3d is not None
        and np.all(lb.box3d.center >= lo)
        and np.all(lb.box3d.center <= hi)
    ]


def points_in_box(xyz: np.ndarray, box: Box3D) -> np.ndarray:
    """Boolean mask of points inside the oriented box (inclusive faces)."""
    c, s = np.cos(box.yaw), np.sin(box.yaw)
    rot = np.array([[c, s], [-s, c]])  # world -> box frame
    local_xy = (xyz[:, :2] - box.center[:2]) @ rot.T
    local_z = xyz[:, 2] - box.center[2]
    half = box.extent / 2
    return (
        (np.abs(local_xy[:, 0]) <= half[0])
        & (np.abs(local_xy[:, 1]) <= half[1])
        & (np.abs(local_z) <= half[2])
    )


def remove_less_point_labels(
    labels: list[ObjectLabel], pc, min_points: int
) -> list[ObjectLabel]:
    """Keep labels whose box contains at least min_points cloud points."""
    xyz = pc.xyz
    kept = []
    for lb in labels:
        if lb.box3d is None:
            kept.append(lb)
            continue
        if int(points_in_box(xyz, lb.box3d).sum()) >= min_points:
            kept.append(lb)
    return kept


def iou_2d(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two (xmin, ymin, xmax, ymax) boxes."""
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    if inter <= 0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def fuse_2d_bboxes(
    labels: list[ObjectLabel],
    modality_a: str,
    modality_b: str,
    iou_threshold: float,
) -> list[ObjectLabel]:
    """Greedy cross-modality fusion by descending 2D IoU, one-to-one.

    A matched pair collapses into a single label: the union 2D box, the
    3D box from whichever side has one (a preferred), a's class unless it
    is Unknown. Unmatched labels pass through untouched.
    """
    a_idx = [i for i, lb in enumerate(labels) if lb.source == modality_a and lb.box2d is not None]
    b_idx = [i for i, lb in enumerate(labels) if lb.source == modality_b and lb.box2d is not None]

    pairs = []
    for ai in a_idx:
        for bi in b_idx:
            iou = iou_2d(labels[ai].box2d, labels[bi].box2d)
            if iou >= iou_threshold:
                pairs.append((iou, ai, bi))
    pairs.sort(key=lambda p: (-p[0], p[1], p[2]))

    used: set[int] = set()
    fused: dict[int, ObjectLabel] = {}
    for iou, ai, bi in pairs:
        if ai in used or bi in used:
            continue
        used.update((ai, bi))
        la, lb = labels[ai], labels[bi]
        union = np.array(
            [
                min(la.box2d[0], lb.box2d[0]),
                min(la.box2d[1], lb.box2d[1]),
                max(la.box2d[2], lb.box2d[2]),
                max(la.box2d[3], lb.box2d[3]),
            ]
        )
        box3d = la.box3d if la.box3d is not None else lb.box3d
        fused[ai] = ObjectLabel(
            class_name=la.class_name if la.class_name != "Unknown" else lb.class_name,
            box3d=None if box3d is None else box3d.copy(),
            box2d=union,
            track_id=la.track_id,
            source="fused",
        )

    out: list[ObjectLabel] = []
    for i, lb in enumerate(labels):
        if i in fused:
            out.append(fused[i])
        elif i not in used:
            out.append(lb)
    return out
