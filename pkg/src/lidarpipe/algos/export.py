"""Dataset export in the flat detector-toolbox layout.

points/<stem>.bin holds float32 (x, y, z, intensity); labels/<stem>.txt
one "x y z dx dy dz heading class" line per label. The per-object
variant additionally crops each label's points into objects/.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import AlgoError
from ..frame import ObjectLabel, PointCloud
from ..io.kitti import write_kitti_bin
from .labels import points_in_box


def format_label_line(label: ObjectLabel) -> str:
    box = label.box3d
    values = [*box.center, *box.extent, box.yaw]
    return " ".join(f"{v:.6f}" for v in values) + f" {label.class_name}"


def _write(path: Path, data: bytes | str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, bytes):
            path.write_bytes(data)
        else:
            path.write_text(data)
    except OSError as exc:
        raise AlgoError(f"cannot write {path}: {exc}")


def export_pcdet(
    pc: PointCloud,
    labels: list[ObjectLabel],
    stem: str,
    out_dir: Path | str,
) -> list[Path]:
    """Write one frame's points and labels; returns the created paths."""
    out = Path(out_dir)
    points_path = out / "points" / f"{stem}.bin"
    labels_path = out / "labels" / f"{stem}.txt"
    _write(points_path, write_kitti_bin(pc))
    lines = [format_label_line(lb) for lb in labels if lb.box3d is not None]
    _write(labels_path, "\n".join(lines) + ("\n" if lines else ""))
    return [points_path, labels_path]


def export_per_object_pcdet(
    pc: PointCloud,
    labels: list[ObjectLabel],
    stem: str,
    out_dir: Path | str,
) -> list[Path]:
    """Frame export plus one cropped cloud + label line per object."""
    paths = export_pcdet(pc, labels, stem, out_dir)
    out = Path(out_dir)
    k = 0
    for lb in labels:
        if lb.box3d is None:
            continue
        mask = points_in_box(pc.xyz, lb.box3d)
        obj_bin = out / "objects" / f"{stem}_{k}.bin"
        obj_txt = out / "objects" / f"{stem}_{k}.txt"
        _write(obj_bin, write_kitti_bin(pc.select(mask)))
        _write(obj_txt, format_label_line(lb) + "\n")
        paths.extend([obj_bin, obj_txt])
        k += 1
    return paths
