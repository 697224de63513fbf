"""Dataset indexing: pair files across streams by basename stem."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..config import PipelineConfig
from ..errors import ConfigError, ParseError
from ..frame import Frame
from .kitti import read_kitti_bin, read_kitti_calib, read_kitti_label
from .pcd import read_pcd
from .png import read_image

logger = logging.getLogger(__name__)


def natural_key(stem: str):
    """Sort key treating digit runs as numbers: 2 before 10."""
    parts = re.split(r"(\d+)", stem)
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


@dataclass
class FrameEntry:
    stem: str
    pcd_path: Optional[Path] = None
    img_path: Optional[Path] = None
    calib_path: Optional[Path] = None
    label_path: Optional[Path] = None


@dataclass
class FrameIndex:
    entries: list[FrameEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> FrameEntry:
        return self.entries[i]


def _list_stems(directory: Path, extension: str) -> dict[str, Path]:
    if not extension.startswith("."):
        extension = "." + extension
    if not directory.is_dir():
        return {}
    return {p.stem: p for p in directory.iterdir() if p.is_file() and p.suffix == extension}


def scan_dataset(config: PipelineConfig) -> FrameIndex:
    """Build the frame index from the config's data section.

    Stems come from the primary stream (lidar when enabled, else camera);
    other enabled streams contribute entries where their stem matches.
    """
    data = config.data
    main = Path(data.main_dir)
    if not data.main_dir or not main.is_dir():
        raise ConfigError(f"data.main_dir does not exist: '{data.main_dir}'")
    if not (data.lidar_enabled or data.camera_enabled):
        raise ConfigError("no primary stream: enable lidar or camera data")

    lidar = _list_stems(main / data.lidar_dir, data.pcd_type) if data.lidar_enabled else {}
    camera = _list_stems(main / data.camera_dir, data.img_type) if data.camera_enabled else {}
    calib = _list_stems(main / data.calib_dir, data.calib_type) if data.calib_enabled else {}
    label = _list_stems(main / data.label_dir, data.label_type) if data.label_enabled else {}

    primary = lidar if data.lidar_enabled else camera
    stems = sorted(primary.keys(), key=natural_key)
    if not stems:
        logger.warning("dataset scan found no frames under %s", main)

    entries = [
        FrameEntry(
            stem=s,
            pcd_path=lidar.get(s),
            img_path=camera.get(s),
            calib_path=calib.get(s),
            label_path=label.get(s),
        )
        for s in stems
    ]
    return FrameIndex(entries)


def load_frame(index: FrameIndex, i: int, config: PipelineConfig) -> Frame:
    """Read one frame's files into a fresh Frame.

    KITTI-style camera-frame labels are parked in the
    ``camera_labels_raw`` extra; converting them into lidar-frame labels
    is a label-category pipeline function.
    """
    entry = index[i]
    frame = Frame(index=i, timestamp=i / max(config.data.replay_hz, 1e-9), stem=entry.stem)
    if entry.pcd_path is not None:
        data = entry.pcd_path.read_bytes()
        if entry.pcd_path.suffix == ".bin":
            frame.put("point_cloud", read_kitti_bin(data))
        else:
            frame.put("point_cloud", read_pcd(data))
    if entry.img_path is not None:
        try:
            frame.put("image", read_image(entry.img_path.read_bytes()))
        except ParseError as exc:
            frame.log("error", "reader", f"{entry.img_path.name}: {exc}")
    if entry.calib_path is not None:
        try:
            frame.put("calibration", read_kitti_calib(entry.calib_path.read_text()))
        except ParseError as exc:
            frame.log("error", "reader", f"{entry.calib_path.name}: {exc}")
    if entry.label_path is not None:
        raw, errors = read_kitti_label(entry.label_path.read_text())
        frame.put("camera_labels_raw", raw)
        for msg in errors:
            frame.log("warning", "reader", f"{entry.label_path.name}: {msg}")
    return frame
