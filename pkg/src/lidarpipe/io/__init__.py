"""Type-agnostic readers/writers and the dataset indexer."""

from .dataset import FrameEntry, FrameIndex, load_frame, natural_key, scan_dataset
from .kitti import (
    RawCameraLabel,
    format_kitti_calib,
    format_kitti_label,
    read_kitti_bin,
    read_kitti_calib,
    read_kitti_label,
    write_kitti_bin,
)
from .pcd import read_pcd, write_pcd
from .png import read_image, read_png, write_png
from .replay import ReplaySensor

__all__ = [
    "FrameEntry",
    "FrameIndex",
    "RawCameraLabel",
    "ReplaySensor",
    "format_kitti_calib",
    "format_kitti_label",
    "load_frame",
    "natural_key",
    "read_image",
    "read_kitti_bin",
    "read_kitti_calib",
    "read_kitti_label",
    "read_pcd",
    "read_png",
    "scan_dataset",
    "write_kitti_bin",
    "write_pcd",
    "write_png",
]
