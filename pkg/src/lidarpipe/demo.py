"""Bundled example datasets and pipelines.

Both case-study pipelines ship as generators so the repository carries no
binary fixtures: a synthetic roadside set for the self-supervised
labeling pipeline, and a small KITTI-layout fixture for the detector
inference pipeline. Generation is seeded and byte-deterministic.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .engine import build_default_registry, new_pipeline
from .frame import Calibration, ImageRaster, PointCloud
from .io.kitti import format_kitti_calib, write_kitti_bin
from .io.pcd import write_pcd
from .io.png import write_png

ROADSIDE_FRAMES = 10
KITTI_FRAMES = 3

# Camera axes: x = -y_lidar, y = -z_lidar, z = x_lidar (forward).
KITTI_TR = np.array([
    [0.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
])
KITTI_P2 = np.array([
    [100.0, 0.0, 50.0, 0.0],
    [0.0, 100.0, 50.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
])


def fixture_calibration() -> Calibration:
    return Calibration(Tr_velo_to_cam=KITTI_TR, R0_rect=np.eye(3), P2=KITTI_P2)


def _box_cluster(rng: np.random.Generator, n: int, extent) -> np.ndarray:
    """Rigid local point pattern filling a box centered at the origin."""
    half = np.asarray(extent, dtype=np.float64) / 2
    return rng.uniform(-half, half, size=(n, 3))


def generate_roadside_dataset(
    directory: Path | str, n_frames: int = ROADSIDE_FRAMES, seed: int = 7
) -> list[int]:
    """Static ground plane plus two moving objects, written as .pcd files.

    Returns the true object count per frame, the oracle for label
    generation runs.
    """
    lidar_dir = Path(directory) / "lidar"
    lidar_dir.mkdir(parents=True, exist_ok=True)

    # Static scene: a 71x71 grid at ground level, identical every frame.
    axis = np.linspace(-20.0, 20.0, 71)
    gx, gy = np.meshgrid(axis, axis)
    plane = np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, 0.02)])

    rng = np.random.default_rng(seed)
    car_local = _box_cluster(rng, 400, (4.2, 1.8, 1.5))
    ped_local = _box_cluster(rng, 120, (0.5, 0.5, 1.7))

    counts = []
    for f in range(n_frames):
        car_center = np.array([-15.0 + 2.0 * f, 5.0, 1.35])   # z in [0.6, 2.1]
        ped_center = np.array([5.0, -8.0 + 1.0 * f, 1.45])    # z in [0.6, 2.3]
        xyz = np.vstack([plane, car_local + car_center, ped_local + ped_center])
        intensity = np.full(len(xyz), 0.5)
        pc = PointCloud(np.column_stack([xyz, intensity]))
        (lidar_dir / f"{f:06d}.pcd").write_bytes(write_pcd(pc, mode="binary"))
        counts.append(2)
    return counts


def _gradient_image(width: int = 100, height: int = 100, shade: int = 0) -> ImageRaster:
    x = np.linspace(0, 255, width, dtype=np.uint8)
    y = np.linspace(0, 255, height, dtype=np.uint8)
    data = np.zeros((height, width, 3), dtype=np.uint8)
    data[:, :, 0] = x[None, :]
    data[:, :, 1] = y[:, None]
    data[:, :, 2] = shade
    return ImageRaster(data)


def generate_kitti_fixture(
    directory: Path | str, n_frames: int = KITTI_FRAMES, seed: int = 11
) -> dict:
    """KITTI-layout directory: velodyne .bin, calib, labels, images.

    Labels are placed at known lidar centers; the returned mapping holds
    the ground truth per frame for verification.
    """
    root = Path(directory)
    dirs = {name: root / name for name in ("velodyne", "calib", "label", "image")}
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)

    calib = fixture_calibration()
    rng = np.random.default_rng(seed)
    truth: dict[str, list[dict]] = {}

    for f in range(n_frames):
        stem = f"{f:06d}"
        objects = [
            {"class_name": "Car", "center": np.array([12.0 + f, 1.0, 0.8]),
             "extent": np.array([4.0, 1.8, 1.6]), "yaw": 0.1 * f},
            {"class_name": "Pedestrian", "center": np.array([9.0, -2.0 + 0.5 * f, 0.9]),
             "extent": np.array([0.8, 0.8, 1.8]), "yaw": 0.0},
        ]
        truth[stem] = objects

        clusters = [
            _box_cluster(rng, 200, obj["extent"]) + obj["center"] for obj in objects
        ]
        ground = np.column_stack([
            rng.uniform(2, 30, 800), rng.uniform(-10, 10, 800), rng.uniform(-0.2, 0.0, 800)
        ])
        xyz = np.vstack([ground, *clusters])
        pc = PointCloud(np.column_stack([xyz, np.full(len(xyz), 0.3)]))
        (dirs["velodyne"] / f"{stem}.bin").write_bytes(write_kitti_bin(pc))
        (dirs["calib"] / f"{stem}.txt").write_text(format_kitti_calib(calib))
        (dirs["image"] / f"{stem}.png").write_bytes(write_png(_gradient_image(shade=40 * f)))

        lines = []
        for obj in objects:
            l, w, h = obj["extent"]
            bottom = obj["center"] - np.array([0.0, 0.0, h / 2])
            cam_loc = KITTI_TR @ np.append(bottom, 1.0)
            ry = -obj["yaw"] - np.pi / 2
            lines.append(
                f"{obj['class_name']} 0.00 0 0.00 40.00 40.00 60.00 60.00 "
                f"{h:.6f} {w:.6f} {l:.6f} "
                f"{cam_loc[0]:.6f} {cam_loc[1]:.6f} {cam_loc[2]:.6f} {ry:.6f}"
            )
        (dirs["label"] / f"{stem}.txt").write_text("\n".join(lines) + "\n")
    return truth


def _enable(config: PipelineConfig, category: str, name: str, **params) -> None:
    entry = config.find(category, name)
    entry.enabled = True
    entry.params.update(params)


def make_roadside_pipeline(directory: Path | str) -> list[int]:
    """Self-supervised labeling pipeline over the synthetic roadside set.

    crop -> voxel-occupancy background filter -> dbscan -> cluster_to_object
    -> flat dataset export. Returns the oracle object count per frame.
    """
    directory = Path(directory)
    registry = build_default_registry()
    config_path = new_pipeline(directory, registry)
    counts = generate_roadside_dataset(directory / "data")

    config = PipelineConfig.load(config_path)
    config.data.main_dir = str(directory / "data")
    config.data.pcd_type = ".pcd"
    config.data.lidar_enabled = True
    _enable(config, "lidar", "crop",
            min_x=-30.0, min_y=-30.0, min_z=-5.0, max_x=30.0, max_y=30.0, max_z=10.0)
    _enable(config, "lidar", "bg_filter_stdf",
            voxel_size=0.5, threshold=0.5, frames_n=ROADSIDE_FRAMES, skip_m=0, repeat_r=1)
    _enable(config, "lidar", "dbscan", eps=0.7, min_points=5)
    _enable(config, "lidar", "cluster_to_object")
    _enable(config, "post", "export_pcdet", out_dir="output/pcdet")
    config.save(config_path)
    return counts


def make_detector_pipeline(directory: Path | str) -> dict:
    """Detector-inference pipeline over the KITTI-format fixture.

    crop -> stub detector (deep model stand-in) -> 2D boxes from 3D ->
    ground-truth conversion into the lidar frame -> projected-point image
    overlay. Returns the fixture ground truth.
    """
    directory = Path(directory)
    registry = build_default_registry()
    config_path = new_pipeline(directory, registry)
    truth = generate_kitti_fixture(directory / "data")

    config = PipelineConfig.load(config_path)
    config.data.main_dir = str(directory / "data")
    config.data.lidar_dir = "velodyne"
    config.data.camera_dir = "image"
    config.data.pcd_type = ".bin"
    config.data.camera_enabled = True
    config.data.calib_enabled = True
    config.data.label_enabled = True
    _enable(config, "lidar", "crop",
            min_x=0.0, min_y=-15.0, min_z=-3.0, max_x=40.0, max_y=15.0, max_z=3.0)
    _enable(config, "lidar", "stub_detector",
            boxes=[[12.0, 1.0, 0.8, 4.0, 1.8, 1.6, 0.0, "Car"]], source="lidar")
    _enable(config, "lidar", "gen_bbox_2d")
    _enable(config, "label", "convert_labels_camera_to_lidar")
    _enable(config, "camera", "project_points_to_image", point_size=2, max_depth=40.0)
    config.save(config_path)
    return truth
