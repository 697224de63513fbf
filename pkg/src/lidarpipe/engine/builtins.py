"""Built-in pipeline functions.

Every function speaks the standard contract (frame, params, config) and
reads/writes frame slots only. State that must survive across frames
(background-filter caches, track state) lives in closures, so each call
to :func:`build_default_registry` yields an independent pipeline.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .. import algos
from ..config import PipelineConfig
from ..frame import Box3D, Calibration, Frame, ObjectLabel
from ..io.dataset import scan_dataset
from ..io.kitti import read_kitti_bin
from ..io.pcd import read_pcd
from .registry import FunctionDef, FunctionRegistry, ParamSpec


def _bounds_valid(params: dict) -> Optional[str]:
    for axis in ("x", "y", "z"):
        if params[f"min_{axis}"] > params[f"max_{axis}"]:
            return f"min_{axis} exceeds max_{axis}"
    return None


def _bounds(params: dict):
    lo = [params["min_x"], params["min_y"], params["min_z"]]
    hi = [params["max_x"], params["max_y"], params["max_z"]]
    return lo, hi


_BOUND_PARAMS = (
    ParamSpec("min_x", "float", -100.0),
    ParamSpec("min_y", "float", -100.0),
    ParamSpec("min_z", "float", -10.0),
    ParamSpec("max_x", "float", 100.0),
    ParamSpec("max_y", "float", 100.0),
    ParamSpec("max_z", "float", 10.0),
)


def _load_sample_clouds(config: PipelineConfig, n: int, m_skip: int, r: int):
    """Sample stored frames on the gather/skip schedule for filter builds."""
    index = scan_dataset(config)
    wanted = n * r
    picks = algos.sample_frame_indices(len(index), n, m_skip, r)
    clouds = []
    for i in picks:
        path = index[i].pcd_path
        if path is None:
            continue
        data = path.read_bytes()
        clouds.append(read_kitti_bin(data) if path.suffix == ".bin" else read_pcd(data))
    return clouds, wanted


def build_default_registry() -> FunctionRegistry:
    """Fresh registry with all built-ins; closures hold per-pipeline state."""
    reg = FunctionRegistry()

    # -- pre ---------------------------------------------------------------

    def sanitize_points(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        frame.put("point_cloud", algos.sanitize_pcd(pc))

    reg.register(FunctionDef(
        category="pre",
        name="sanitize_points",
        run=sanitize_points,
        default_priority=10,
        description="Drop points with NaN/inf coordinates or exact zero position",
    ))

    def manual_calibration(frame: Frame, params: dict, config) -> None:
        frame.put("calibration", Calibration(
            Tr_velo_to_cam=np.array(params["tr_velo_to_cam"], dtype=np.float64).reshape(3, 4),
            R0_rect=np.array(params["r0_rect"], dtype=np.float64).reshape(3, 3),
            P2=np.array(params["p2"], dtype=np.float64).reshape(3, 4),
        ))

    identity_tr = [1.0, 0, 0, 0, 0, 1.0, 0, 0, 0, 0, 1.0, 0]
    reg.register(FunctionDef(
        category="pre",
        name="manual_calibration",
        run=manual_calibration,
        params=(
            ParamSpec("tr_velo_to_cam", "list", list(identity_tr)),
            ParamSpec("r0_rect", "list", [1.0, 0, 0, 0, 1.0, 0, 0, 0, 1.0]),
            ParamSpec("p2", "list", list(identity_tr)),
        ),
        default_priority=20,
        description="Assemble the lidar-to-image calibration chain from numbers",
    ))

    # -- lidar ---------------------------------------------------------------

    def rotate_fn(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        angles = (params["roll"], params["pitch"], params["yaw"])
        frame.put("point_cloud", algos.rotate(pc, angles))

    reg.register(FunctionDef(
        category="lidar",
        name="rotate",
        run=rotate_fn,
        params=(
            ParamSpec("roll", "float", 0.0),
            ParamSpec("pitch", "float", 0.0),
            ParamSpec("yaw", "float", 0.0),
        ),
        default_priority=10,
        description="Rotate the cloud by intrinsic x-y-z Euler angles (radians)",
    ))

    def crop_fn(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        lo, hi = _bounds(params)
        frame.put("point_cloud", algos.crop(pc, lo, hi))

    reg.register(FunctionDef(
        category="lidar",
        name="crop",
        run=crop_fn,
        params=_BOUND_PARAMS,
        default_priority=20,
        description="Keep points inside the axis-aligned bounds (inclusive)",
        validate=_bounds_valid,
    ))

    def colorize(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        img = frame.require("image")
        calib = frame.require("calibration")
        frame.put("point_cloud", algos.colorize_points_from_image(pc, img, calib))

    reg.register(FunctionDef(
        category="lidar",
        name="colorize_from_image",
        run=colorize,
        default_priority=30,
        description="Color points from their projected image pixels",
    ))

    stdf_cache: dict = {}

    def bg_filter_stdf(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        key = (
            params["voxel_size"], params["threshold"],
            params["frames_n"], params["skip_m"], params["repeat_r"],
            config.data.main_dir, config.data.lidar_dir, config.data.pcd_type,
        )
        if stdf_cache.get("key") != key:
            clouds, wanted = _load_sample_clouds(
                config, params["frames_n"], params["skip_m"], params["repeat_r"]
            )
            if len(clouds) < wanted:
                frame.log(
                    "warning", "bg_filter_stdf",
                    f"built from {len(clouds)} frames, schedule wanted {wanted}",
                )
            stdf_cache["key"] = key
            stdf_cache["filter"] = algos.stdf_build(
                clouds, params["voxel_size"], params["threshold"]
            )
        frame.put("point_cloud", algos.stdf_apply(stdf_cache["filter"], pc))

    reg.register(FunctionDef(
        category="lidar",
        name="bg_filter_stdf",
        run=bg_filter_stdf,
        params=(
            ParamSpec("voxel_size", "float", 0.5, min=1e-3),
            ParamSpec("threshold", "float", 0.5, min=1e-6, max=1.0),
            ParamSpec("frames_n", "int", 10, min=1),
            ParamSpec("skip_m", "int", 0, min=0),
            ParamSpec("repeat_r", "int", 1, min=1),
        ),
        default_priority=40,
        description="Voxel-occupancy background filter from sampled frames",
    ))

    dhist_cache: dict = {}

    def bg_filter_dhistdpp(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        key = (
            params["bin_width"], params["max_range"],
            params["frames_n"], params["skip_m"], params["repeat_r"],
            config.data.main_dir, config.data.lidar_dir, config.data.pcd_type,
        )
        if dhist_cache.get("key") != key:
            clouds, wanted = _load_sample_clouds(
                config, params["frames_n"], params["skip_m"], params["repeat_r"]
            )
            if len(clouds) < wanted:
                frame.log(
                    "warning", "bg_filter_dhistdpp",
                    f"built from {len(clouds)} frames, schedule wanted {wanted}",
                )
            dhist_cache["key"] = key
            dhist_cache["filter"] = algos.dhistdpp_build(
                clouds, params["bin_width"], params["max_range"]
            )
        frame.put(
            "point_cloud",
            algos.dhistdpp_apply(dhist_cache["filter"], pc, params["tolerance"]),
        )

    reg.register(FunctionDef(
        category="lidar",
        name="bg_filter_dhistdpp",
        run=bg_filter_dhistdpp,
        params=(
            ParamSpec("bin_width", "float", 0.5, min=1e-3),
            ParamSpec("max_range", "float", 120.0, min=1.0),
            ParamSpec("tolerance", "float", 0.3, min=0.0),
            ParamSpec("frames_n", "int", 10, min=1),
            ParamSpec("skip_m", "int", 0, min=0),
            ParamSpec("repeat_r", "int", 1, min=1),
        ),
        default_priority=41,
        description="Per-point range-histogram background filter (organized clouds)",
    ))

    def dbscan_fn(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        frame.put("cluster_ids", algos.dbscan(pc, params["eps"], params["min_points"]))

    reg.register(FunctionDef(
        category="lidar",
        name="dbscan",
        run=dbscan_fn,
        params=(
            ParamSpec("eps", "float", 0.7, min=1e-6),
            ParamSpec("min_points", "int", 5, min=1),
        ),
        default_priority=50,
        description="Density clustering; writes per-point cluster ids (-1 noise)",
    ))

    def cluster_to_object_fn(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        ids = frame.require("cluster_ids")
        frame.labels.extend(algos.cluster_to_object(pc, ids, params["class_table"]))

    reg.register(FunctionDef(
        category="lidar",
        name="cluster_to_object",
        run=cluster_to_object_fn,
        params=(
            ParamSpec("class_table", "list", [list(row) for row in algos.DEFAULT_CLASS_TABLE]),
        ),
        default_priority=60,
        description="Fit an oriented box per cluster and classify by size",
    ))

    def stub_detector(frame: Frame, params: dict, config) -> None:
        # Stand-in for deep detectors; emits the configured boxes verbatim.
        for row in params["boxes"]:
            x, y, z, l, w, h, yaw, name = row
            frame.labels.append(ObjectLabel(
                class_name=str(name),
                box3d=Box3D(center=[x, y, z], extent=[l, w, h], yaw=yaw),
                source=params["source"],
            ))

    reg.register(FunctionDef(
        category="lidar",
        name="stub_detector",
        run=stub_detector,
        params=(
            ParamSpec("boxes", "list", []),
            ParamSpec("source", "str", "stub"),
        ),
        default_priority=65,
        description="Fixed-output detector stub standing in for deep models",
    ))

    def gen_bbox_2d_fn(frame: Frame, params: dict, config) -> None:
        calib = frame.require("calibration")
        if frame.image is not None:
            width, height = frame.image.width, frame.image.height
        else:
            width, height = params["img_width"], params["img_height"]
        algos.gen_bbox_2d(frame.labels, calib, width, height)

    reg.register(FunctionDef(
        category="lidar",
        name="gen_bbox_2d",
        run=gen_bbox_2d_fn,
        params=(
            ParamSpec("img_width", "int", 1242, min=1),
            ParamSpec("img_height", "int", 375, min=1),
        ),
        default_priority=70,
        description="Project 3D boxes into 2D image boxes via the calibration chain",
    ))

    # -- camera --------------------------------------------------------------

    def project_points(frame: Frame, params: dict, config) -> None:
        img = frame.require("image")
        pc = frame.require("point_cloud")
        calib = frame.require("calibration")
        frame.put("image", algos.project_points_to_image(
            img, pc, calib,
            point_size=params["point_size"],
            max_depth=params["max_depth"],
        ))

    reg.register(FunctionDef(
        category="camera",
        name="project_points_to_image",
        run=project_points,
        params=(
            ParamSpec("point_size", "int", 2, min=1, max=64),
            ParamSpec("max_depth", "float", 50.0, min=0.1),
        ),
        default_priority=10,
        description="Overlay depth-colored projected points on the image",
    ))

    # -- label ---------------------------------------------------------------

    def convert_labels(frame: Frame, params: dict, config) -> None:
        raw = frame.require("camera_labels_raw")
        calib = frame.require("calibration")
        frame.labels.extend(algos.convert_labels_camera_to_lidar(raw, calib))

    reg.register(FunctionDef(
        category="label",
        name="convert_labels_camera_to_lidar",
        run=convert_labels,
        default_priority=10,
        description="Turn camera-frame dataset labels into lidar-frame boxes",
    ))

    def remove_oob_labels(frame: Frame, params: dict, config) -> None:
        lo, hi = _bounds(params)
        frame.put("labels", algos.remove_out_of_bound_labels(frame.labels, lo, hi))

    reg.register(FunctionDef(
        category="label",
        name="remove_out_of_bound_labels",
        run=remove_oob_labels,
        params=_BOUND_PARAMS,
        default_priority=20,
        description="Drop labels whose box center leaves the bounds",
        validate=_bounds_valid,
    ))

    def remove_sparse_labels(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        frame.put("labels", algos.remove_less_point_labels(
            frame.labels, pc, params["min_points"]
        ))

    reg.register(FunctionDef(
        category="label",
        name="remove_less_point_labels",
        run=remove_sparse_labels,
        params=(ParamSpec("min_points", "int", 5, min=0),),
        default_priority=30,
        description="Drop labels whose box contains too few points",
    ))

    # -- post ----------------------------------------------------------------

    def fuse_fn(frame: Frame, params: dict, config) -> None:
        frame.put("labels", algos.fuse_2d_bboxes(
            frame.labels,
            params["modality_a"],
            params["modality_b"],
            params["iou_threshold"],
        ))

    reg.register(FunctionDef(
        category="post",
        name="fuse_2d_bboxes",
        run=fuse_fn,
        params=(
            ParamSpec("modality_a", "str", "lidar"),
            ParamSpec("modality_b", "str", "camera"),
            ParamSpec("iou_threshold", "float", 0.3, min=0.0, max=1.0),
        ),
        default_priority=10,
        description="Merge per-modality 2D boxes by greedy IoU matching",
    ))

    track_state = algos.TrackState()

    def past_trajectory(frame: Frame, params: dict, config) -> None:
        algos.kdtree_past_trajectory(
            frame.labels, track_state,
            params["match_radius"], params["max_history"],
        )

    reg.register(FunctionDef(
        category="post",
        name="past_trajectory_kdtree",
        run=past_trajectory,
        params=(
            ParamSpec("match_radius", "float", 2.0, min=0.0),
            ParamSpec("max_history", "int", 20, min=1),
        ),
        default_priority=20,
        description="Track objects across frames by nearest previous center",
    ))

    def spline_future(frame: Frame, params: dict, config) -> None:
        algos.cubic_spline_future(
            frame.labels, params["k_future"],
            dt=params["dt"], history_dt=params["history_dt"],
            warn=lambda msg: frame.log("warning", "future_trajectory_spline", msg),
        )

    reg.register(FunctionDef(
        category="post",
        name="future_trajectory_spline",
        run=spline_future,
        params=(
            ParamSpec("k_future", "int", 5, min=1),
            ParamSpec("dt", "float", 0.1, min=1e-6),
            ParamSpec("history_dt", "float", 0.1, min=1e-6),
        ),
        default_priority=30,
        description="Extrapolate track futures from a cubic spline fit",
    ))

    def poly_future(frame: Frame, params: dict, config) -> None:
        algos.polyfit_future(
            frame.labels, params["degree"], params["k_future"],
            warn=lambda msg: frame.log("warning", "future_trajectory_polyfit", msg),
        )

    reg.register(FunctionDef(
        category="post",
        name="future_trajectory_polyfit",
        run=poly_future,
        params=(
            ParamSpec("degree", "int", 2, min=0, max=10),
            ParamSpec("k_future", "int", 5, min=1),
        ),
        default_priority=31,
        description="Extrapolate track futures from a least-squares polynomial",
    ))

    def velocity_fn(frame: Frame, params: dict, config) -> None:
        fps = params["fps"] if params["fps"] > 0 else config.data.replay_hz
        algos.velocity_from_trajectory(frame.labels, fps)

    reg.register(FunctionDef(
        category="post",
        name="velocity_from_trajectory",
        run=velocity_fn,
        params=(ParamSpec("fps", "float", 0.0, min=0.0),),
        default_priority=40,
        description="Finite-difference velocity from the last two track points",
    ))

    def _resolve_out_dir(params: dict, config) -> Path:
        out = Path(params["out_dir"])
        if not out.is_absolute():
            base = getattr(config, "base_dir", None)
            out = (Path(base) if base else Path.cwd()) / out
        return out

    def export_fn(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        algos.export_pcdet(pc, frame.labels, frame.stem, _resolve_out_dir(params, config))

    reg.register(FunctionDef(
        category="post",
        name="export_pcdet",
        run=export_fn,
        params=(ParamSpec("out_dir", "str", "output/pcdet"),),
        default_priority=50,
        description="Write points/ and labels/ in the flat detector-toolbox layout",
    ))

    def export_per_object_fn(frame: Frame, params: dict, config) -> None:
        pc = frame.require("point_cloud")
        algos.export_per_object_pcdet(
            pc, frame.labels, frame.stem, _resolve_out_dir(params, config)
        )

    reg.register(FunctionDef(
        category="post",
        name="export_per_object_pcdet",
        run=export_per_object_fn,
        params=(ParamSpec("out_dir", "str", "output/pcdet"),),
        default_priority=51,
        description="Frame export plus per-object cropped clouds",
    ))

    return reg
