"""Built-in algorithms operating on frame slots."""

from .background import (
    RangeHistogramFilter,
    VoxelOccupancyFilter,
    dhistdpp_apply,
    dhistdpp_build,
    sample_frame_indices,
    stdf_apply,
    stdf_build,
    voxel_keys,
)
from .clustering import (
    DEFAULT_CLASS_TABLE,
    classify_box,
    cluster_to_object,
    dbscan,
)
from .export import export_pcdet, export_per_object_pcdet, format_label_line
from .labels import (
    convert_labels_camera_to_lidar,
    fuse_2d_bboxes,
    iou_2d,
    points_in_box,
    remove_less_point_labels,
    remove_out_of_bound_labels,
    wrap_pi,
)
from .pointcloud import (
    colorize_points_from_image,
    crop,
    rotate,
    rotation_matrix,
    sanitize_pcd,
)
from .projection import (
    box3d_corners,
    depth_color,
    gen_bbox_2d,
    lidar_to_camera_matrix,
    project_lidar_to_image,
    project_points_to_image,
)
from .tracking import (
    TrackState,
    cubic_spline_future,
    kdtree_past_trajectory,
    polyfit_future,
    velocity_from_trajectory,
)

__all__ = [
    "DEFAULT_CLASS_TABLE",
    "RangeHistogramFilter",
    "TrackState",
    "VoxelOccupancyFilter",
    "box3d_corners",
    "classify_box",
    "cluster_to_object",
    "colorize_points_from_image",
    "convert_labels_camera_to_lidar",
    "crop",
    "cubic_spline_future",
    "dbscan",
    "depth_color",
    "dhistdpp_apply",
    "dhistdpp_build",
    "export_pcdet",
    "export_per_object_pcdet",
    "format_label_line",
    "fuse_2d_bboxes",
    "gen_bbox_2d",
    "iou_2d",
    "kdtree_past_trajectory",
    "lidar_to_camera_matrix",
    "points_in_box",
    "polyfit_future",
    "project_lidar_to_image",
    "project_points_to_image",
    "remove_less_point_labels",
    "remove_out_of_bound_labels",
    "rotate",
    "rotation_matrix",
    "sample_frame_indices",
    "sanitize_pcd",
    "stdf_apply",
    "stdf_build",
    "velocity_from_trajectory",
    "voxel_keys",
    "wrap_pi",
]
