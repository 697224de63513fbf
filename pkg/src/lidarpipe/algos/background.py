"""Background subtraction for non-moving roadside sensors.

Two models: a voxel-occupancy filter built from chronologically spread
sample frames, and a per-point-index range-histogram filter for
organized clouds with stable beam directions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import AlgoError, ConfigError
from ..frame import PointCloud

logger = logging.getLogger(__name__)


def sample_frame_indices(total: int, n: int, m_skip: int, r: int) -> list[int]:
    """Gather-n / skip-m sampling repeated r times, truncated at total."""
    out: list[int] = []
    pos = 0
    for _ in range(r):
        for _ in range(n):
            if pos >= total:
                return out
            out.append(pos)
            pos += 1
        pos += m_skip
    return out


def voxel_keys(xyz: np.ndarray, voxel_size: float) -> np.ndarray:
    """Integer voxel coordinates by flooring, shape (N, 3)."""
    return np.floor(np.asarray(xyz, dtype=np.float64) / voxel_size).astype(np.int64)


@dataclass
class VoxelOccupancyFilter:
    """Spatio-temporal density model: voxels seen in enough frames are background."""

    voxel_size: float
    occupancy: dict[tuple[int, int, int], float]
    threshold: float
    frames_sampled: int
    background: set = field(init=False)

    def __post_init__(self):
        self.background = {
            k for k, ratio in self.occupancy.items() if ratio >= self.threshold
        }

    kind = "STDF"


def stdf_build(
    frames: Iterable[PointCloud],
    voxel_size: float,
    threshold: float,
) -> VoxelOccupancyFilter:
    """Occupancy ratio per voxel over the given sample frames.

    The caller selects the frames (see :func:`sample_frame_indices` for
    the gather/skip schedule).
    """
    if voxel_size <= 0:
        raise ConfigError(f"voxel_size must be positive, got {voxel_size}")
    if not (0 < threshold <= 1):
        raise ConfigError(f"threshold must be in (0, 1], got {threshold}")
    counts: dict[tuple[int, int, int], int] = {}
    n_frames = 0
    for pc in frames:
        n_frames += 1
        keys = voxel_keys(pc.xyz, voxel_size)
        for key in set(map(tuple, keys)):
            counts[key] = counts.get(key, 0) + 1
    if n_frames == 0:
        raise ConfigError("background filter build needs at least one frame")
    occupancy = {k: c / n_frames for k, c in counts.items()}
    return VoxelOccupancyFilter(
        voxel_size=voxel_size,
        occupancy=occupancy,
        threshold=threshold,
        frames_sampled=n_frames,
    )


def stdf_apply(filt: VoxelOccupancyFilter, pc: PointCloud) -> PointCloud:
    """Foreground-only cloud: points in background voxels are removed."""
    if len(pc) == 0:
        return pc.select(np.zeros(0, dtype=bool))
    keys = voxel_keys(pc.xyz, filt.voxel_size)
    bg = filt.background
    mask = np.fromiter(
        (tuple(k) not in bg for k in keys), dtype=bool, count=len(keys)
    )
    return pc.select(mask)


@dataclass
class RangeHistogramFilter:
    """Per-point-index modal range, for organized clouds only."""

    bin_width: float
    max_range: float
    background_range: np.ndarray  # modal-bin center per point index
    frames_seen: int
    point_count: int

    kind = "DHistDPP"


def dhistdpp_build(
    frames: Sequence[PointCloud],
    bin_width: float,
    max_range: float,
) -> RangeHistogramFilter:
    """Histogram each point index's range across frames; mode wins.

    All build frames must be organized and share one point count. Ties
    between bins resolve to the nearer bin for determinism.
    """
    if bin_width <= 0:
        raise ConfigError(f"bin_width must be positive, got {bin_width}")
    frames = list(frames)
    if not frames:
        raise ConfigError("background filter build needs at least one frame")
    for pc in frames:
        if pc.organized is None:
            raise AlgoError("range-histogram filter needs organized clouds")
    count = len(frames[0])
    if any(len(pc) != count for pc in frames):
        raise AlgoError("range-histogram build frames must share one point count")

    n_bins = max(int(np.ceil(max_range / bin_width)), 1)
    hist = np.zeros((count, n_bins), dtype=np.int64)
    for pc in frames:
        ranges = np.linalg.norm(pc.xyz, axis=1)
        bins = np.clip((ranges / bin_width).astype(np.int64), 0, n_bins - 1)
        hist[np.arange(count), bins] += 1
    modal = hist.argmax(axis=1)  # argmax takes the lowest bin on ties
    background_range = (modal + 0.5) * bin_width
    return RangeHistogramFilter(
        bin_width=bin_width,
        max_range=max_range,
        background_range=background_range,
        frames_seen=len(frames),
        point_count=count,
    )


def dhistdpp_apply(
    filt: RangeHistogramFilter, pc: PointCloud, tolerance: float
) -> PointCloud:
    """Drop point i when its range sits within tolerance of the modal range."""
    if len(pc) != filt.point_count:
        raise AlgoError(
            f"cloud has {len(pc)} points but the filter was built from {filt.point_count}"
        )
    ranges = np.linalg.norm(pc.xyz, axis=1)
    keep = np.abs(ranges - filt.background_range) > tolerance
    return pc.select(keep)
