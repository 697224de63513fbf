"""Density clustering and cluster-to-object-box conversion."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..frame import Box3D, ObjectLabel, PointCloud

# (name, l_min, l_max, w_min, w_max, h_min, h_max); first match wins.
DEFAULT_CLASS_TABLE: list[list] = [
    ["pedestrian", 0.2, 1.2, 0.2, 1.2, 1.2, 2.2],
    ["cyclist", 1.2, 2.4, 0.2, 1.2, 1.2, 2.2],
    ["car", 2.4, 5.5, 1.4, 2.2, 1.2, 2.2],
    ["bus_truck", 5.5, 14.0, 2.0, 3.0, 2.2, 4.5],
]

MIN_EXTENT = 0.05  # degenerate clusters still get a real box


def _grid_neighbors(xyz: np.ndarray, eps: float) -> list[np.ndarray]:
    """Indices within eps of each point (self included), via an eps-sized grid."""
    n = len(xyz)
    cells = np.floor(xyz / eps).astype(np.int64)
    grid: dict[tuple[int, int, int], list[int]] = {}
    for i, c in enumerate(map(tuple, cells)):
        grid.setdefault(c, []).append(i)

    offsets = [
        (dx, dy, dz)
        for dx in (-1, 0, 1)
        for dy in (-1, 0, 1)
        for dz in (-1, 0, 1)
    ]
    eps2 = eps * eps
    neighbors: list[np.ndarray] = []
    for i in range(n):
        cx, cy, cz = cells[i]
        candidates: list[int] = []
        for dx, dy, dz in offsets:
            candidates.extend(grid.get((cx + dx, cy + dy, cz + dz), ()))
        cand = np.array(candidates, dtype=np.int64)
        d2 = np.sum((xyz[cand] - xyz[i]) ** 2, axis=1)
        neighbors.append(np.sort(cand[d2 <= eps2]))
    return neighbors


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def dbscan(pc: PointCloud | np.ndarray, eps: float, min_points: int) -> np.ndarray:
    """Per-point cluster ids; -1 is noise.

    Core points have >= min_points neighbors within eps (self included);
    clusters are connected components of core points plus border points,
    where a border point follows its lowest-index core neighbor. Ids are
    0..k-1 in order of each cluster's first member, so the labeling is a
    pure function of the input.
    """
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    if min_points < 1:
        raise ConfigError(f"min_points must be >= 1, got {min_points}")
    xyz = pc.xyz if isinstance(pc, PointCloud) else np.asarray(pc, dtype=np.float64)
    n = len(xyz)
    ids = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return ids

    neighbors = _grid_neighbors(xyz, eps)
    core = np.array([len(nb) >= min_points for nb in neighbors], dtype=bool)

    uf = _UnionFind(n)
    for i in np.nonzero(core)[0]:
        for j in neighbors[i]:
            if core[j]:
                uf.union(i, int(j))

    for i in range(n):
        if core[i]:
            ids[i] = uf.find(i)
        else:
            core_nb = [int(j) for j in neighbors[i] if core[j]]
            if core_nb:
                ids[i] = uf.find(min(core_nb))

    # Relabel roots as 0..k-1 by first appearance in point order.
    remap: dict[int, int] = {}
    for i in range(n):
        if ids[i] >= 0 and ids[i] not in remap:
            remap[ids[i]] = len(remap)
    for i in range(n):
        if ids[i] >= 0:
            ids[i] = remap[ids[i]]
    return ids


def _wrap_half_pi(angle: float) -> float:
    """Wrap into (-pi/2, pi/2]; boxes are symmetric under 180-degree turns."""
    while angle <= -np.pi / 2:
        angle += np.pi
    while angle > np.pi / 2:
        angle -= np.pi
    return angle


def _fit_box(points: np.ndarray) -> Box3D:
    """Yaw from the xy principal axis, extents from the rotated bounds."""
    xy = points[:, :2]
    centered = xy - xy.mean(axis=0)
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    principal = eigvecs[:, int(np.argmax(eigvals))]
    yaw = _wrap_half_pi(float(np.arctan2(principal[1], principal[0])))

    def rotated_bounds(angle: float):
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, s], [-s, c]])  # world -> box frame
        local = xy @ rot.T
        return local.min(axis=0), local.max(axis=0)

    lo, hi = rotated_bounds(yaw)
    if hi[0] - lo[0] < hi[1] - lo[1]:
        yaw = _wrap_half_pi(yaw + np.pi / 2)
        lo, hi = rotated_bounds(yaw)

    length = max(hi[0] - lo[0], MIN_EXTENT)
    width = max(hi[1] - lo[1], MIN_EXTENT)
    zmin, zmax = points[:, 2].min(), points[:, 2].max()
    height = max(zmax - zmin, MIN_EXTENT)

    mid_local = (lo + hi) / 2
    c, s = np.cos(yaw), np.sin(yaw)
    center_xy = np.array([[c, -s], [s, c]]) @ mid_local
    center = np.array([center_xy[0], center_xy[1], (zmin + zmax) / 2])
    return Box3D(center=center, extent=np.array([length, width, height]), yaw=yaw)


def classify_box(extent: np.ndarray, class_table: list[list]) -> str:
    """First class whose l/w/h ranges all contain the extents, else Unknown."""
    l, w, h = extent
    for name, l0, l1, w0, w1, h0, h1 in class_table:
        if l0 <= l <= l1 and w0 <= w <= w1 and h0 <= h <= h1:
            return str(name)
    return "Unknown"


def cluster_to_object(
    pc: PointCloud,
    cluster_ids: np.ndarray,
    class_table: list[list] | None = None,
) -> list[ObjectLabel]:
    """One oriented box per cluster, classified by size heuristics."""
    table = class_table if class_table is not None else DEFAULT_CLASS_TABLE
    ids = np.asarray(cluster_ids, dtype=np.int64)
    if len(ids) != len(pc):
        raise ConfigError(
            f"cluster_ids length {len(ids)} != point count {len(pc)}"
        )
    labels: list[ObjectLabel] = []
    for cid in np.unique(ids[ids >= 0]):
        box = _fit_box(pc.xyz[ids == cid])
        labels.append(
            ObjectLabel(
                class_name=classify_box(box.extent, table),
                box3d=box,
                source="lidar",
            )
        )
    return labels
