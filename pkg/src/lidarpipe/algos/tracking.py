"""Frame-to-frame tracking and trajectory prediction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from ..frame import ObjectLabel

Warn = Optional[Callable[[str], None]]


@dataclass
class TrackState:
    """Previous-frame centers and trajectories keyed by track id."""

    centers: dict[int, np.ndarray] = field(default_factory=dict)
    trajectories: dict[int, list[np.ndarray]] = field(default_factory=dict)
    next_id: int = 0

    def fresh_id(self) -> int:
        tid = self.next_id
        self.next_id += 1
        return tid


def kdtree_past_trajectory(
    labels: list[ObjectLabel],
    state: TrackState,
    match_radius: float,
    max_history: int,
) -> list[ObjectLabel]:
    """Link labels to last frame's tracks by nearest center within radius.

    Matching is greedy by ascending distance and one-to-one; unmatched
    labels open fresh tracks. Each label leaves with a track_id and its
    past_trajectory (oldest to newest, capped at max_history). The state
    is replaced with this frame's tracks.
    """
    boxed = [(i, lb) for i, lb in enumerate(labels) if lb.box3d is not None]
    centers = np.array([lb.box3d.center for _, lb in boxed]).reshape(-1, 3)

    prev_ids = list(state.centers.keys())
    assignments: dict[int, int] = {}  # boxed position -> track id
    if prev_ids and len(boxed):
        prev_centers = np.array([state.centers[t] for t in prev_ids])
        tree = cKDTree(prev_centers)
        candidates = []
        for pos in range(len(boxed)):
            for j in tree.query_ball_point(centers[pos], match_radius):
                dist = float(np.linalg.norm(centers[pos] - prev_centers[j]))
                candidates.append((dist, pos, j))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        used_cur: set[int] = set()
        used_prev: set[int] = set()
        for dist, pos, j in candidates:
            if pos in used_cur or j in used_prev:
                continue
            used_cur.add(pos)
            used_prev.add(j)
            assignments[pos] = prev_ids[j]

    new_centers: dict[int, np.ndarray] = {}
    new_trajs: dict[int, list[np.ndarray]] = {}
    for pos, (i, lb) in enumerate(boxed):
        center = centers[pos]
        if pos in assignments:
            tid = assignments[pos]
            traj = state.trajectories.get(tid, []) + [center]
        else:
            tid = state.fresh_id()
            traj = [center]
        traj = traj[-max_history:]
        lb.track_id = tid
        lb.past_trajectory = np.array(traj)
        new_centers[tid] = center
        new_trajs[tid] = traj
    state.centers = new_centers
    state.trajectories = new_trajs
    return labels


def _predict_spline(past: np.ndarray, k_future: int, step: float) -> np.ndarray:
    t = np.arange(len(past), dtype=np.float64)
    spline = CubicSpline(t, past, axis=0)  # not-a-knot: exact on cubic tracks
    t_future = (len(past) - 1) + step * np.arange(1, k_future + 1)
    return spline(t_future)


def cubic_spline_future(
    labels: list[ObjectLabel],
    k_future: int,
    dt: float = 1.0,
    history_dt: float = 0.0,
    warn: Warn = None,
) -> list[ObjectLabel]:
    """Extend each track by extrapolating its final spline segment.

    Histories are parameterized by sample index; dt/history_dt sets the
    index step per future point (1 when they match). Labels with fewer
    than 4 past samples are left untouched.
    """
    step = dt / history_dt if history_dt > 0 else 1.0
    for lb in labels:
        past = lb.past_trajectory
        if len(past) < 4:
            if warn:
                warn(f"track {lb.track_id}: {len(past)} past samples < 4, skipping spline")
            continue
        lb.future_trajectory = _predict_spline(past, k_future, step)
    return labels


def polyfit_future(
    labels: list[ObjectLabel],
    degree: int,
    k_future: int,
    warn: Warn = None,
) -> list[ObjectLabel]:
    """Least-squares polynomial per coordinate, evaluated at the next indices."""
    for lb in labels:
        past = lb.past_trajectory
        n = len(past)
        if n < degree + 1:
            if warn:
                warn(
                    f"track {lb.track_id}: {n} past samples < degree+1={degree + 1}, "
                    "skipping polyfit"
                )
            continue
        t = np.arange(n, dtype=np.float64)
        t_future = n + np.arange(k_future, dtype=np.float64)
        future = np.empty((k_future, 3))
        for axis in range(3):
            coeffs = np.polynomial.polynomial.polyfit(t, past[:, axis], degree)
            future[:, axis] = np.polynomial.polynomial.polyval(t_future, coeffs)
        lb.future_trajectory = future
    return labels


def velocity_from_trajectory(labels: list[ObjectLabel], fps: float) -> list[ObjectLabel]:
    """velocity = (last - previous) * fps; needs two past samples."""
    for lb in labels:
        past = lb.past_trajectory
        if len(past) >= 2:
            lb.velocity = (past[-1] - past[-2]) * fps
    return labels
