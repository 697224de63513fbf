"""Tracking chains, trajectory prediction, velocity."""

import numpy as np
import pytest

from lidarpipe.algos import (
    TrackState,
    cubic_spline_future,
    kdtree_past_trajectory,
    polyfit_future,
    velocity_from_trajectory,
)
from lidarpipe.frame import Box3D, ObjectLabel


def boxed(center):
    return ObjectLabel("car", box3d=Box3D(center, (1, 1, 1)))


class TestTracker:
    def test_first_frame_fresh_ids(self):
        state = TrackState()
        labels = [boxed((0, 0, 0)), boxed((10, 0, 0))]
        kdtree_past_trajectory(labels, state, match_radius=2.0, max_history=10)
        assert sorted(lb.track_id for lb in labels) == [0, 1]
        assert all(len(lb.past_trajectory) == 1 for lb in labels)

    def test_single_id_over_constant_velocity_track(self):
        state = TrackState()
        ids = set()
        for f in range(10):
            labels = [boxed((0.5 * f, 0, 0))]
            kdtree_past_trajectory(labels, state, match_radius=2.0, max_history=20)
            ids.add(labels[0].track_id)
        assert ids == {0}
        assert len(labels[0].past_trajectory) == 10
        steps = np.diff(labels[0].past_trajectory[:, 0])
        assert np.allclose(steps, 0.5)

    def test_history_truncated(self):
        state = TrackState()
        for f in range(10):
            labels = [boxed((0.5 * f, 0, 0))]
            kdtree_past_trajectory(labels, state, match_radius=2.0, max_history=4)
        assert len(labels[0].past_trajectory) == 4
        assert labels[0].past_trajectory[-1, 0] == pytest.approx(4.5)

    def test_outside_radius_opens_new_track(self):
        state = TrackState()
        kdtree_past_trajectory([boxed((0, 0, 0))], state, 2.0, 10)
        labels = [boxed((50, 0, 0))]
        kdtree_past_trajectory(labels, state, 2.0, 10)
        assert labels[0].track_id == 1

    def test_two_objects_never_swap(self):
        state = TrackState()
        first = None
        for f in range(8):
            # Crossing paths in x, but never within radius of the other's
            # previous center.
            a = boxed((f * 1.0, 10, 0))
            b = boxed((7 - f * 1.0, -10, 0))
            labels = [a, b]
            kdtree_past_trajectory(labels, state, match_radius=1.5, max_history=20)
            if first is None:
                first = (a.track_id, b.track_id)
            else:
                assert (a.track_id, b.track_id) == first

    def test_greedy_by_distance(self):
        state = TrackState()
        kdtree_past_trajectory([boxed((0, 0, 0)), boxed((3, 0, 0))], state, 2.0, 10)
        # Both new labels are within radius of track 0's center; the
        # closer one inherits it, the other matches track 1.
        near = boxed((0.2, 0, 0))
        far = boxed((1.4, 0, 0))
        kdtree_past_trajectory([far, near], state, match_radius=2.0, max_history=10)
        assert near.track_id == 0
        assert far.track_id == 1

    def test_ids_unique_per_frame(self):
        state = TrackState()
        rng = np.random.default_rng(23)
        for _ in range(6):
            labels = [boxed(rng.uniform(-10, 10, 3)) for _ in range(7)]
            kdtree_past_trajectory(labels, state, match_radius=3.0, max_history=10)
            ids = [lb.track_id for lb in labels]
            assert len(ids) == len(set(ids))


def with_history(points):
    lb = ObjectLabel("car", box3d=Box3D(points[-1], (1, 1, 1)))
    lb.past_trajectory = np.asarray(points, dtype=float)
    return lb


class TestSplineFuture:
    def test_linear_history_continues_line(self):
        pts = [(i * 2.0, i * -1.0, 0.5) for i in range(6)]
        lb = with_history(pts)
        cubic_spline_future([lb], k_future=3)
        expected = np.array([(12, -6, 0.5), (14, -7, 0.5), (16, -8, 0.5)], dtype=float)
        assert np.allclose(lb.future_trajectory, expected, atol=1e-6)

    def test_cubic_history_reproduced_and_extrapolated(self):
        def q(t):
            return np.stack([
                0.5 * t**3 - t**2 + 2 * t + 1,
                -0.2 * t**3 + 0.5 * t,
                np.full_like(t, 2.0),
            ], axis=-1)

        t = np.arange(8, dtype=float)
        lb = with_history(q(t))
        cubic_spline_future([lb], k_future=4)
        # Interior reproduction at off-knot points.
        from scipy.interpolate import CubicSpline

        spline = CubicSpline(t, q(t), axis=0)
        mid = np.array([0.5, 3.25, 6.75])
        assert np.allclose(spline(mid), q(mid), atol=1e-6)
        # Extrapolation continues the same cubic.
        assert np.allclose(lb.future_trajectory, q(np.array([8.0, 9, 10, 11])), atol=1e-6)

    def test_short_history_untouched_with_warning(self):
        lb = with_history([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
        warnings = []
        cubic_spline_future([lb], k_future=3, warn=warnings.append)
        assert len(lb.future_trajectory) == 0
        assert len(warnings) == 1

    def test_dt_ratio_scales_step(self):
        pts = [(float(i), 0, 0) for i in range(5)]
        lb = with_history(pts)
        cubic_spline_future([lb], k_future=2, dt=0.05, history_dt=0.1)
        assert np.allclose(lb.future_trajectory[:, 0], [4.5, 5.0], atol=1e-9)


class TestPolyfitFuture:
    def test_degree_one_exact_on_linear(self):
        lb = with_history([(i * 3.0, 1.0, -i * 0.5) for i in range(4)])
        polyfit_future([lb], degree=1, k_future=2)
        assert np.allclose(lb.future_trajectory, [(12, 1, -2), (15, 1, -2.5)], atol=1e-9)

    def test_degree_two_exact_on_parabola(self):
        t = np.arange(6, dtype=float)
        pts = np.stack([t**2, 2 * t + 1, np.zeros_like(t)], axis=1)
        lb = with_history(pts)
        polyfit_future([lb], degree=2, k_future=3)
        tf = np.array([6.0, 7.0, 8.0])
        expected = np.stack([tf**2, 2 * tf + 1, np.zeros_like(tf)], axis=1)
        assert np.allclose(lb.future_trajectory, expected, atol=1e-9)

    def test_insufficient_history_warns(self):
        lb = with_history([(0, 0, 0), (1, 0, 0), (2, 0, 0)])
        warnings = []
        polyfit_future([lb], degree=3, k_future=2, warn=warnings.append)
        assert len(lb.future_trajectory) == 0
        assert len(warnings) == 1

    def test_exact_on_any_polynomial_up_to_degree(self):
        rng = np.random.default_rng(24)
        for degree in (1, 2, 3):
            coeffs = rng.uniform(-1, 1, size=(degree + 1, 3))
            t = np.arange(degree + 3, dtype=float)
            pts = np.polynomial.polynomial.polyval(t, coeffs).T
            lb = with_history(pts)
            polyfit_future([lb], degree=degree, k_future=2)
            tf = t[-1] + np.array([1.0, 2.0])
            expected = np.polynomial.polynomial.polyval(tf, coeffs).T
            assert np.allclose(lb.future_trajectory, expected, atol=1e-9)


class TestVelocity:
    def test_formula(self):
        lb = with_history([(0, 0, 0), (1, 0, 0)])
        velocity_from_trajectory([lb], fps=10)
        assert np.allclose(lb.velocity, (10, 0, 0))

    def test_stationary(self):
        lb = with_history([(3, 3, 3), (3, 3, 3)])
        velocity_from_trajectory([lb], fps=10)
        assert np.allclose(lb.velocity, (0, 0, 0))

    def test_short_history_leaves_velocity_absent(self):
        lb = with_history([(0, 0, 0)])
        velocity_from_trajectory([lb], fps=10)
        assert lb.velocity is None

    def test_circular_motion_speed(self):
        r, omega, fps = 5.0, 2.0, 10.0  # omega rad/s
        steps = np.arange(12) * omega / fps
        pts = np.stack([r * np.cos(steps), r * np.sin(steps), np.zeros_like(steps)], axis=1)
        lb = with_history(pts)
        velocity_from_trajectory([lb], fps=fps)
        speed = np.linalg.norm(lb.velocity)
        chord_speed = 2 * r * np.sin(omega / (2 * fps)) * fps
        assert speed == pytest.approx(chord_speed, abs=1e-9)
        assert speed <= r * omega  # chord never exceeds arc
