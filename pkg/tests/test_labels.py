"""Label conversion, filtering, and cross-modality fusion."""

import numpy as np
import pytest

from lidarpipe.algos import (
    convert_labels_camera_to_lidar,
    fuse_2d_bboxes,
    iou_2d,
    points_in_box,
    remove_less_point_labels,
    remove_out_of_bound_labels,
    wrap_pi,
)
from lidarpipe.frame import Box3D, Calibration, ObjectLabel, PointCloud
from lidarpipe.io import RawCameraLabel

from oracles import lidar_center_to_camera_bottom, points_in_oriented_box

KITTI_TR = np.array([
    [0.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
])


def raw(class_name="Car", loc=(0, 0, 10), hwl=(2.0, 1.8, 4.0), ry=0.0, dont_care=False):
    return RawCameraLabel(
        class_name=class_name,
        truncated=0.0,
        occluded=0,
        alpha=0.0,
        box2d=[0, 0, 10, 10],
        dimensions=hwl,
        location=loc,
        rotation_y=ry,
        dont_care=dont_care,
    )


def identity_calib():
    return Calibration.identity()


class TestConvert:
    def test_identity_calibration(self):
        labels = convert_labels_camera_to_lidar([raw(loc=(0, 0, 10), hwl=(2, 1.8, 4), ry=0)],
                                                identity_calib())
        lb = labels[0]
        assert np.allclose(lb.box3d.center, (0, 0, 11))        # bottom + h/2
        assert np.allclose(lb.box3d.extent, (4, 1.8, 2))       # (l, w, h)
        assert lb.box3d.yaw == pytest.approx(-np.pi / 2)

    def test_kitti_permutation(self):
        calib = Calibration(Tr_velo_to_cam=KITTI_TR, R0_rect=np.eye(3),
                            P2=np.hstack([np.eye(3), np.zeros((3, 1))]))
        labels = convert_labels_camera_to_lidar([raw(loc=(0, 0, 10), hwl=(2, 1.8, 4))], calib)
        assert np.allclose(labels[0].box3d.center, (10, 0, 1.0))

    def test_roundtrip_against_forward_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            # Random orthonormal rotation with translation.
            q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            if np.linalg.det(q) < 0:
                q[:, 0] *= -1
            tr = np.hstack([q, rng.uniform(-2, 2, size=(3, 1))])
            q2, _ = np.linalg.qr(rng.normal(size=(3, 3)))
            if np.linalg.det(q2) < 0:
                q2[:, 0] *= -1
            calib = Calibration(Tr_velo_to_cam=tr, R0_rect=q2,
                                P2=np.hstack([np.eye(3), np.zeros((3, 1))]))
            cam_loc = rng.uniform(-20, 20, 3)
            h = float(rng.uniform(1, 3))
            labels = convert_labels_camera_to_lidar(
                [raw(loc=cam_loc, hwl=(h, 1.8, 4.0))], calib
            )
            back = lidar_center_to_camera_bottom(
                labels[0].box3d.center, h, calib.Tr_velo_to_cam, calib.R0_rect
            )
            assert np.allclose(back, cam_loc, atol=1e-9)

    def test_dontcare_dropped(self):
        labels = convert_labels_camera_to_lidar(
            [raw(), raw(class_name="DontCare", dont_care=True)], identity_calib()
        )
        assert len(labels) == 1

    def test_yaw_wrapped(self):
        labels = convert_labels_camera_to_lidar([raw(ry=3.0)], identity_calib())
        yaw = labels[0].box3d.yaw
        assert -np.pi < yaw <= np.pi
        assert yaw == pytest.approx(wrap_pi(-3.0 - np.pi / 2))


class TestRemoveOps:
    def boxed(self, center, extent=(1, 1, 1)):
        return ObjectLabel("car", box3d=Box3D(center, extent))

    def test_boundary_center_kept(self):
        labels = remove_out_of_bound_labels(
            [self.boxed((1, 0, 0))], (-1, -1, -1), (1, 1, 1)
        )
        assert len(labels) == 1

    def test_all_outside_gives_empty(self):
        labels = [self.boxed((5, 0, 0)), self.boxed((0, -9, 0))]
        assert remove_out_of_bound_labels(labels, (-1, -1, -1), (1, 1, 1)) == []

    def test_matches_predicate_oracle(self):
        rng = np.random.default_rng(18)
        labels = [self.boxed(rng.uniform(-5, 5, 3)) for _ in range(100)]
        lo, hi = np.array([-2, -3, -1]), np.array([2, 1, 4])
        kept = remove_out_of_bound_labels(labels, lo, hi)
        expected = [
            lb for lb in labels
            if np.all(lb.box3d.center >= lo) and np.all(lb.box3d.center <= hi)
        ]
        assert kept == expected

    def test_less_points_threshold(self):
        pc = PointCloud([(0, 0, 0, 0), (0.1, 0, 0, 0), (0, 0.1, 0, 0)])
        label = self.boxed((0, 0, 0))
        assert remove_less_point_labels([label], pc, 5) == []
        assert remove_less_point_labels([label], pc, 0) == [label]
        assert remove_less_point_labels([label], pc, 3) == [label]

    def test_rotated_box_counts_match_oracle(self):
        rng = np.random.default_rng(19)
        pc = PointCloud(np.column_stack([rng.uniform(-4, 4, size=(300, 3)), np.zeros(300)]))
        box = Box3D(center=(0.5, -0.5, 0), extent=(3.0, 1.2, 2.0), yaw=0.7)
        ours = points_in_box(pc.xyz, box)
        oracle = points_in_oriented_box(pc.xyz, box.center, box.extent, box.yaw)
        assert np.array_equal(ours, oracle)
        label = ObjectLabel("car", box3d=box)
        kept = remove_less_point_labels([label], pc, int(oracle.sum()))
        assert kept == [label]
        assert remove_less_point_labels([label], pc, int(oracle.sum()) + 1) == []


class TestFuse:
    def tagged(self, source, box2d, class_name="car", with3d=True):
        return ObjectLabel(
            class_name,
            box3d=Box3D((0, 0, 0), (1, 1, 1)) if with3d else None,
            box2d=box2d,
            source=source,
        )

    def test_identical_boxes_fuse(self):
        out = fuse_2d_bboxes(
            [self.tagged("lidar", [0, 0, 10, 10]), self.tagged("camera", [0, 0, 10, 10])],
            "lidar", "camera", 0.5,
        )
        assert len(out) == 1
        assert out[0].source == "fused"

    def test_disjoint_boxes_pass_through(self):
        a = self.tagged("lidar", [0, 0, 10, 10])
        b = self.tagged("camera", [20, 20, 30, 30])
        out = fuse_2d_bboxes([a, b], "lidar", "camera", 0.1)
        assert out == [a, b]

    def test_one_third_iou_threshold_sides(self):
        a = self.tagged("lidar", [0, 0, 10, 10])
        b = self.tagged("camera", [5, 0, 15, 10])
        assert iou_2d(a.box2d, b.box2d) == pytest.approx(1 / 3)
        fused = fuse_2d_bboxes([a, b], "lidar", "camera", 0.3)
        assert len(fused) == 1
        unfused = fuse_2d_bboxes([a, b], "lidar", "camera", 0.34)
        assert len(unfused) == 2

    def test_union_box_and_class_rules(self):
        a = self.tagged("lidar", [0, 0, 10, 10], class_name="Unknown")
        b = self.tagged("camera", [2, -2, 12, 9], class_name="car", with3d=False)
        out = fuse_2d_bboxes([a, b], "lidar", "camera", 0.3)
        fused = out[0]
        assert np.allclose(fused.box2d, (0, -2, 12, 10))
        assert fused.class_name == "car"      # a's Unknown defers to b
        assert fused.box3d is not None        # a's 3D box preferred

    def test_count_invariant_no_double_consumption(self):
        rng = np.random.default_rng(20)
        labels = []
        for i in range(6):
            base = rng.uniform(0, 50, 2)
            labels.append(self.tagged("lidar", [*base, *(base + 10)]))
        for i in range(5):
            base = rng.uniform(0, 50, 2)
            labels.append(self.tagged("camera", [*base, *(base + 10)], with3d=False))
        out = fuse_2d_bboxes(labels, "lidar", "camera", 0.2)
        n_fused = sum(1 for lb in out if lb.source == "fused")
        assert len(out) == 11 - n_fused

    def test_other_sources_untouched(self):
        gt = self.tagged("ground_truth", [0, 0, 10, 10])
        a = self.tagged("lidar", [0, 0, 10, 10])
        b = self.tagged("camera", [0, 0, 10, 10])
        out = fuse_2d_bboxes([gt, a, b], "lidar", "camera", 0.5)
        assert gt in out
        assert len(out) == 2
