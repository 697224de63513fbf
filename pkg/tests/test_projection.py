"""Calibration-chain projections: 2D boxes and image overlays."""

import numpy as np

from lidarpipe.algos import (
    box3d_corners,
    depth_color,
    gen_bbox_2d,
    project_points_to_image,
)
from lidarpipe.frame import Box3D, Calibration, ImageRaster, ObjectLabel, PointCloud

from oracles import project_point

PINHOLE_P2 = np.array([[100.0, 0, 50, 0], [0, 100.0, 50, 0], [0, 0, 1, 0]])


def pinhole_calib() -> Calibration:
    return Calibration(
        Tr_velo_to_cam=np.hstack([np.eye(3), np.zeros((3, 1))]),
        R0_rect=np.eye(3),
        P2=PINHOLE_P2,
    )


class TestGenBbox2d:
    def test_on_axis_cube_matches_hand_projection(self):
        # Extent along the optical axis is negligible, so every corner
        # projects from depth 10: half-extent 0.5 * f/z = 5 px around c.
        calib = pinhole_calib()
        label = ObjectLabel("cube", box3d=Box3D([0, 0, 10], [1.0, 1.0, 1e-9]))
        gen_bbox_2d([label], calib, 100, 100)
        assert np.allclose(label.box2d, (45, 45, 55, 55), atol=1e-6)

        corners = box3d_corners(label.box3d)
        us, vs = [], []
        for corner in corners:
            u, v, w = project_point(corner, calib.Tr_velo_to_cam, calib.R0_rect, calib.P2)
            assert w > 0
            us.append(u)
            vs.append(v)
        assert np.allclose(label.box2d, (min(us), min(vs), max(us), max(vs)), atol=1e-9)

    def test_true_cube_matches_corner_oracle(self):
        calib = pinhole_calib()
        label = ObjectLabel("cube", box3d=Box3D([0.5, -0.25, 10], [1, 1, 1], yaw=0.3))
        gen_bbox_2d([label], calib, 1000, 1000)
        us, vs = [], []
        for corner in box3d_corners(label.box3d):
            u, v, _ = project_point(corner, calib.Tr_velo_to_cam, calib.R0_rect, calib.P2)
            us.append(u)
            vs.append(v)
        assert np.allclose(label.box2d, (min(us), min(vs), max(us), max(vs)), atol=1e-9)

    def test_box_behind_camera_has_no_box2d(self):
        label = ObjectLabel("cube", box3d=Box3D([0, 0, -10], [1, 1, 1]), box2d=[0, 0, 1, 1])
        gen_bbox_2d([label], pinhole_calib(), 100, 100)
        assert label.box2d is None

    def test_clipping_to_raster(self):
        # Corners project to u in [-10, 10]: a 4-px-wide image clips the
        # box to [0, 4].
        label = ObjectLabel("cube", box3d=Box3D([-5.0, 0, 10], [2.0, 1.0, 1e-9]))
        gen_bbox_2d([label], pinhole_calib(), 4, 100)
        xmin, ymin, xmax, ymax = label.box2d
        assert (xmin, xmax) == (0.0, 4.0)
        assert np.allclose((ymin, ymax), (45.0, 55.0), atol=1e-6)

    def test_missing_box3d_untouched(self):
        label = ObjectLabel("flat", box2d=[1, 2, 3, 4])
        gen_bbox_2d([label], pinhole_calib(), 100, 100)
        assert np.allclose(label.box2d, (1, 2, 3, 4))


class TestProjectPointsToImage:
    def blank(self, n=101):
        return ImageRaster(np.zeros((n, n, 3), dtype=np.uint8))

    def test_empty_cloud_unchanged(self):
        img = self.blank()
        out = project_points_to_image(img, PointCloud(), pinhole_calib())
        assert np.array_equal(out.data, img.data)

    def test_center_point_mid_depth_color(self):
        img = self.blank()
        out = project_points_to_image(
            img, PointCloud([(0, 0, 5, 0)]), pinhole_calib(),
            point_size=1, max_depth=10.0,
        )
        assert tuple(out.data[50, 50]) == (128, 0, 128)
        assert np.array_equal(img.data, np.zeros_like(img.data))  # original untouched

    def test_point_behind_camera_unchanged(self):
        img = self.blank()
        out = project_points_to_image(img, PointCloud([(0, 0, -5, 0)]), pinhole_calib())
        assert np.array_equal(out.data, img.data)

    def test_depth_color_endpoints(self):
        rgb = depth_color(np.array([0.0, 10.0, 5.0]), max_depth=10.0)
        assert tuple(rgb[0]) == (255, 0, 0)    # near = red
        assert tuple(rgb[1]) == (0, 0, 255)    # far = blue
        assert tuple(rgb[2]) == (128, 0, 128)  # midpoint

    def test_point_size_paints_square(self):
        img = self.blank()
        out = project_points_to_image(
            img, PointCloud([(0, 0, 5, 0)]), pinhole_calib(),
            point_size=3, max_depth=10.0,
        )
        patch = out.data[49:52, 49:52]
        assert np.all(patch[:, :, 0] == 128)
        assert np.all(out.data[47, 47] == 0)
