import numpy as np
import pytest

from mononav.camera import (
    DepthImage,
    Intrinsics,
    NonProjectableError,
    back_project,
    depth_to_pointcloud,
    load_depth,
    load_depth_png,
    pixel_rays,
    project,
    reproject_depth,
    save_depth,
    save_depth_png,
)
from mononav.geometry import Pose

INTR = Intrinsics(100.0, 100.0, 50.0, 50.0, 100, 100)


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        Intrinsics(-1.0, 100.0, 50.0, 50.0, 100, 100)
    with pytest.raises(ValueError):
        Intrinsics(100.0, 100.0, 150.0, 50.0, 100, 100)


def test_project_principal_point():
    u, v, d = project(INTR, (0, 0, 2))
    assert (u, v, d) == (50.0, 50.0, 2.0)


def test_project_hand_value():
    u, v, _ = project(INTR, (1, 0, 2))
    assert u == 100.0 and v == 50.0


def test_project_behind_camera_raises():
    with pytest.raises(NonProjectableError):
        project(INTR, (0, 0, -1))


def test_back_project_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = rng.uniform((-1, -1, 0.2), (1, 1, 5))
        u, v, d = project(INTR, p)
        assert np.linalg.norm(back_project(INTR, u, v, d) - p) < 1e-9


def test_depth_image_validation():
    with pytest.raises(ValueError):
        DepthImage(INTR, np.zeros((10, 10)))
    with pytest.raises(ValueError):
        DepthImage(INTR, -np.ones((100, 100)))


def test_pointcloud_empty_image():
    img = DepthImage(INTR, np.zeros((100, 100)))
    assert len(depth_to_pointcloud(img)) == 0


def test_pointcloud_center_pixel():
    data = np.zeros((100, 100))
    data[50, 50] = 3.0
    cloud = depth_to_pointcloud(DepthImage(INTR, data))
    assert cloud.frame == "camera"
    assert np.allclose(cloud.points, [[0, 0, 3]])


def test_pointcloud_size_equals_valid_count():
    rng = np.random.default_rng(1)
    data = rng.uniform(0, 4, size=(100, 100))
    data[data < 2] = 0.0
    cloud = depth_to_pointcloud(DepthImage(INTR, data))
    assert len(cloud) == int((data > 0).sum())


def test_pixel_rays_z_component():
    rays = pixel_rays(INTR)
    assert rays.shape == (100, 100, 3)
    assert np.all(rays[:, :, 2] == 1.0)


def test_reproject_identity():
    rng = np.random.default_rng(2)
    data = rng.uniform(1, 4, size=(100, 100))
    img = DepthImage(INTR, data)
    out = reproject_depth(img, Pose.identity(), INTR)
    assert np.allclose(out.data, data)


def test_reproject_narrower_focal_conserves_values():
    rng = np.random.default_rng(3)
    data = rng.uniform(1, 4, size=(100, 100))
    img = DepthImage(INTR, data)
    narrow = Intrinsics(50.0, 50.0, 50.0, 50.0, 100, 100)
    out = reproject_depth(img, Pose.identity(), narrow)
    src_vals = set(np.round(data.ravel(), 12))
    for d in out.data[out.data > 0]:
        assert round(d, 12) in src_vals


def test_reproject_flat_wall_translation():
    # wall at z=3; moving the camera back 1 m along +z_optical places it at 4
    img = DepthImage(INTR, np.full((100, 100), 3.0))
    src_to_dst = Pose(np.eye(3), np.array([0.0, 0.0, 1.0]))
    out = reproject_depth(img, src_to_dst, INTR)
    valid = out.data[out.data > 0]
    assert valid.size > 0
    assert np.allclose(valid, 4.0, atol=1e-9)


def test_depth_file_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    data = rng.uniform(0, 5, size=(100, 100)).astype(np.float32).astype(float)
    img = DepthImage(INTR, data)
    path = tmp_path / "frame.mndp"
    save_depth(img, path)
    back = load_depth(path)
    assert back.intrinsics == INTR
    assert np.array_equal(back.data, data)


def test_depth_file_magic(tmp_path):
    path = tmp_path / "frame.mndp"
    path.write_bytes(b"XXXX" + b"\x00" * 64)
    with pytest.raises(ValueError):
        load_depth(path)


def test_depth_png_round_trip(tmp_path):
    data = np.round(np.linspace(0, 5, 100 * 100).reshape(100, 100), 3)
    img = DepthImage(INTR, data)
    path = tmp_path / "frame.png"
    save_depth_png(img, path)
    back = load_depth_png(path, INTR)
    assert np.allclose(back.data, data, atol=5e-4)


def test_depth_png_range_check(tmp_path):
    img = DepthImage(INTR, np.full((100, 100), 70.0))
    with pytest.raises(ValueError):
        save_depth_png(img, tmp_path / "too_far.png")
