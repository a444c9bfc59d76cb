"""Pinhole camera model: projection, depth images, point clouds, reprojection.

Depth value 0 marks an invalid pixel (no measurement); invalid pixels are
skipped by every consumer. All depths are z-depths in meters.
"""

from __future__ import annotations

import dataclasses
import struct

import numpy as np
from PIL import Image

from .geometry import Pose

DEPTH_MAGIC = b"MNDP"


class NonProjectableError(ValueError):
    """Point lies behind the camera (z <= 0)."""


@dataclasses.dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < self.cx < self.width) or not (0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclasses.dataclass(frozen=True)
class DepthImage:
    intrinsics: Intrinsics
    data: np.ndarray  # (height, width) float, meters, 0 = invalid

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.shape != (self.intrinsics.height, self.intrinsics.width):
            raise ValueError("depth data shape does not match intrinsics")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("depth values must be finite and non-negative")
        object.__setattr__(self, "data", d)

    @property
    def valid_mask(self) -> np.ndarray:
        return self.data > 0


@dataclasses.dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (N, 3)
    frame: str = "world"

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(p)):
            raise ValueError("point cloud contains non-finite points")
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.shape[0]


def project(intr: Intrinsics, p_cam) -> tuple:
    """Project an optical-frame point; returns (u, v, depth)."""
    x, y, z = np.asarray(p_cam, dtype=float)
    if z <= 0:
        raise NonProjectableError("point behind camera")
    return (intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy, z)


def back_project(intr: Intrinsics, u: float, v: float, depth: float) -> np.ndarray:
    if depth <= 0:
        raise ValueError("depth must be positive")
    return np.array(
        [(u - intr.cx) * depth / intr.fx, (v - intr.cy) * depth / intr.fy, depth]
    )


def pixel_rays(intr: Intrinsics) -> np.ndarray:
    """Unnormalized optical-frame ray directions per pixel, z component 1.

    Shape (height, width, 3); point along ray at z-depth d is d * ray.
    """
    u = np.arange(intr.width, dtype=float)
    v = np.arange(intr.height, dtype=float)
    uu, vv = np.meshgrid(u, v)
    rays = np.stack(
        [(uu - intr.cx) / intr.fx, (vv - intr.cy) / intr.fy, np.ones_like(uu)], axis=-1
    )
    return rays


def depth_to_pointcloud(img: DepthImage, pose: Pose | None = None) -> PointCloud:
    """One point per valid pixel; pose (optical->world) maps to world frame."""
    mask = img.valid_mask
    rays = pixel_rays(img.intrinsics)[mask]
    pts = rays * img.data[mask][:, None]
    if pose is None:
        return PointCloud(pts, frame="camera")
    return PointCloud(pose.transform_points(pts), frame="world")


def reproject_depth(src: DepthImage, src_to_dst: Pose, dst_intr: Intrinsics) -> DepthImage:
    """Forward-warp src into the destination camera; z-buffer keeps nearest."""
    cloud = depth_to_pointcloud(src)
    pts = src_to_dst.transform_points(cloud.points)
    out = np.zeros((dst_intr.height, dst_intr.width), dtype=float)
    front = pts[:, 2] > 0
    pts = pts[front]
    if pts.shape[0] == 0:
        return DepthImage(dst_intr, out)
    z = pts[:, 2]
    u = np.round(dst_intr.fx * pts[:, 0] / z + dst_intr.cx).astype(int)
    v = np.round(dst_intr.fy * pts[:, 1] / z + dst_intr.cy).astype(int)
    ok = (u >= 0) & (u < dst_intr.width) & (v >= 0) & (v < dst_intr.height)
    u, v, z = u[ok], v[ok], z[ok]
    # z-buffer: process far-to-near so the nearest depth lands last
    order = np.argsort(-z, kind="stable")
    out[v[order], u[order]] = z[order]
    return DepthImage(dst_intr, out)


def save_depth(img: DepthImage, path) -> None:
    intr = img.intrinsics
    with open(path, "wb") as f:
        f.write(DEPTH_MAGIC)
        f.write(struct.pack("<II", intr.width, intr.height))
        f.write(
            struct.pack(
                "<6d", intr.fx, intr.fy, intr.cx, intr.cy, float(intr.width), float(intr.height)
            )
        )
        f.write(img.data.astype("<f4").tobytes())


def load_depth(path) -> DepthImage:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != DEPTH_MAGIC:
            raise ValueError(f"not a depth image file: {path!r}")
        w, h = struct.unpack("<II", f.read(8))
        fx, fy, cx, cy, _, _ = struct.unpack("<6d", f.read(48))
        data = np.frombuffer(f.read(4 * w * h), dtype="<f4").reshape(h, w)
    intr = Intrinsics(fx, fy, cx, cy, w, h)
    return DepthImage(intr, data.astype(float))


def save_depth_png(img: DepthImage, path) -> None:
    """16-bit PNG, millimeters, 0 = invalid. Intrinsics are not stored."""
    mm = np.round(img.data * 1000.0)
    if np.any(mm > 65535):
        raise ValueError("depth exceeds 65.535 m, not representable in 16-bit mm")
    Image.fromarray(mm.astype(np.uint16)).save(path)


def load_depth_png(path, intr: Intrinsics) -> DepthImage:
    arr = np.asarray(Image.open(path), dtype=float)
    if arr.shape != (intr.height, intr.width):
        raise ValueError("PNG size does not match intrinsics")
    return DepthImage(intr, arr / 1000.0)
