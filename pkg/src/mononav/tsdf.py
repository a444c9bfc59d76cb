"""Spatially hashed voxel block grid with projective TSDF integration.

Voxels store a truncated signed distance normalized to [-1, 1] (positive on
the observed free side of a surface) and an observation weight. Blocks of
block_size^3 voxels are allocated lazily when integration first touches
them. Voxel world position = (block_coord*block_size + local + 0.5)*voxel_size.
"""

from __future__ import annotations

import dataclasses
import struct

import numpy as np

from .camera import DepthImage
from .geometry import Pose

MAP_MAGIC = b"MNVG1"


@dataclasses.dataclass(frozen=True)
class OccupancyFilter:
    min_weight: float = 1.0
    tsdf_band: float = 0.5
    z_min: float = 0.1
    z_max: float = 1.5

    def __post_init__(self):
        if not (self.z_min < self.z_max):
            raise ValueError("z_min must be below z_max")


class _Block:
    __slots__ = ("tsdf", "weight")

    def __init__(self, block_size: int):
        self.tsdf = np.zeros((block_size,) * 3)
        self.weight = np.zeros((block_size,) * 3)


class VoxelBlockGrid:
    def __init__(
        self,
        voxel_size: float = 0.10,
        truncation: float = 0.40,
        block_size: int = 8,
        max_weight: float = 100.0,
        max_depth: float = 5.0,
        retain_frames: bool = False,
    ):
        if truncation < 2 * voxel_size:
            raise ValueError("truncation must be at least 2 voxel sizes")
        if block_size < 1 or max_weight <= 0 or max_depth <= 0:
            raise ValueError("invalid grid parameters")
        self.voxel_size = float(voxel_size)
        self.truncation = float(truncation)
        self.block_size = int(block_size)
        self.max_weight = float(max_weight)
        self.max_depth = float(max_depth)
        self.blocks: dict[tuple, _Block] = {}
        self.frames: list | None = [] if retain_frames else None
        b = self.block_size
        ii, jj, kk = np.meshgrid(np.arange(b), np.arange(b), np.arange(b), indexing="ij")
        self._local = np.stack([ii, jj, kk], axis=-1).reshape(-1, 3).astype(float)

    # -- integration ---------------------------------------------------------

    def integrate(self, img: DepthImage, camera_pose: Pose) -> int:
        """Fuse one depth frame (camera_pose: optical -> world). Returns voxels touched."""
        if self.frames is not None:
            self.frames.append((img, camera_pose))
        return self._integrate(img, camera_pose)

    def _integrate(self, img: DepthImage, camera_pose: Pose) -> int:
        data = img.data
        if not np.any(data > 0):
            return 0
        intr = img.intrinsics
        bs, vs = self.block_size, self.voxel_size
        block_edge = bs * vs

        # frustum AABB in world out to max_depth (plus truncation margin behind)
        corners_px = np.array(
            [
                [-0.5, -0.5],
                [intr.width - 0.5, -0.5],
                [-0.5, intr.height - 0.5],
                [intr.width - 0.5, intr.height - 0.5],
            ]
        )
        dirs = np.stack(
            [
                (corners_px[:, 0] - intr.cx) / intr.fx,
                (corners_px[:, 1] - intr.cy) / intr.fy,
                np.ones(4),
            ],
            axis=-1,
        )
        far = camera_pose.transform_points(dirs * (self.max_depth + self.truncation))
        pts = np.vstack([far, camera_pose.translation[None, :]])
        lo = np.floor(pts.min(axis=0) / block_edge).astype(int)
        hi = np.floor(pts.max(axis=0) / block_edge).astype(int)

        bx, by, bz = np.meshgrid(
            np.arange(lo[0], hi[0] + 1),
            np.arange(lo[1], hi[1] + 1),
            np.arange(lo[2], hi[2] + 1),
            indexing="ij",
        )
        bcoords = np.stack([bx, by, bz], axis=-1).reshape(-1, 3)

        R_wc = camera_pose.rotation
        t_wc = camera_pose.translation

        # coarse block cull: bounding sphere vs frustum
        centers = (bcoords.astype(float) + 0.5) * block_edge
        cc = (centers - t_wc) @ R_wc
        r = block_edge * np.sqrt(3.0) / 2.0
        zmax = self.max_depth + self.truncation
        keep = (cc[:, 2] > -r) & (cc[:, 2] < zmax + r)
        znear = np.maximum(cc[:, 2] - r, 1e-6)
        pad_u = r * intr.fx / znear
        pad_v = r * intr.fy / znear
        u_c = intr.fx * cc[:, 0] / znear + intr.cx
        v_c = intr.fy * cc[:, 1] / znear + intr.cy
        close = cc[:, 2] <= r  # block may contain the camera; keep unconditionally
        keep &= close | (
            (u_c > -pad_u)
            & (u_c < intr.width + pad_u)
            & (v_c > -pad_v)
            & (v_c < intr.height + pad_v)
        )
        bcoords = bcoords[keep]
        if bcoords.shape[0] == 0:
            return 0

        # project every voxel of every candidate block in one batch
        nvox = bs**3
        centers = (bcoords[:, None, :] * bs + self._local[None, :, :] + 0.5) * vs
        pc = (centers.reshape(-1, 3) - t_wc) @ R_wc
        z = pc[:, 2]
        mask = z > 1e-9
        zs = np.where(mask, z, 1.0)
        u = np.round(intr.fx * pc[:, 0] / zs + intr.cx).astype(int)
        v = np.round(intr.fy * pc[:, 1] / zs + intr.cy).astype(int)
        mask &= (u >= 0) & (u < intr.width) & (v >= 0) & (v < intr.height)
        d = np.zeros(z.shape)
        sel = np.flatnonzero(mask)
        d[sel] = data[v[sel], u[sel]]
        # range gate: pixels beyond max_depth carry no surface evidence and
        # would otherwise stamp a phantom band at the clipping frontier
        mask &= (d > 0) & (d <= self.max_depth)
        sdf = d - z
        mask &= sdf >= -self.truncation
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return 0
        n = np.clip(sdf[idx] / self.truncation, -1.0, 1.0)

        # scatter the updates block by block (idx is sorted, so each block's
        # updates form one contiguous run)
        rows = idx // nvox
        locs = idx % nvox
        starts = np.flatnonzero(np.diff(rows, prepend=-1))
        bounds = np.append(starts, idx.size)
        for a, b in zip(bounds[:-1], bounds[1:]):
            coord = bcoords[rows[a]]
            key = (int(coord[0]), int(coord[1]), int(coord[2]))
            block = self.blocks.get(key)
            if block is None:
                block = _Block(bs)
                self.blocks[key] = block
            tflat = block.tsdf.reshape(-1)
            wflat = block.weight.reshape(-1)
            li = locs[a:b]
            w = wflat[li]
            tflat[li] = (tflat[li] * w + n[a:b]) / (w + 1.0)
            wflat[li] = np.minimum(w + 1.0, self.max_weight)
        return int(idx.size)

    # -- queries -------------------------------------------------------------

    def voxel_at(self, point) -> tuple[float, float]:
        """(tsdf, weight) of the voxel containing a world point; (0, 0) if unallocated."""
        idx = np.floor(np.asarray(point, dtype=float) / self.voxel_size).astype(int)
        bc = tuple(idx // self.block_size)
        block = self.blocks.get((int(bc[0]), int(bc[1]), int(bc[2])))
        if block is None:
            return (0.0, 0.0)
        li, lj, lk = idx - np.array(bc) * self.block_size
        return (float(block.tsdf[li, lj, lk]), float(block.weight[li, lj, lk]))

    def extract_occupied(self, f: OccupancyFilter) -> np.ndarray:
        """Centers of voxels passing the weight/TSDF/height filter; shape (N, 3).

        Unobserved voxels (weight 0) are never returned: unexplored space
        is treated as unoccupied.
        """
        bs, vs = self.block_size, self.voxel_size
        out = []
        for coord in sorted(self.blocks):
            block = self.blocks[coord]
            t = block.tsdf.reshape(-1)
            w = block.weight.reshape(-1)
            centers = (np.array(coord) * bs + self._local + 0.5) * vs
            mask = (w >= f.min_weight) & (np.abs(t) <= f.tsdf_band)
            mask &= (centers[:, 2] >= f.z_min) & (centers[:, 2] <= f.z_max)
            if mask.any():
                out.append(centers[mask])
        if not out:
            return np.zeros((0, 3))
        return np.vstack(out)

    def voxel_count(self) -> int:
        return sum(int((b.weight > 0).sum()) for b in self.blocks.values())

    # -- sliding window ------------------------------------------------------

    def reset_window(self, keep_last_k: int) -> None:
        """Rebuild the map from only the last k integrated frames.

        Requires the grid to have been created with retain_frames=True.
        """
        if keep_last_k < 1:
            raise ValueError("keep_last_k must be >= 1")
        if self.frames is None:
            raise ValueError("grid was not created with retain_frames=True")
        self.frames = self.frames[-keep_last_k:]
        self.blocks = {}
        for img, pose in self.frames:
            self._integrate(img, pose)

    # -- export / serialization ---------------------------------------------

    def export_pointcloud(self, f: OccupancyFilter, path) -> int:
        """ASCII PLY of occupied voxel centers; returns vertex count."""
        pts = self.extract_occupied(f)
        with open(path, "w", newline="\n") as fh:
            fh.write("ply\nformat ascii 1.0\n")
            fh.write(f"element vertex {pts.shape[0]}\n")
            fh.write("property float x\nproperty float y\nproperty float z\n")
            fh.write("end_header\n")
            for p in pts:
                fh.write(f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f}\n")
        return pts.shape[0]

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(MAP_MAGIC)
            f.write(
                struct.pack(
                    "<ddIdQ",
                    self.voxel_size,
                    self.truncation,
                    self.block_size,
                    self.max_weight,
                    len(self.blocks),
                )
            )
            for coord in sorted(self.blocks):
                block = self.blocks[coord]
                f.write(struct.pack("<3i", *coord))
                f.write(block.tsdf.astype("<f4").tobytes())
                f.write(block.weight.astype("<f4").tobytes())

    @classmethod
    def load(cls, path) -> "VoxelBlockGrid":
        with open(path, "rb") as f:
            if f.read(5) != MAP_MAGIC:
                raise ValueError(f"not a voxel map file: {path!r}")
            voxel_size, truncation, block_size, max_weight, nblocks = struct.unpack(
                "<ddIdQ", f.read(36)
            )
            grid = cls(voxel_size, truncation, block_size, max_weight)
            nvox = block_size**3
            for _ in range(nblocks):
                coord = struct.unpack("<3i", f.read(12))
                block = _Block(block_size)
                block.tsdf = (
                    np.frombuffer(f.read(4 * nvox), dtype="<f4")
                    .astype(float)
                    .reshape((block_size,) * 3)
                )
                block.weight = (
                    np.frombuffer(f.read(4 * nvox), dtype="<f4")
                    .astype(float)
                    .reshape((block_size,) * 3)
                )
                grid.blocks[coord] = block
        return grid
