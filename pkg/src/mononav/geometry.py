"""Rigid-body geometry: poses and the fixed frame conventions.

World frame is East-North-Up (x east, y north, z up); yaw is measured
about +z from +x. Body frame: x forward, y left, z up. Camera optical
frame: x right, y down, z forward. Depth images store z-depth (distance
along the optical axis, not ray length).
"""

from __future__ import annotations

import dataclasses

import numpy as np

# Columns are the optical axes expressed in body coordinates:
# optical x (right) = -body y, optical y (down) = -body z,
# optical z (forward) = body x.
R_OPTICAL_TO_BODY = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)
R_BODY_TO_OPTICAL = R_OPTICAL_TO_BODY.T

_ORTHO_TOL = 1e-6


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def yaw_matrix(yaw: float) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclasses.dataclass(frozen=True)
class Pose:
    """Rigid transform (rotation + translation), mapping local -> parent frame."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(t)):
            raise ValueError("pose has non-finite entries")
        if np.linalg.norm(R @ R.T - np.eye(3)) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(R) < 0.0:
            raise ValueError("rotation has negative determinant")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    @staticmethod
    def from_yaw(yaw: float, position) -> "Pose":
        return Pose(yaw_matrix(yaw), np.asarray(position, dtype=float))

    @property
    def yaw(self) -> float:
        return float(np.arctan2(self.rotation[1, 0], self.rotation[0, 0]))

    def compose(self, other: "Pose") -> "Pose":
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "Pose":
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def transform_point(self, p) -> np.ndarray:
        return self.rotation @ np.asarray(p, dtype=float) + self.translation

    def transform_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.rotation.T + self.translation


def compose(a: Pose, b: Pose) -> Pose:
    return a.compose(b)


def transform_point(p: Pose, x) -> np.ndarray:
    return p.transform_point(x)


def optical_pose(yaw: float, position) -> Pose:
    """Camera optical frame -> world pose for a body at the given yaw."""
    return Pose(yaw_matrix(yaw) @ R_OPTICAL_TO_BODY, np.asarray(position, dtype=float))
