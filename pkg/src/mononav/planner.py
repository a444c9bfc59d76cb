"""Runtime primitive selection with a hard clearance constraint.

A primitive is feasible when every one of its waypoints keeps at least the
clearance distance from every occupied voxel center. Among feasible
primitives the one whose closest waypoint minimizes distance to the goal
wins; ties prefer smaller |yaw amplitude|, then library order. If nothing
is feasible the vehicle stops and lands.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Pose
from .primitives import PrimitiveLibrary, to_world

# obstacle count above which a KD-tree index replaces the brute-force scan;
# both paths are exact and must agree
SPATIAL_INDEX_THRESHOLD = 10_000


@dataclasses.dataclass(frozen=True)
class PlanQuery:
    pose: Pose
    goal: np.ndarray
    obstacles: np.ndarray  # (N, 3) occupied voxel centers
    clearance: float

    def __post_init__(self):
        if self.clearance <= 0:
            raise ValueError("clearance must be positive")
        g = np.asarray(self.goal, dtype=float).reshape(3)
        if not np.all(np.isfinite(g)):
            raise ValueError("goal must be finite")
        object.__setattr__(self, "goal", g)
        object.__setattr__(
            self, "obstacles", np.asarray(self.obstacles, dtype=float).reshape(-1, 3)
        )


@dataclasses.dataclass(frozen=True)
class PlanResult:
    stopped: bool
    index: int = -1
    waypoints: np.ndarray | None = None  # world frame, (n, 3)
    goal_distance: float = float("inf")
    min_clearance: float = float("inf")
    reason: str = ""


def trajectory_point_distance(waypoints: np.ndarray, x) -> float:
    """Minimum Euclidean distance from any waypoint to x."""
    wp = np.asarray(waypoints, dtype=float).reshape(-1, 3)
    return float(np.min(np.linalg.norm(wp - np.asarray(x, dtype=float), axis=1)))


def _min_obstacle_distance(waypoints: np.ndarray, obstacles: np.ndarray, tree) -> float:
    if obstacles.shape[0] == 0:
        return float("inf")
    if tree is not None:
        d, _ = tree.query(waypoints)
        return float(np.min(d))
    diff = waypoints[:, None, :] - obstacles[None, :, :]
    return float(np.min(np.linalg.norm(diff, axis=-1)))


def select_primitive(
    lib: PrimitiveLibrary, q: PlanQuery, flight_height: float | None = None
) -> PlanResult:
    if len(lib) == 0:
        raise ValueError("primitive library is empty")
    tree = None
    if q.obstacles.shape[0] > SPATIAL_INDEX_THRESHOLD:
        tree = cKDTree(q.obstacles)
    best_key = None
    best = None
    for i, prim in enumerate(lib.primitives):
        wp = to_world(prim, q.pose, flight_height)
        clear = _min_obstacle_distance(wp, q.obstacles, tree)
        if clear < q.clearance:
            continue
        gd = trajectory_point_distance(wp, q.goal)
        key = (gd, abs(prim.spec.yaw_amplitude), i)
        if best_key is None or key < best_key:
            best_key = key
            best = PlanResult(
                stopped=False, index=i, waypoints=wp, goal_distance=gd, min_clearance=clear
            )
    if best is None:
        return PlanResult(stopped=True, reason="no primitive satisfies clearance")
    return best


def goal_reached(pose: Pose, goal, radius: float) -> bool:
    """Horizontal (x, y) distance to goal within the closed ball of given radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    g = np.asarray(goal, dtype=float)
    d = np.hypot(pose.translation[0] - g[0], pose.translation[1] - g[1])
    return d <= radius
