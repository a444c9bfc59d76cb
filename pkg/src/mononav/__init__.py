"""Monocular-style navigation stack: TSDF reconstruction from depth+pose
streams, motion-primitive planning with a hard clearance constraint, depth
evaluation metrics, and a closed-loop hallway simulator."""

from .camera import DepthImage, Intrinsics, PointCloud
from .geometry import Pose, vec3
from .metrics import DepthMetrics, PcdResult, depth_metrics, point_cloud_distance
from .planner import PlanQuery, PlanResult, select_primitive
from .primitives import PrimitiveLibrary, generate_library
from .scenes import BUILTIN_SCENES, Scene, get_scene
from .simulator import NoiseModel, RunConfig, RunLog, batch_evaluate, run_episode
from .tsdf import OccupancyFilter, VoxelBlockGrid

__version__ = "0.1.0"

__all__ = [
    "DepthImage",
    "Intrinsics",
    "PointCloud",
    "Pose",
    "vec3",
    "DepthMetrics",
    "PcdResult",
    "depth_metrics",
    "point_cloud_distance",
    "PlanQuery",
    "PlanResult",
    "select_primitive",
    "PrimitiveLibrary",
    "generate_library",
    "BUILTIN_SCENES",
    "Scene",
    "get_scene",
    "NoiseModel",
    "RunConfig",
    "RunLog",
    "batch_evaluate",
    "run_episode",
    "OccupancyFilter",
    "VoxelBlockGrid",
]
