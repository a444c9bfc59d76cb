"""Closed-loop simulation: ray-cast depth camera, depth noise, collision
checking, the perceive-fuse-plan-act episode loop, and batch evaluation.

The episode is fully deterministic given (scene, config, seed). Depth
frames are rendered at the sensor rate and fused into the TSDF grid;
replanning extracts occupied voxels and selects a primitive; the pose
advances ideally along the selected primitive's waypoints.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .camera import DepthImage, Intrinsics
from .geometry import Pose, optical_pose
from .planner import PlanQuery, goal_reached, select_primitive
from .primitives import generate_library
from .scenes import Scene
from .tsdf import OccupancyFilter, VoxelBlockGrid

OUTCOME_GOAL = "GoalReached"
OUTCOME_STOPPED = "SelfStopped"
OUTCOME_COLLIDED = "Collided"
OUTCOME_LIMIT = "StepLimit"

# depth-noise level calibrated so each point of a noisy frame sits about
# 0.41 m from its clean counterpart at the 3 m reference range; see
# scripts/calibrate_noise.py
CALIBRATED_MULT_SIGMA = 0.15


class ConfigError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class NoiseModel:
    mult_sigma: float = 0.0
    bias_sigma: float = 0.0
    dropout_p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mult_sigma < 0 or self.bias_sigma < 0:
            raise ConfigError("noise sigmas must be >= 0")
        if not (0.0 <= self.dropout_p <= 1.0):
            raise ConfigError("dropout_p must be in [0, 1]")


@dataclasses.dataclass
class RunConfig:
    # vehicle / planning
    speed: float = 0.5
    horizon: float = 1.0
    library_size: int = 7
    max_yaw_rate: float = 0.7
    n_waypoints: int = 21
    clearance: float = 0.5
    goal_radius: float = 0.5
    robot_radius: float = 0.1
    replan_period: float = 1.0
    sensor_hz: float = 4.0
    warm_start_frames: int = 12
    max_cycles: int = 60
    # fusion
    voxel_size: float = 0.10
    truncation: float = 0.40
    block_size: int = 8
    max_weight: float = 100.0
    max_depth: float = 5.0
    sliding_window: int = 0  # 0 = fuse every frame ever seen
    # occupancy filter
    min_weight: float = 1.0
    tsdf_band: float = 0.5
    z_min: float = 0.1
    z_max: float = 1.5
    # simulated camera
    image_width: int = 80
    image_height: int = 60
    focal: float = 60.0
    max_range: float = 6.0
    frame_delay: int = 0  # sensor frames of camera lag
    # noise
    mult_sigma: float = 0.0
    bias_sigma: float = 0.0
    dropout_p: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        positive = (
            "speed",
            "horizon",
            "clearance",
            "goal_radius",
            "robot_radius",
            "replan_period",
            "sensor_hz",
            "voxel_size",
            "truncation",
            "max_weight",
            "max_depth",
            "focal",
            "max_range",
        )
        for key in positive:
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive")
        for key in ("library_size", "block_size", "max_cycles", "image_width", "image_height"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1")
        for key in ("warm_start_frames", "sliding_window", "frame_delay"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be >= 0")
        if self.n_waypoints < 2:
            raise ConfigError("n_waypoints must be >= 2")
        if self.truncation < 2 * self.voxel_size:
            raise ConfigError("truncation must be at least 2 * voxel_size")
        if not (self.z_min < self.z_max):
            raise ConfigError("z_min must be below z_max")
        NoiseModel(self.mult_sigma, self.bias_sigma, self.dropout_p, self.seed)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        for key in d:
            if key not in fields:
                raise ConfigError(f"unknown config key: {key}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "RunConfig":
        cfg = dataclasses.replace(self, **kw)
        cfg.validate()
        return cfg

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(
            self.focal,
            self.focal,
            (self.image_width - 1) / 2.0,
            (self.image_height - 1) / 2.0,
            self.image_width,
            self.image_height,
        )

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.mult_sigma, self.bias_sigma, self.dropout_p, self.seed)


@dataclasses.dataclass(frozen=True)
class Record:
    t: float
    x: float
    y: float
    z: float
    yaw: float
    action: str
    event: str
    voxels: int


@dataclasses.dataclass
class RunLog:
    records: list
    outcome: str
    x0: np.ndarray
    final_position: np.ndarray
    goal: np.ndarray
    collided: bool

    @property
    def completion(self) -> float:
        """Goal completion 1 - |x_T - x_g| / |x_0 - x_g| (unclamped)."""
        d0 = float(np.linalg.norm(self.x0 - self.goal))
        dT = float(np.linalg.norm(self.final_position - self.goal))
        return 1.0 - dT / d0

    @property
    def completion_clamped(self) -> float:
        return min(1.0, max(0.0, self.completion))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as f:
            f.write("t,x,y,z,yaw,action,event,voxels\n")
            for r in self.records:
                f.write(
                    f"{r.t:.9f},{r.x:.9f},{r.y:.9f},{r.z:.9f},{r.yaw:.9f},"
                    f"{r.action},{r.event},{r.voxels}\n"
                )

    def summary(self) -> dict:
        return {
            "outcome": self.outcome,
            "collided": self.collided,
            "completion": self.completion_clamped,
            "completion_raw": self.completion,
            "x0": self.x0.tolist(),
            "final_position": self.final_position.tolist(),
            "goal": self.goal.tolist(),
            "steps": len(self.records),
        }


def raycast_depth(scene: Scene, pose: Pose, intr: Intrinsics, max_range: float) -> DepthImage:
    """Per-pixel z-depth of the nearest box hit (slab method); 0 = no hit."""
    h, w = intr.height, intr.width
    u = np.arange(w, dtype=float)
    v = np.arange(h, dtype=float)
    uu, vv = np.meshgrid(u, v)
    # optical-frame rays with unit z component: ray parameter == z-depth
    rays = np.stack(
        [(uu - intr.cx) / intr.fx, (vv - intr.cy) / intr.fy, np.ones_like(uu)], axis=-1
    ).reshape(-1, 3)
    dirs = rays @ pose.rotation.T
    origin = pose.translation
    d = np.where(np.abs(dirs) < 1e-30, 1e-30, dirs)
    mins = np.array([b.min for b in scene.boxes])
    maxs = np.array([b.max for b in scene.boxes])
    # drop boxes entirely beyond the sensor range
    gap = np.maximum(mins - origin, 0.0) + np.maximum(origin - maxs, 0.0)
    near = np.linalg.norm(gap, axis=1) <= max_range
    mins, maxs = mins[near], maxs[near]
    depth = np.full(d.shape[0], np.inf)
    if mins.shape[0] == 0:
        return DepthImage(intr, np.zeros((h, w)))
    chunk = 2048  # bound the (rays x boxes x 3) slab workspace
    for i in range(0, d.shape[0], chunk):
        di = d[i : i + chunk]
        t1 = (mins[None, :, :] - origin) / di[:, None, :]
        t2 = (maxs[None, :, :] - origin) / di[:, None, :]
        tmin = np.minimum(t1, t2).max(axis=2)
        tmax = np.maximum(t1, t2).min(axis=2)
        tmin = np.where((tmax >= tmin) & (tmin > 1e-9), tmin, np.inf)
        depth[i : i + chunk] = tmin.min(axis=1)
    depth[~np.isfinite(depth) | (depth > max_range)] = 0.0
    return DepthImage(intr, depth.reshape(h, w))


def apply_noise(img: DepthImage, noise: NoiseModel, frame_index: int) -> DepthImage:
    """Multiplicative per-pixel noise, per-frame scale bias, and dropout.

    Deterministic given (noise.seed, frame_index); invalid pixels stay 0.
    """
    rng = np.random.default_rng([noise.seed, frame_index])
    bias = rng.normal(0.0, noise.bias_sigma) if noise.bias_sigma > 0 else 0.0
    eps = (
        rng.normal(0.0, noise.mult_sigma, size=img.data.shape)
        if noise.mult_sigma > 0
        else np.zeros_like(img.data)
    )
    out = img.data * (1.0 + bias + eps)
    if noise.dropout_p > 0:
        drop = rng.random(img.data.shape) < noise.dropout_p
        out = np.where(drop, 0.0, out)
    out = np.maximum(out, 0.0)
    return DepthImage(img.intrinsics, out)


def point_box_distance(p, box) -> float:
    p = np.asarray(p, dtype=float)
    d = np.maximum(np.maximum(box.min - p, p - box.max), 0.0)
    return float(np.linalg.norm(d))


def check_collision(scene: Scene, position, robot_radius: float) -> bool:
    """Closed contact: touching a box face or leaving the arena counts."""
    if robot_radius <= 0:
        raise ValueError("robot_radius must be positive")
    p = np.asarray(position, dtype=float)
    if scene.arena is not None and not scene.arena.contains(p):
        return True
    return any(point_box_distance(p, b) <= robot_radius for b in scene.boxes)


def run_episode(scene: Scene, cfg: RunConfig, return_grid: bool = False):
    cfg.validate()
    lib = generate_library(
        cfg.speed, cfg.max_yaw_rate, cfg.library_size, cfg.horizon, cfg.n_waypoints
    )
    grid = VoxelBlockGrid(
        cfg.voxel_size,
        cfg.truncation,
        cfg.block_size,
        cfg.max_weight,
        cfg.max_depth,
        retain_frames=cfg.sliding_window > 0,
    )
    filt = OccupancyFilter(cfg.min_weight, cfg.tsdf_band, cfg.z_min, cfg.z_max)
    intr = cfg.intrinsics()
    noise = cfg.noise_model()
    goal = scene.goal
    fh = scene.flight_height

    sub_dt = cfg.horizon / (cfg.n_waypoints - 1)
    sensor_every = max(1, round(1.0 / (cfg.sensor_hz * sub_dt)))
    cycle_steps = min(cfg.n_waypoints - 1, max(1, round(cfg.replan_period / sub_dt)))

    yaw = scene.start_pose.yaw
    warm_dist = cfg.speed * cfg.warm_start_frames / cfg.sensor_hz
    heading = np.array([np.cos(yaw), np.sin(yaw), 0.0])
    pos = scene.start_pose.translation - warm_dist * heading
    pos = np.array([pos[0], pos[1], fh])
    x0 = pos.copy()

    records: list[Record] = []
    state = {"substep": 0, "frame": 0, "pending": []}
    outcome = None
    collided = False

    def t_now() -> float:
        return state["substep"] * sub_dt

    def record(event: str, action: str = "") -> None:
        records.append(
            Record(t_now(), pos[0], pos[1], pos[2], yaw, action, event, grid.voxel_count())
        )

    def maybe_sense(event: str) -> None:
        if state["substep"] % sensor_every != 0:
            return
        cam = optical_pose(yaw, pos)
        img = raycast_depth(scene, cam, intr, cfg.max_range)
        img = apply_noise(img, noise, state["frame"])
        state["frame"] += 1
        if cfg.frame_delay > 0:
            # camera lag hook: integrate an older image with the current pose
            state["pending"].append(img)
            if len(state["pending"]) <= cfg.frame_delay:
                return
            img = state["pending"].pop(0)
        grid.integrate(img, cam)
        if cfg.sliding_window > 0 and len(grid.frames) > cfg.sliding_window:
            grid.reset_window(cfg.sliding_window)
        record(event)

    def check_terminal() -> str | None:
        if check_collision(scene, pos, cfg.robot_radius):
            return OUTCOME_COLLIDED
        if goal_reached(Pose.from_yaw(yaw, pos), goal, cfg.goal_radius):
            return OUTCOME_GOAL
        return None

    # warm start: integrate while translating forward toward the scene start
    for _ in range(cfg.warm_start_frames):
        maybe_sense("warmup_frame")
        for _ in range(sensor_every):
            pos = pos + cfg.speed * sub_dt * heading
            state["substep"] += 1
            outcome = check_terminal()
            if outcome:
                break
        if outcome:
            break

    cycles_done = 0
    while outcome is None:
        if cycles_done >= cfg.max_cycles:
            outcome = OUTCOME_LIMIT
            record("limit")
            break
        maybe_sense("frame")
        occ = grid.extract_occupied(filt)
        res = select_primitive(
            lib, PlanQuery(Pose.from_yaw(yaw, pos), goal, occ, cfg.clearance), fh
        )
        if res.stopped:
            outcome = OUTCOME_STOPPED
            record("stop")
            break
        record("plan", action=str(res.index))
        cycles_done += 1
        prim = lib.primitives[res.index]
        base_yaw = yaw
        wps = res.waypoints
        for k in range(1, cycle_steps + 1):
            pos = wps[k].copy()
            yaw = base_yaw + prim.heading_at(k * sub_dt)
            state["substep"] += 1
            outcome = check_terminal()
            if outcome:
                break
            if k < cycle_steps:
                maybe_sense("frame")

    if outcome == OUTCOME_COLLIDED:
        collided = True
        record("collision")
    elif outcome == OUTCOME_GOAL:
        record("goal")

    log = RunLog(records, outcome, x0, pos.copy(), goal.copy(), collided)
    if return_grid:
        return log, grid
    return log


def episode_seed(master_seed: int, episode_index: int) -> int:
    return int(np.random.SeedSequence([master_seed, episode_index]).generate_state(1)[0])


def batch_evaluate(scenes: list, cfg: RunConfig, trials: int, master_seed: int = 0) -> dict:
    """Run trials per scene; scenes is a list of (name, Scene) pairs.

    Per-scene and overall goal completion (clamped to [0, 1]) and
    collision rate. Each episode gets its own derived seed.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    per_scene = {}
    episodes = []
    idx = 0
    for name, scene in scenes:
        runs = []
        for _ in range(trials):
            ecfg = cfg.replace(seed=episode_seed(master_seed, idx))
            idx += 1
            log = run_episode(scene, ecfg)
            runs.append(log)
            episodes.append((name, ecfg.seed, log))
        per_scene[name] = {
            "mean_completion": float(np.mean([r.completion_clamped for r in runs])),
            "collision_rate": float(np.mean([r.collided for r in runs])),
            "outcomes": [r.outcome for r in runs],
        }
    all_logs = [log for _, _, log in episodes]
    summary = {
        "scenes": per_scene,
        "overall": {
            "mean_completion": float(np.mean([r.completion_clamped for r in all_logs])),
            "collision_rate": float(np.mean([r.collided for r in all_logs])),
            "runs": len(all_logs),
        },
    }
    return summary


def write_summary(summary: dict, path) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(summary, f, indent=1, sort_keys=True)
        f.write("\n")
