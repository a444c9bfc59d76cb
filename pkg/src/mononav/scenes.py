"""Synthetic box worlds: hallway scenes, JSON I/O, and the bundled gallery.

Scenes are collections of axis-aligned boxes (walls, columns) with a start
pose, a goal, and a flight height. Corridors are 2.5 m wide with 0.2 m
thick walls from floor to 2 m. The start heading is +x; the episode
warm-start backs the vehicle off behind the start, so every corridor
extends at least 3 m behind the origin.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .geometry import Pose

WALL_Z = (0.0, 2.0)
FLIGHT_HEIGHT = 0.4


@dataclasses.dataclass(frozen=True)
class Box:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=float).reshape(3)
        hi = np.asarray(self.max, dtype=float).reshape(3)
        if not np.all(lo < hi):
            raise ValueError("box min must be strictly below max componentwise")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.min) and np.all(p <= self.max))


@dataclasses.dataclass(frozen=True)
class Scene:
    boxes: tuple
    start_pose: Pose
    goal: np.ndarray
    flight_height: float = FLIGHT_HEIGHT
    arena: Box | None = None

    def __post_init__(self):
        object.__setattr__(self, "goal", np.asarray(self.goal, dtype=float).reshape(3))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        for b in self.boxes:
            if b.contains(self.start_pose.translation):
                raise ValueError("start position lies inside a box")
        if self.arena is None:
            lo = np.min([b.min for b in self.boxes], axis=0) - 1.0
            hi = np.max([b.max for b in self.boxes], axis=0) + 1.0
            object.__setattr__(self, "arena", Box(lo, hi))


def _wall(x0, x1, y0, y1) -> Box:
    return Box((x0, y0, WALL_Z[0]), (x1, y1, WALL_Z[1]))


def straight_hall() -> Scene:
    boxes = [
        _wall(-3.2, 10.2, 1.25, 1.45),
        _wall(-3.2, 10.2, -1.45, -1.25),
        _wall(10.0, 10.2, -1.25, 1.25),
        _wall(-3.4, -3.2, -1.45, 1.45),
    ]
    return Scene(boxes, Pose.from_yaw(0.0, (0, 0, FLIGHT_HEIGHT)), (8.0, 0.0, FLIGHT_HEIGHT))


def _resample(poly: np.ndarray, spacing: float) -> np.ndarray:
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.arange(0.0, s[-1] + spacing / 2, spacing)
    return np.stack(
        [np.interp(target, s, poly[:, 0]), np.interp(target, s, poly[:, 1])], axis=-1
    )


def _box_chain(poly: np.ndarray, half: float = 0.22, spacing: float = 0.3) -> list:
    """Wall made of overlapping axis-aligned square boxes along a polyline."""
    return [
        _wall(p[0] - half, p[0] + half, p[1] - half, p[1] + half)
        for p in _resample(poly, spacing)
    ]


def _greedy_path(goal_xy, lead: float = 3.4, ext: float = 1.6) -> np.ndarray:
    """Centerline the default primitive library flies toward a goal in open
    space, with a straight lead-in behind the start and an extension past
    the goal."""
    from .planner import PlanQuery, select_primitive
    from .primitives import generate_library

    lib = generate_library()
    empty = np.zeros((0, 3))
    goal = np.array([goal_xy[0], goal_xy[1], FLIGHT_HEIGHT])
    pos = np.array([0.0, 0.0, FLIGHT_HEIGHT])
    yaw = 0.0
    pts = [np.array([-lead, 0.0]), np.array([0.0, 0.0])]
    for _ in range(80):
        res = select_primitive(lib, PlanQuery(Pose.from_yaw(yaw, pos), goal, empty, 0.5))
        wps = res.waypoints
        pts.extend(wps[1:, :2])
        prim = lib.primitives[res.index]
        yaw += prim.heading_at(prim.spec.horizon)
        pos = wps[-1]
        if np.hypot(pos[0] - goal[0], pos[1] - goal[1]) <= 0.4:
            break
    d = pts[-1] - pts[-2]
    d = d / np.linalg.norm(d)
    pts.append(pts[-1] + ext * d)
    return np.array(pts)


def _swept_corridor(goal_xy, half_width: float = 1.25) -> list:
    """Corridor walls swept along the greedy open-space path to the goal.

    The walls stay half_width off the flown centerline, so the default
    library can follow the corridor without the clearance constraint ever
    binding; the shape is a naturally rounded corner.
    """
    center = _resample(_greedy_path(goal_xy), 0.05)
    tang = np.gradient(center, axis=0)
    tang /= np.linalg.norm(tang, axis=1, keepdims=True)
    normal = np.stack([-tang[:, 1], tang[:, 0]], axis=-1)
    half = 0.22
    off = half_width + half
    boxes = []
    for sign in (1.0, -1.0):
        boxes += _box_chain(center + sign * off * normal)
    # end caps across both ends
    for idx, direction in ((0, -1.0), (-1, 1.0)):
        p, t, n = center[idx], tang[idx], normal[idx]
        row = np.array(
            [p + direction * 2 * half * t + u * n for u in np.linspace(-off, off, 9)]
        )
        boxes += _box_chain(row, half=half, spacing=0.25)
    return boxes


def l_corner_left() -> Scene:
    # corner rounded for the vehicle's turn dynamics: the corridor sweeps
    # from heading +x to roughly +y on the way to the goal
    goal = (6.0, 6.0)
    boxes = _swept_corridor(goal)
    return Scene(
        boxes, Pose.from_yaw(0.0, (0, 0, FLIGHT_HEIGHT)), (goal[0], goal[1], FLIGHT_HEIGHT)
    )


def _mirror_y(scene: Scene) -> Scene:
    boxes = [
        Box(
            (b.min[0], -b.max[1], b.min[2]),
            (b.max[0], -b.min[1], b.max[2]),
        )
        for b in scene.boxes
    ]
    g = scene.goal
    return Scene(
        boxes,
        Pose.from_yaw(-scene.start_pose.yaw, scene.start_pose.translation * [1, -1, 1]),
        (g[0], -g[1], g[2]),
        scene.flight_height,
    )


def l_corner_right() -> Scene:
    return _mirror_y(l_corner_left())


def t_intersection() -> Scene:
    # goal lies straight ahead behind the back wall of the T: unreachable,
    # the vehicle is expected to self-stop at the junction
    boxes = [
        _wall(4.75, 4.95, -6.2, 6.2),  # back wall
        _wall(-3.2, 2.25, 1.25, 1.45),
        _wall(-3.2, 2.25, -1.45, -1.25),
        _wall(2.05, 2.25, 1.45, 6.2),
        _wall(2.05, 2.25, -6.2, -1.45),
        _wall(2.05, 4.95, 6.0, 6.2),
        _wall(2.05, 4.95, -6.2, -6.0),
        _wall(-3.4, -3.2, -1.45, 1.45),
    ]
    return Scene(boxes, Pose.from_yaw(0.0, (0, 0, FLIGHT_HEIGHT)), (9.0, 0.0, FLIGHT_HEIGHT))


def column_room() -> Scene:
    def column(cx, cy, half=0.2):
        return _wall(cx - half, cx + half, cy - half, cy + half)

    boxes = [
        _wall(-3.2, 0.0, 1.25, 1.45),  # entry corridor
        _wall(-3.2, 0.0, -1.45, -1.25),
        _wall(-0.2, 0.0, 1.45, 4.2),  # entrance shoulders
        _wall(-0.2, 0.0, -4.2, -1.45),
        _wall(-0.2, 10.2, 4.0, 4.2),  # room perimeter
        _wall(-0.2, 10.2, -4.2, -4.0),
        _wall(10.0, 10.2, -4.0, 4.0),
        _wall(-3.4, -3.2, -1.45, 1.45),
        column(3.0, 1.0),
        column(5.0, -1.3),
        column(7.0, 1.2),
    ]
    return Scene(boxes, Pose.from_yaw(0.0, (0, 0, FLIGHT_HEIGHT)), (8.5, 0.0, FLIGHT_HEIGHT))


BUILTIN_SCENES = {
    "straight_hall": straight_hall,
    "l_corner_left": l_corner_left,
    "l_corner_right": l_corner_right,
    "t_intersection": t_intersection,
    "column_room": column_room,
}

# scenes whose goal is reachable under the default primitive library
REACHABLE_SCENES = ("straight_hall", "l_corner_left", "l_corner_right", "column_room")


def save_scene(scene: Scene, path) -> None:
    doc = {
        "boxes": [{"min": b.min.tolist(), "max": b.max.tolist()} for b in scene.boxes],
        "start": {
            "position": scene.start_pose.translation.tolist(),
            "yaw_deg": math.degrees(scene.start_pose.yaw),
        },
        "goal": scene.goal.tolist(),
        "flight_height": scene.flight_height,
    }
    if scene.arena is not None:
        doc["arena"] = {"min": scene.arena.min.tolist(), "max": scene.arena.max.tolist()}
    with open(path, "w", newline="\n") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def load_scene(path) -> Scene:
    with open(path) as f:
        doc = json.load(f)
    boxes = [Box(b["min"], b["max"]) for b in doc["boxes"]]
    start = Pose.from_yaw(math.radians(doc["start"]["yaw_deg"]), doc["start"]["position"])
    arena = None
    if "arena" in doc:
        arena = Box(doc["arena"]["min"], doc["arena"]["max"])
    return Scene(boxes, start, doc["goal"], doc.get("flight_height", FLIGHT_HEIGHT), arena)


def get_scene(name_or_path) -> Scene:
    """Builtin scene name or path to a scene JSON file."""
    name = str(name_or_path)
    if name in BUILTIN_SCENES:
        return BUILTIN_SCENES[name]()
    return load_scene(name)
