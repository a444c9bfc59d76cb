import numpy as np
import pytest

from mononav.geometry import Pose
from mononav.scenes import (
    BUILTIN_SCENES,
    REACHABLE_SCENES,
    Box,
    Scene,
    get_scene,
    load_scene,
    save_scene,
)


def test_box_validation():
    with pytest.raises(ValueError):
        Box((0, 0, 0), (0, 1, 1))
    b = Box((0, 0, 0), (1, 2, 3))
    assert b.contains((0.5, 1.0, 1.5))
    assert not b.contains((1.5, 1.0, 1.5))


def test_start_inside_box_rejected():
    with pytest.raises(ValueError):
        Scene(
            [Box((-1, -1, 0), (1, 1, 2))],
            Pose.from_yaw(0.0, (0, 0, 0.4)),
            (5, 0, 0.4),
        )


def test_auto_arena_margin():
    s = Scene([Box((0, 0, 0), (1, 1, 1))], Pose.from_yaw(0.0, (-2, 0, 0.4)), (5, 0, 0.4))
    assert np.allclose(s.arena.min, (-1, -1, -1))
    assert np.allclose(s.arena.max, (2, 2, 2))


def test_builtin_scenes_well_formed():
    assert set(REACHABLE_SCENES) < set(BUILTIN_SCENES)
    for name, builder in BUILTIN_SCENES.items():
        s = builder()
        assert len(s.boxes) > 0
        assert s.flight_height > 0
        assert s.arena.contains(s.start_pose.translation)
        if name in REACHABLE_SCENES:
            assert s.arena.contains(s.goal)
        # goal not inside any obstacle
        for b in s.boxes:
            assert not b.contains(s.goal)


def test_corner_scenes_mirror():
    left = get_scene("l_corner_left")
    right = get_scene("l_corner_right")
    assert np.allclose(left.goal * [1, -1, 1], right.goal)
    assert len(left.boxes) == len(right.boxes)


def test_scene_json_round_trip(tmp_path):
    s = get_scene("straight_hall")
    path = tmp_path / "scene.json"
    save_scene(s, path)
    back = load_scene(path)
    assert len(back.boxes) == len(s.boxes)
    for a, b in zip(s.boxes, back.boxes):
        assert np.array_equal(a.min, b.min)
        assert np.array_equal(a.max, b.max)
    assert np.allclose(back.start_pose.translation, s.start_pose.translation)
    assert abs(back.start_pose.yaw - s.start_pose.yaw) < 1e-12
    assert np.array_equal(back.goal, s.goal)
    assert np.array_equal(back.arena.min, s.arena.min)


def test_get_scene_by_name_and_path(tmp_path):
    assert get_scene("t_intersection").goal[0] == 9.0
    path = tmp_path / "s.json"
    save_scene(get_scene("straight_hall"), path)
    assert len(get_scene(str(path)).boxes) == len(get_scene("straight_hall").boxes)


def test_load_missing_file():
    with pytest.raises(OSError):
        load_scene("/nonexistent/scene.json")
