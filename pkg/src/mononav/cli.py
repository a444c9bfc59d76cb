"""Command-line entry point: primitive generation, simulation, depth
evaluation, and reconstruction export.

Configuration merges defaults < config file < command-line flags. The
default config file path can be set with the MONONAV_CONFIG environment
variable. Episode outcomes are data in the summary, not exit codes; a
nonzero exit means a configuration or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .camera import load_depth
from .metrics import evaluate_sequence, format_report
from .primitives import generate_library, save_library
from .scenes import BUILTIN_SCENES, get_scene
from .simulator import (
    ConfigError,
    RunConfig,
    batch_evaluate,
    episode_seed,
    run_episode,
    write_summary,
)
from .tsdf import OccupancyFilter, VoxelBlockGrid

CONFIG_ENV = "MONONAV_CONFIG"


def _load_config(path: str | None, overrides: dict) -> RunConfig:
    d = {}
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        with open(path) as f:
            d = json.load(f)
        if not isinstance(d, dict):
            raise ConfigError(f"config file must hold a JSON object: {path}")
    d.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(d)


def _occupancy_filter(cfg: RunConfig) -> OccupancyFilter:
    return OccupancyFilter(cfg.min_weight, cfg.tsdf_band, cfg.z_min, cfg.z_max)


def cmd_gen_primitives(args) -> int:
    lib = generate_library(
        speed=args.speed,
        max_yaw_rate=args.max_yaw_rate,
        count=args.count,
        horizon=args.horizon,
        n_waypoints=args.waypoints,
    )
    save_library(lib, args.out)
    print(f"wrote {len(lib)} primitives to {args.out}")
    return 0


def cmd_sim(args) -> int:
    scene_arg = args.scene
    if scene_arg not in BUILTIN_SCENES and not Path(scene_arg).is_file():
        print(f"error: scene file not found: {scene_arg}", file=sys.stderr)
        return 2
    scene = get_scene(scene_arg)
    cfg = _load_config(
        args.config,
        {"seed": args.seed, "mult_sigma": args.noise_sigma, "clearance": args.clearance},
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w", newline="\n") as f:
        json.dump(cfg.to_dict(), f, indent=1, sort_keys=True)
        f.write("\n")

    logs = []
    for trial in range(args.trials):
        ecfg = cfg if args.trials == 1 else cfg.replace(seed=episode_seed(cfg.seed, trial))
        result = run_episode(scene, ecfg, return_grid=args.export_ply)
        log, grid = result if args.export_ply else (result, None)
        log.to_csv(out / f"trial_{trial:03d}.csv")
        if grid is not None:
            grid.export_pointcloud(_occupancy_filter(ecfg), out / f"trial_{trial:03d}.ply")
        logs.append(log)
        print(
            f"trial {trial}: {log.outcome}, completion "
            f"{log.completion_clamped:.3f}, collided={log.collided}"
        )

    import numpy as np

    summary = {
        "scene": scene_arg,
        "trials": args.trials,
        "outcomes": [log.outcome for log in logs],
        "mean_completion": float(np.mean([log.completion_clamped for log in logs])),
        "collision_rate": float(np.mean([log.collided for log in logs])),
    }
    write_summary(summary, out / "summary.json")
    return 0


def cmd_batch(args) -> int:
    cfg = _load_config(args.config, {"mult_sigma": args.noise_sigma, "clearance": args.clearance})
    scenes = [(name, builder()) for name, builder in BUILTIN_SCENES.items()]
    summary = batch_evaluate(scenes, cfg, args.trials, master_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w", newline="\n") as f:
        json.dump(cfg.to_dict(), f, indent=1, sort_keys=True)
        f.write("\n")
    write_summary(summary, out / "summary.json")
    print(json.dumps(summary["overall"], indent=1, sort_keys=True))
    return 0


def _paired_frames(gt: Path, est: Path):
    if gt.is_file() and est.is_file():
        return [(load_depth(gt), load_depth(est))]
    if gt.is_dir() and est.is_dir():
        gt_files = sorted(p for p in gt.iterdir() if p.is_file())
        est_files = sorted(p for p in est.iterdir() if p.is_file())
        if len(gt_files) != len(est_files):
            raise ValueError(
                f"frame count mismatch: {len(gt_files)} ground-truth vs {len(est_files)} estimated"
            )
        return [(load_depth(g), load_depth(e)) for g, e in zip(gt_files, est_files)]
    raise ValueError("--gt and --est must both be files or both be directories")


def cmd_eval_depth(args) -> int:
    gt, est = Path(args.gt), Path(args.est)
    for p in (gt, est):
        if not p.exists():
            print(f"error: no such path: {p}", file=sys.stderr)
            return 2
    try:
        frames = _paired_frames(gt, est)
        m, pcd = evaluate_sequence(frames)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(format_report(m, pcd, fmt=args.format))
    return 0


def cmd_export(args) -> int:
    if args.map:
        if not Path(args.map).is_file():
            print(f"error: map file not found: {args.map}", file=sys.stderr)
            return 2
        grid = VoxelBlockGrid.load(args.map)
        cfg = _load_config(args.config, {})
    else:
        if not args.scene:
            print("error: provide --map or --scene for a replay", file=sys.stderr)
            return 2
        scene_arg = args.scene
        if scene_arg not in BUILTIN_SCENES and not Path(scene_arg).is_file():
            print(f"error: scene file not found: {scene_arg}", file=sys.stderr)
            return 2
        cfg = _load_config(args.config, {"seed": args.seed})
        _, grid = run_episode(get_scene(scene_arg), cfg, return_grid=True)
    n = grid.export_pointcloud(_occupancy_filter(cfg), args.out)
    print(f"wrote {n} vertices to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mononav", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-primitives", help="generate a motion-primitive library file")
    g.add_argument("--speed", type=float, default=0.5)
    g.add_argument("--horizon", type=float, default=1.0)
    g.add_argument("--max-yaw-rate", type=float, default=0.7)
    g.add_argument("--count", type=int, default=7)
    g.add_argument("--waypoints", type=int, default=21)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_primitives)

    s = sub.add_parser("sim", help="run closed-loop episodes in a scene")
    s.add_argument("--scene", required=True, help="builtin scene name or scene JSON path")
    s.add_argument("--config", default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--noise-sigma", type=float, default=None)
    s.add_argument("--clearance", type=float, default=None)
    s.add_argument("--export-ply", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sim)

    b = sub.add_parser("batch", help="evaluate all bundled scenes")
    b.add_argument("--config", default=None)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--trials", type=int, default=3)
    b.add_argument("--noise-sigma", type=float, default=None)
    b.add_argument("--clearance", type=float, default=None)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_batch)

    e = sub.add_parser("eval-depth", help="depth metric report for paired frames")
    e.add_argument("--gt", required=True)
    e.add_argument("--est", required=True)
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.set_defaults(func=cmd_eval_depth)

    x = sub.add_parser("export", help="export occupied voxels to PLY")
    x.add_argument("--map", default=None, help="serialized voxel map")
    x.add_argument("--scene", default=None, help="replay: scene name or path")
    x.add_argument("--config", default=None)
    x.add_argument("--seed", type=int, default=None)
    x.add_argument("--out", required=True)
    x.set_defaults(func=cmd_export)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
