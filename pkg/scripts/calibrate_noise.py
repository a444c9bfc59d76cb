#!/usr/bin/env python3
"""Calibrate the default depth-noise level.

Target: the noisy cloud should sit about 0.41 m from the clean cloud at the
3 m reference range, matching the hardware PCD reference. Two measurements
per sigma:

- displacement: mean distance between each clean point and its own noisy
  counterpart on a flat 3 m target. This is what PCD measures when the
  clouds are sparse enough that the nearest neighbor is the corresponding
  point; analytically 3 * sigma * sqrt(2/pi) (folded normal).
- nn_pcd: nearest-neighbor PCD on the full dense frame. It saturates near
  0.1 m regardless of sigma, because some point of the dense noisy cloud
  always lands near every clean point, so it cannot be used as the
  calibration signal.

The calibrated value is the sigma whose mean displacement lands nearest the
target; it is pinned as mononav.simulator.CALIBRATED_MULT_SIGMA.

Usage: python3 scripts/calibrate_noise.py [--target PCD] [--range M]
"""

import argparse

import numpy as np

from mononav.camera import DepthImage, depth_to_pointcloud
from mononav.metrics import HARDWARE_REFERENCE, point_cloud_distance
from mononav.simulator import NoiseModel, RunConfig, apply_noise


def measure(sigma: float, depth_m: float, seed: int = 0, frames: int = 8):
    cfg = RunConfig()
    intr = cfg.intrinsics()
    noise = NoiseModel(mult_sigma=sigma, seed=seed)
    disp, nn = [], []
    for i in range(frames):
        clean = DepthImage(intr, np.full((intr.height, intr.width), depth_m))
        noisy = apply_noise(clean, noise, i)
        g = depth_to_pointcloud(clean)
        e = depth_to_pointcloud(noisy)
        # corresponding-point displacement (valid pixels keep their order)
        m = min(len(g), len(e))
        disp.append(float(np.mean(np.linalg.norm(g.points[:m] - e.points[:m], axis=1))))
        nn.append(point_cloud_distance(g, e).pcd)
    return float(np.mean(disp)), float(np.mean(nn))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--target", type=float, default=HARDWARE_REFERENCE["pcd"])
    ap.add_argument("--range", type=float, default=3.0, dest="range_m")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sigmas = np.round(np.arange(0.05, 0.31, 0.01), 2)
    analytic = args.target / (args.range_m * np.sqrt(2.0 / np.pi))
    print(f"target displacement: {args.target:.3f} m at {args.range_m:.1f} m range")
    # z-only folded-normal prediction; the 3D displacement adds a ray
    # obliquity factor of ~1.1 for this field of view, so the measured best
    # sigma comes out slightly below this
    print(f"z-only analytic sigma = target / (range * sqrt(2/pi)) = {analytic:.4f}")
    print("sigma   displacement (m)   nn_pcd (m)")
    best, best_err = None, np.inf
    for s in sigmas:
        d, nn = measure(float(s), args.range_m, args.seed)
        mark = ""
        if abs(d - args.target) < best_err:
            best, best_err = float(s), abs(d - args.target)
            mark = "  <-- best so far"
        print(f"{s:5.2f}   {d:12.4f}   {nn:12.4f}{mark}")
    print(f"\ncalibrated mult_sigma = {best:.2f} (|displacement - target| = {best_err:.4f})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
