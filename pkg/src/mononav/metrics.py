"""Depth-estimation error metrics and point-cloud distance.

All pixel metrics are computed over the pixels valid (> 0) in both images.
Threshold accuracies use a strict comparison: a pixel counts toward
delta_n when max(d/d_hat, d_hat/d) < 1.25**n.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np
from scipy.spatial import cKDTree

from .camera import DepthImage, PointCloud

# Reference values measured on the original hardware platform (fisheye MAV
# camera, neural depth estimator, Kinect ground truth), averaged over 77
# frames. Informational fixture only; not reproducible in simulation and
# not a test target.
HARDWARE_REFERENCE = {
    "delta1": 0.62,
    "delta2": 0.85,
    "delta3": 0.95,
    "rel": 0.48,
    "rmse": 1.05,
    "log10": 0.11,
    "pcd": 0.41,
}


@dataclasses.dataclass(frozen=True)
class DepthMetrics:
    rel: float
    rmse: float
    log10: float
    delta1: float
    delta2: float
    delta3: float
    valid_pixel_count: int


@dataclasses.dataclass(frozen=True)
class PcdResult:
    pcd: float
    matched_count: int


def depth_metrics(gt: DepthImage, est: DepthImage) -> DepthMetrics:
    if gt.data.shape != est.data.shape:
        raise ValueError("depth image dimensions do not match")
    mask = (gt.data > 0) & (est.data > 0)
    M = int(mask.sum())
    if M == 0:
        raise ValueError("no pixels are valid in both images")
    d = gt.data[mask]
    dh = est.data[mask]
    err = np.abs(d - dh)
    rel = float(np.mean(err / d))
    rmse = float(np.sqrt(np.mean(err**2)))
    log10 = float(np.mean(np.abs(np.log10(d) - np.log10(dh))))
    ratio = np.maximum(d / dh, dh / d)
    deltas = [float(np.mean(ratio < 1.25**n)) for n in (1, 2, 3)]
    return DepthMetrics(rel, rmse, log10, deltas[0], deltas[1], deltas[2], M)


def point_cloud_distance(G: PointCloud, E: PointCloud) -> PcdResult:
    """Mean over ground-truth points of distance to the nearest estimated point."""
    if len(G) == 0 or len(E) == 0:
        raise ValueError("point clouds must be non-empty")
    tree = cKDTree(E.points)
    d, _ = tree.query(G.points)
    return PcdResult(float(np.mean(d)), len(G))


def _mean_metrics(per_frame: list[DepthMetrics]) -> DepthMetrics:
    return DepthMetrics(
        rel=float(np.mean([m.rel for m in per_frame])),
        rmse=float(np.mean([m.rmse for m in per_frame])),
        log10=float(np.mean([m.log10 for m in per_frame])),
        delta1=float(np.mean([m.delta1 for m in per_frame])),
        delta2=float(np.mean([m.delta2 for m in per_frame])),
        delta3=float(np.mean([m.delta3 for m in per_frame])),
        valid_pixel_count=int(sum(m.valid_pixel_count for m in per_frame)),
    )


def evaluate_sequence(frames: list) -> tuple[DepthMetrics, PcdResult]:
    """Frame-mean metrics over (gt, est) DepthImage pairs, plus mean PCD.

    Point clouds for PCD are unprojected in the camera frame of each image.
    """
    from .camera import depth_to_pointcloud

    if len(frames) == 0:
        raise ValueError("need at least one frame")
    per_frame = [depth_metrics(gt, est) for gt, est in frames]
    pcds = []
    total = 0
    for gt, est in frames:
        g = depth_to_pointcloud(gt)
        e = depth_to_pointcloud(est)
        r = point_cloud_distance(g, e)
        pcds.append(r.pcd)
        total += r.matched_count
    return _mean_metrics(per_frame), PcdResult(float(np.mean(pcds)), total)


def format_report(m: DepthMetrics, pcd: PcdResult | None = None, fmt: str = "text") -> str:
    values = {
        "delta1": m.delta1,
        "delta2": m.delta2,
        "delta3": m.delta3,
        "rel": m.rel,
        "rmse": m.rmse,
        "log10": m.log10,
    }
    if pcd is not None:
        values["pcd"] = pcd.pcd
    if fmt == "json":
        values["valid_pixel_count"] = m.valid_pixel_count
        return json.dumps(values, indent=1, sort_keys=True)
    cols = list(values)
    header = "  ".join(f"{c:>8s}" for c in cols)
    row = "  ".join(f"{values[c]:8.4f}" for c in cols)
    return f"{header}\n{row}"
