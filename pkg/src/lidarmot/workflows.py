"""End-to-end compositions shared by the command-line tools and the
benchmark: detector construction, the deterministic serial tracking loop,
and the simulate/track/evaluate bundle.

The serial loop here processes every scan in order with no queueing, so a
fixed (config, seed) pair always yields the identical result; the threaded
runtime in :mod:`lidarmot.pipeline` is for wall-clock execution.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .config import RunConfig
from .detection import Detector, filter_by_confidence, make_detector
from .evaluation import (
    GroundTruthFrame,
    HypothesisFrame,
    MotReport,
    evaluate_sequence,
)
from .geometry import LidarScan, Pose2D, interpolate_pose
from .pipeline import DynamicObstacle, FrameTiming, export_dynamic_obstacles
from .simulator import run_scenario
from .tracking import Track, Tracker


@dataclass
class TrackingRun:
    """Everything one pass over a scan stream produced."""

    hypothesis_frames: list[HypothesisFrame] = field(default_factory=list)
    tracks_by_frame: list[tuple[float, list[Track]]] = field(default_factory=list)
    obstacles_by_frame: list[tuple[float, list[DynamicObstacle]]] = field(
        default_factory=list
    )
    timings: list[FrameTiming] = field(default_factory=list)


def build_detector(run_cfg: RunConfig, replay=None) -> Detector:
    return make_detector(run_cfg.detector_name, run_cfg.detector, replay=replay)


def pose_for_scan(scan: LidarScan, gt_frames: list[GroundTruthFrame] | None) -> Pose2D:
    """Sensor pose for a scan: embedded pose if present, interpolated
    ground-truth odometry as fallback, identity as a last resort."""
    if scan.pose is not None:
        return scan.pose
    if gt_frames:
        return interpolate_pose([f.robot_pose for f in gt_frames], scan.timestamp)
    return Pose2D(0.0, 0.0, 0.0, scan.timestamp)


def tracks_to_hypothesis(timestamp: float, tracks: list[Track]) -> HypothesisFrame:
    return HypothesisFrame(
        timestamp=timestamp,
        tracks=tuple((t.id, t.position) for t in tracks),
    )


def run_tracking(
    scans: list[LidarScan],
    run_cfg: RunConfig,
    detector: Detector | None = None,
    gt_frames: list[GroundTruthFrame] | None = None,
) -> TrackingRun:
    """Serial detect -> gate -> track loop over a scan stream."""
    detector = detector or build_detector(run_cfg)
    tracker = Tracker(run_cfg.tracker)
    threshold = run_cfg.detector.confidence_threshold
    gate = run_cfg.pipeline.velocity_gate
    out = TrackingRun()
    for scan in scans:
        t0 = time.perf_counter()
        detections = filter_by_confidence(detector(scan), threshold)
        t1 = time.perf_counter()
        tracks = tracker.update(detections, pose_for_scan(scan, gt_frames), scan.timestamp)
        t2 = time.perf_counter()
        out.hypothesis_frames.append(tracks_to_hypothesis(scan.timestamp, tracks))
        out.tracks_by_frame.append((scan.timestamp, tracks))
        out.obstacles_by_frame.append(
            (scan.timestamp, export_dynamic_obstacles(tracks, gate))
        )
        out.timings.append(
            FrameTiming(
                timestamp=scan.timestamp,
                t_det_ms=(t1 - t0) * 1e3,
                t_track_ms=(t2 - t1) * 1e3,
                t_lat_ms=(t2 - t0) * 1e3,
            )
        )
    return out


def run_benchmark(
    run_cfg: RunConfig,
    scans: list[LidarScan] | None = None,
    gt_frames: list[GroundTruthFrame] | None = None,
    threshold: float = 0.75,
) -> tuple[MotReport, TrackingRun]:
    """simulate (unless streams are supplied) + track + evaluate."""
    if scans is None or gt_frames is None:
        scans, gt_frames = run_scenario(run_cfg.scenario)
    tracking = run_tracking(scans, run_cfg, gt_frames=gt_frames)
    report = evaluate_sequence(
        gt_frames,
        tracking.hypothesis_frames,
        run_cfg.scenario.lidar.fov(),
        threshold=threshold,
    )
    return report, tracking
