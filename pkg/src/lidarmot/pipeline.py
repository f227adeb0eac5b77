"""Two-stage detector/tracker runtime with per-stage timing, plus the
tracker-to-planner export: velocity-gated dynamic obstacles, constant-velocity
forecasts, and a closed-form collision-forecast check.

In pipelined mode the detector works on scan i+1 while the tracker digests
scan i's detections, so sustained throughput is bound by the slower stage
rather than their sum. Scans cross stages as immutable snapshots through
bounded ordered queues; if the detector falls behind, the oldest waiting
scans are dropped (and counted) so the stream stays fresh and ordered.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .detection import Detection
from .geometry import LidarScan, PointXY
from .tracking import Track

DetectFn = Callable[[LidarScan], "list[Detection]"]
TrackFn = Callable[[LidarScan, "list[Detection]"], "list[Track]"]


@dataclass(frozen=True)
class PipelineConfig:
    scan_rate_hz: float = 20.0
    velocity_gate: float = 0.05   # m/s; slower tracks are not exported
    robot_speed_max: float = 0.5  # m/s
    queue_capacity: int = 2
    pipelined: bool = True
    #: Live sources cannot wait: past capacity the oldest queued scan is
    #: dropped (and counted). Batch replay sets this False to back-pressure
    #: the source instead, so every frame is processed.
    drop_stale: bool = True

    def __post_init__(self):
        if self.scan_rate_hz <= 0:
            raise ValueError("scan_rate_hz must be positive")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")


@dataclass(frozen=True)
class DynamicObstacle:
    track_id: int
    position: PointXY
    velocity: tuple[float, float]
    timestamp: float


@dataclass(frozen=True)
class FrameTiming:
    timestamp: float
    t_det_ms: float
    t_track_ms: float
    t_lat_ms: float


@dataclass(frozen=True)
class StageTimings:
    """Worst/average per stage over a run; t_scan_ms is the nominal period."""

    n_frames: int
    det_worst_ms: float
    det_avg_ms: float
    track_worst_ms: float
    track_avg_ms: float
    lat_worst_ms: float
    lat_avg_ms: float
    t_scan_ms: float


@dataclass(frozen=True)
class FrameResult:
    scan: LidarScan
    tracks: list[Track]
    obstacles: list[DynamicObstacle]
    timing: FrameTiming


@dataclass
class RunSummary:
    frames_in: int = 0
    frames_processed: int = 0
    frames_dropped: int = 0
    timings: list[FrameTiming] = field(default_factory=list)
    wall_time_s: float = 0.0
    error: str | None = None

    @property
    def achieved_hz(self) -> float:
        if self.wall_time_s <= 0:
            return 0.0
        return self.frames_processed / self.wall_time_s


class _DropOldestQueue:
    """Bounded FIFO that never blocks the producer: past capacity the oldest
    entry is discarded. Preserves arrival order for the consumer."""

    def __init__(self, capacity: int):
        self._items: list = []
        self._capacity = capacity
        self._dropped = 0
        self._closed = False
        self._cond = threading.Condition()

    def put(self, item) -> None:
        with self._cond:
            self._items.append(item)
            if len(self._items) > self._capacity:
                self._items.pop(0)
                self._dropped += 1
            self._cond.notify()

    def get(self):
        """Next item, or None once closed and drained."""
        with self._cond:
            while not self._items and not self._closed:
                self._cond.wait()
            if self._items:
                return self._items.pop(0)
            return None

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def dropped(self) -> int:
        with self._cond:
            return self._dropped


class _HandoffQueue:
    """Bounded FIFO with a blocking producer: post-detection frames are never
    dropped, the detector simply waits (back-pressure pushes drops to the
    scan queue where freshness matters)."""

    dropped = 0

    def __init__(self, capacity: int):
        self._items: list = []
        self._capacity = capacity
        self._closed = False
        self._cond = threading.Condition()

    def put(self, item) -> None:
        with self._cond:
            while len(self._items) >= self._capacity and not self._closed:
                self._cond.wait()
            self._items.append(item)
            self._cond.notify_all()

    def get(self):
        with self._cond:
            while not self._items and not self._closed:
                self._cond.wait()
            if self._items:
                item = self._items.pop(0)
                self._cond.notify_all()
                return item
            return None

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()


def export_dynamic_obstacles(
    tracks: Sequence[Track], velocity_gate: float
) -> list[DynamicObstacle]:
    """Tracks moving at least as fast as the gate, as planner obstacles.

    The gate drops near-stationary tracks; most false positives on static
    structure never clear it.
    """
    out = []
    for t in tracks:
        vx, vy = t.velocity
        if math.hypot(vx, vy) >= velocity_gate:
            out.append(
                DynamicObstacle(
                    track_id=t.id,
                    position=t.position,
                    velocity=(vx, vy),
                    timestamp=t.last_update,
                )
            )
    return out


def forecast_position(ob: DynamicObstacle, horizon: float) -> PointXY:
    """Constant-velocity forecast of the obstacle position."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    return PointXY(
        ob.position.x + ob.velocity[0] * horizon,
        ob.position.y + ob.velocity[1] * horizon,
        frame=ob.position.frame,
    )


def time_to_closest_approach(
    robot_position: PointXY,
    robot_velocity: tuple[float, float],
    ob: DynamicObstacle,
) -> tuple[float, float]:
    """Closed-form minimizer of |relative position + relative velocity * t|
    over t >= 0. Returns (t_star, d_min); separating objects give t_star 0
    and the current distance."""
    dp = np.array([ob.position.x - robot_position.x, ob.position.y - robot_position.y])
    dv = np.array([ob.velocity[0] - robot_velocity[0], ob.velocity[1] - robot_velocity[1]])
    vv = float(dv @ dv)
    if vv <= 0.0:
        return 0.0, float(np.hypot(*dp))
    t_star = max(0.0, -float(dp @ dv) / vv)
    d_min = float(np.hypot(*(dp + dv * t_star)))
    return t_star, d_min


def predicts_collision(
    robot_position: PointXY,
    robot_velocity: tuple[float, float],
    ob: DynamicObstacle,
    safety_distance: float = 0.5,
    horizon: float = 2.0,
) -> bool:
    """True when the closest approach happens within the planning horizon
    and comes closer than the safety distance."""
    t_star, d_min = time_to_closest_approach(robot_position, robot_velocity, ob)
    return t_star <= horizon and d_min < safety_distance


def collect_timings(
    timings: Sequence[FrameTiming], scan_rate_hz: float = 20.0
) -> StageTimings:
    """Worst/average per stage across processed frames."""
    if not timings:
        raise ValueError("no frames processed")
    det = [t.t_det_ms for t in timings]
    trk = [t.t_track_ms for t in timings]
    lat = [t.t_lat_ms for t in timings]
    return StageTimings(
        n_frames=len(timings),
        det_worst_ms=max(det),
        det_avg_ms=sum(det) / len(det),
        track_worst_ms=max(trk),
        track_avg_ms=sum(trk) / len(trk),
        lat_worst_ms=max(lat),
        lat_avg_ms=sum(lat) / len(lat),
        t_scan_ms=1000.0 / scan_rate_hz,
    )


def paced(scans: Iterable[LidarScan], rate_hz: float) -> Iterator[LidarScan]:
    """Deliver scans on a wall-clock schedule at the given rate."""
    start = time.perf_counter()
    for i, scan in enumerate(scans):
        target = start + i / rate_hz
        delay = target - time.perf_counter()
        if delay > 0:
            time.sleep(delay)
        yield scan


def run_pipeline(
    scans: Iterable[LidarScan],
    detect_fn: DetectFn,
    track_fn: TrackFn,
    cfg: PipelineConfig | None = None,
    sinks: Sequence[Callable[[FrameResult], None]] = (),
) -> RunSummary:
    """Drive the detector and tracker over a scan stream.

    Pipelined mode runs the two stages on their own threads connected by a
    bounded ordered hand-off; serial mode runs them back to back on one
    thread (the baseline the overlap is measured against). Frames are never
    reordered; under ``drop_stale`` a backlogged scan queue sheds its oldest
    entries and counts them, otherwise the source is back-pressured. A
    failing source shuts the run down cleanly and reports the partial
    summary.
    """
    cfg = cfg or PipelineConfig()
    summary = RunSummary()
    if cfg.drop_stale:
        scan_queue = _DropOldestQueue(cfg.queue_capacity)
    else:
        scan_queue = _HandoffQueue(cfg.queue_capacity)

    def ingest():
        try:
            for scan in scans:
                summary.frames_in += 1
                scan_queue.put(scan)
        except Exception as exc:  # clean shutdown with partial results
            summary.error = f"{type(exc).__name__}: {exc}"
        finally:
            scan_queue.close()

    def process_frame(scan: LidarScan, dets: list[Detection], t0: float, t1: float):
        t2 = time.perf_counter()
        tracks = track_fn(scan, dets)
        t3 = time.perf_counter()
        obstacles = export_dynamic_obstacles(tracks, cfg.velocity_gate)
        timing = FrameTiming(
            timestamp=scan.timestamp,
            t_det_ms=(t1 - t0) * 1e3,
            t_track_ms=(t3 - t2) * 1e3,
            t_lat_ms=(t3 - t0) * 1e3,
        )
        summary.timings.append(timing)
        summary.frames_processed += 1
        result = FrameResult(scan=scan, tracks=tracks, obstacles=obstacles, timing=timing)
        for sink in sinks:
            sink(result)

    wall_start = time.perf_counter()
    ingest_thread = threading.Thread(target=ingest, name="scan-ingest", daemon=True)
    ingest_thread.start()

    if cfg.pipelined:
        handoff = _HandoffQueue(cfg.queue_capacity)

        def detect_stage():
            while True:
                scan = scan_queue.get()
                if scan is None:
                    break
                t0 = time.perf_counter()
                dets = detect_fn(scan)
                t1 = time.perf_counter()
                handoff.put((scan, dets, t0, t1))
            handoff.close()

        def track_stage():
            while True:
                item = handoff.get()
                if item is None:
                    break
                process_frame(*item)

        det_thread = threading.Thread(target=detect_stage, name="detector", daemon=True)
        trk_thread = threading.Thread(target=track_stage, name="tracker", daemon=True)
        det_thread.start()
        trk_thread.start()
        ingest_thread.join()
        det_thread.join()
        trk_thread.join()
    else:
        while True:
            scan = scan_queue.get()
            if scan is None:
                break
            t0 = time.perf_counter()
            dets = detect_fn(scan)
            t1 = time.perf_counter()
            process_frame(scan, dets, t0, t1)
        ingest_thread.join()

    summary.wall_time_s = time.perf_counter() - wall_start
    summary.frames_dropped = scan_queue.dropped
    return summary
