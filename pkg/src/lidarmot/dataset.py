"""Line-delimited dataset files: scans, ground truth, detections, tracks,
and obstacles as self-describing JSON records, one per line.

Numbers round-trip bit-exactly (floats are written with shortest-repr
precision), timestamps always carry at least nine decimal digits, and
no-return ranges are stored as JSON null so files stay parseable outside
Python. A header line carries the format name and version.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .detection import Detection
from .evaluation import GroundTruthFrame, HypothesisFrame
from .geometry import NO_RETURN, ODOM_FRAME, SENSOR_FRAME, LidarScan, PointXY, Pose2D
from .pipeline import DynamicObstacle
from .tracking import Track

FORMAT_NAME = "lidarmot-dataset"
FORMAT_VERSION = 1

KNOWN_KINDS = ("scan", "ground_truth", "detection", "track", "obstacle")


class DatasetFormatError(Exception):
    """Malformed dataset content; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class DatasetRecord:
    kind: str
    timestamp: float
    payload: dict


@dataclass
class RecordStream:
    records: list[DatasetRecord] = field(default_factory=list)
    skipped_unknown: int = 0


def fmt_seconds(t: float) -> str:
    """Decimal seconds with >= 9 decimal digits, still bit-exact.

    Falls back to the shortest round-trip repr for values nine decimals
    cannot represent exactly.
    """
    s = f"{t:.9f}"
    return s if float(s) == t else repr(float(t))


def _dump_record(kind: str, timestamp: float, payload: dict) -> str:
    body = json.dumps(payload, separators=(",", ":"), allow_nan=False)
    return '{"kind":%s,"t":%s,%s' % (
        json.dumps(kind),
        fmt_seconds(timestamp),
        body[1:] if payload else "}",
    )


def write_dataset(
    records: Iterable[DatasetRecord], path: str | Path, metadata: dict | None = None
) -> None:
    """Write records to a file, prefixed with a self-describing header."""
    path = Path(path)
    header = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
    if metadata:
        header.update(metadata)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as f:
        f.write(json.dumps({"kind": "header", **header}, separators=(",", ":")) + "\n")
        for rec in records:
            f.write(_dump_record(rec.kind, rec.timestamp, rec.payload) + "\n")
    tmp.replace(path)


def read_dataset(path: str | Path, strict: bool = True) -> RecordStream:
    """Read a record file.

    Malformed lines raise DatasetFormatError with the line number in strict
    mode and are skipped otherwise; records of unknown kind are skipped and
    counted in both modes (forward compatibility).
    """
    stream = RecordStream()
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                kind = obj.pop("kind")
                if kind == "header":
                    continue
                if kind not in KNOWN_KINDS:
                    stream.skipped_unknown += 1
                    continue
                t = float(obj.pop("t"))
                stream.records.append(DatasetRecord(kind, t, obj))
            except DatasetFormatError:
                raise
            except Exception as exc:
                if strict:
                    raise DatasetFormatError(str(exc), lineno) from exc
                stream.skipped_unknown += 1
    return stream


# -- record codecs ---------------------------------------------------------


def _pose_payload(pose: Pose2D) -> dict:
    return {"x": pose.x, "y": pose.y, "theta": pose.theta}


def _pose_from(payload: dict, timestamp: float) -> Pose2D:
    return Pose2D(payload["x"], payload["y"], payload["theta"], timestamp)


def scan_to_record(scan: LidarScan) -> DatasetRecord:
    ranges = [None if math.isinf(r) else float(r) for r in scan.ranges]
    payload = {
        "angle_min": scan.angle_min,
        "angle_increment": scan.angle_increment,
        "range_max": scan.range_max,
        "frame": scan.frame,
        "ranges": ranges,
    }
    if scan.pose is not None:
        payload["pose"] = _pose_payload(scan.pose)
    return DatasetRecord("scan", scan.timestamp, payload)


def record_to_scan(rec: DatasetRecord) -> LidarScan:
    p = rec.payload
    ranges = np.array(
        [NO_RETURN if r is None else float(r) for r in p["ranges"]], dtype=float
    )
    pose = _pose_from(p["pose"], rec.timestamp) if "pose" in p else None
    return LidarScan(
        timestamp=rec.timestamp,
        ranges=ranges,
        angle_min=p["angle_min"],
        angle_increment=p["angle_increment"],
        range_max=p["range_max"],
        frame=p.get("frame", SENSOR_FRAME),
        pose=pose,
    )


def ground_truth_to_record(frame: GroundTruthFrame) -> DatasetRecord:
    return DatasetRecord(
        "ground_truth",
        frame.timestamp,
        {
            "persons": [{"id": pid, "x": p.x, "y": p.y} for pid, p in frame.persons],
            "robot": _pose_payload(frame.robot_pose),
        },
    )


def record_to_ground_truth(rec: DatasetRecord) -> GroundTruthFrame:
    p = rec.payload
    return GroundTruthFrame(
        timestamp=rec.timestamp,
        persons=tuple(
            (int(q["id"]), PointXY(q["x"], q["y"], frame=ODOM_FRAME))
            for q in p["persons"]
        ),
        robot_pose=_pose_from(p["robot"], rec.timestamp),
    )


# Detection, track and obstacle records are frame-grouped: one record per
# frame whose payload lists the items (possibly none). A frame with nothing
# in it still appears in the timeline, which downstream consumers need to
# step miss streaks and count misses correctly.


def detections_to_record(
    detections: Sequence[Detection], timestamp: float
) -> DatasetRecord:
    return DatasetRecord(
        "detection",
        timestamp,
        {
            "detections": [
                {
                    "x": d.position.x,
                    "y": d.position.y,
                    "frame": d.position.frame,
                    "confidence": d.confidence,
                }
                for d in detections
            ]
        },
    )


def record_to_detections(rec: DatasetRecord) -> list[Detection]:
    return [
        Detection(
            position=PointXY(q["x"], q["y"], frame=q.get("frame", SENSOR_FRAME)),
            confidence=q["confidence"],
            timestamp=rec.timestamp,
        )
        for q in rec.payload["detections"]
    ]


def tracks_to_record(tracks: Sequence[Track], timestamp: float) -> DatasetRecord:
    return DatasetRecord(
        "track",
        timestamp,
        {
            "tracks": [
                {
                    "id": t.id,
                    "x": t.position.x,
                    "y": t.position.y,
                    "vx": t.velocity[0],
                    "vy": t.velocity[1],
                }
                for t in tracks
            ]
        },
    )


def record_to_hypothesis_frame(rec: DatasetRecord) -> HypothesisFrame:
    return HypothesisFrame(
        timestamp=rec.timestamp,
        tracks=tuple(
            (int(q["id"]), PointXY(q["x"], q["y"], frame=ODOM_FRAME))
            for q in rec.payload["tracks"]
        ),
    )


def obstacles_to_record(
    obstacles: Sequence[DynamicObstacle], timestamp: float
) -> DatasetRecord:
    return DatasetRecord(
        "obstacle",
        timestamp,
        {
            "obstacles": [
                {
                    "id": ob.track_id,
                    "x": ob.position.x,
                    "y": ob.position.y,
                    "vx": ob.velocity[0],
                    "vy": ob.velocity[1],
                }
                for ob in obstacles
            ]
        },
    )
