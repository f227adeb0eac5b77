"""Command-line entry points: simulate, detect, track, evaluate, pipeline,
and bench. Outputs are dataset files and JSON reports; there is no
interactive mode.

The default data directory is the current directory unless LIDARMOT_DATA_DIR
is set; --in/--out override it per invocation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import dataset as ds
from .config import ConfigError, load_config
from .dataset import DatasetFormatError
from .detection import filter_by_confidence
from .evaluation import evaluate_sequence
from .geometry import Pose2D, interpolate_pose
from .pipeline import collect_timings, paced, run_pipeline
from .report import build_report, mot_section, timing_section, write_report
from .simulator import LidarParams, run_scenario
from .tracking import Tracker
from .workflows import build_detector, pose_for_scan, run_benchmark

SCANS_FILE = "scans.jsonl"
GROUND_TRUTH_FILE = "ground_truth.jsonl"
DETECTIONS_FILE = "detections.jsonl"
TRACKS_FILE = "tracks.jsonl"
OBSTACLES_FILE = "obstacles.jsonl"
REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"

ENV_DATA_DIR = "LIDARMOT_DATA_DIR"


def _default_dir() -> Path:
    return Path(os.environ.get(ENV_DATA_DIR, "."))


def _in_dir(args) -> Path:
    return Path(args.in_dir) if args.in_dir else _default_dir()


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else _default_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_run_config(args):
    cfg = load_config(args.config or args.preset, preset=args.preset)
    overrides = {}
    scenario = cfg.scenario
    for name in ("kind", "seed", "duration"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "persons", None) is not None:
        overrides["n_persons"] = args.persons
    if getattr(args, "noise_std", None) is not None:
        overrides["noise_std"] = args.noise_std
    if getattr(args, "dropout", None) is not None:
        overrides["dropout_prob"] = args.dropout
    if overrides:
        scenario = dataclasses.replace(scenario, **overrides)
        cfg = dataclasses.replace(cfg, scenario=scenario)
    if getattr(args, "velocity_gate", None) is not None:
        cfg = dataclasses.replace(
            cfg,
            pipeline=dataclasses.replace(cfg.pipeline, velocity_gate=args.velocity_gate),
        )
    return cfg


def _read_scans(path: Path, strict: bool):
    stream = ds.read_dataset(path, strict=strict)
    return [ds.record_to_scan(r) for r in stream.records if r.kind == "scan"]


def _read_ground_truth(path: Path, strict: bool):
    stream = ds.read_dataset(path, strict=strict)
    return [
        ds.record_to_ground_truth(r) for r in stream.records if r.kind == "ground_truth"
    ]


def _cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    scans, gt = run_scenario(cfg.scenario)
    meta = {"kind": cfg.scenario.kind, "seed": cfg.scenario.seed}
    ds.write_dataset((ds.scan_to_record(s) for s in scans), out / SCANS_FILE, meta)
    ds.write_dataset(
        (ds.ground_truth_to_record(f) for f in gt), out / GROUND_TRUTH_FILE, meta
    )
    print(f"simulated {len(scans)} scans / {len(gt)} ground-truth frames -> {out}")
    return 0


def _cmd_detect(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    scans = _read_scans(_in_dir(args) / SCANS_FILE, args.strict)
    detector = build_detector(cfg)
    records = [ds.detections_to_record(detector(s), s.timestamp) for s in scans]
    ds.write_dataset(records, out / DETECTIONS_FILE, {"preset": cfg.preset})
    n = sum(len(r.payload["detections"]) for r in records)
    print(f"detected {n} candidates over {len(scans)} scans -> {out / DETECTIONS_FILE}")
    return 0


def _cmd_track(args) -> int:
    cfg = _load_run_config(args)
    in_dir = _in_dir(args)
    out = _out_dir(args)
    det_stream = ds.read_dataset(in_dir / DETECTIONS_FILE, strict=args.strict)
    frames = [
        (r.timestamp, ds.record_to_detections(r))
        for r in det_stream.records
        if r.kind == "detection"
    ]
    scans_path = in_dir / SCANS_FILE
    gt_path = in_dir / GROUND_TRUTH_FILE
    pose_by_time = {}
    gt_frames = None
    if scans_path.exists():
        pose_by_time = {
            s.timestamp: s.pose
            for s in _read_scans(scans_path, args.strict)
            if s.pose is not None
        }
    elif gt_path.exists():
        gt_frames = _read_ground_truth(gt_path, args.strict)

    tracker = Tracker(cfg.tracker)
    records = []
    for t, dets in sorted(frames, key=lambda kv: kv[0]):
        gated = filter_by_confidence(dets, cfg.detector.confidence_threshold)
        pose = pose_by_time.get(t)
        if pose is None:
            if gt_frames:
                pose = interpolate_pose([f.robot_pose for f in gt_frames], t)
            else:
                pose = Pose2D(0.0, 0.0, 0.0, t)
        tracks = tracker.update(gated, pose, t)
        records.append(ds.tracks_to_record(tracks, t))
    ds.write_dataset(records, out / TRACKS_FILE, {"preset": cfg.preset})
    print(f"tracked {len(records)} frames -> {out / TRACKS_FILE}")
    return 0


def _cmd_evaluate(args) -> int:
    in_dir = _in_dir(args)
    out = _out_dir(args)
    gt_frames = _read_ground_truth(in_dir / GROUND_TRUTH_FILE, args.strict)
    track_stream = ds.read_dataset(in_dir / TRACKS_FILE, strict=args.strict)
    hyp = [
        ds.record_to_hypothesis_frame(r)
        for r in track_stream.records
        if r.kind == "track"
    ]
    fov = LidarParams().fov()
    mot = evaluate_sequence(gt_frames, hyp, fov, threshold=args.threshold)
    report = build_report(
        metadata={"threshold": args.threshold, "source": str(in_dir)},
        mot=mot,
    )
    write_report(report, out / REPORT_FILE)
    mota_pct = f"{mot.mota * 100:.2f}%" if mot.total_g else "n/a"
    print(f"MOTA {mota_pct} over {len(mot.frames)} frames -> {out / REPORT_FILE}")
    return 0


def _load_replay_detections(in_dir: Path, strict: bool):
    stream = ds.read_dataset(in_dir / DETECTIONS_FILE, strict=strict)
    out = []
    for rec in stream.records:
        if rec.kind == "detection":
            out.extend(ds.record_to_detections(rec))
    return out


def _cmd_pipeline(args) -> int:
    cfg = _load_run_config(args)
    in_dir = _in_dir(args)
    out = _out_dir(args)
    scans = _read_scans(in_dir / SCANS_FILE, args.strict)
    replay = None
    if cfg.detector_name == "replay":
        replay = _load_replay_detections(in_dir, args.strict)
    detector = build_detector(cfg, replay=replay)
    threshold = cfg.detector.confidence_threshold
    tracker = Tracker(cfg.tracker)

    def detect_fn(scan):
        return filter_by_confidence(detector(scan), threshold)

    def track_fn(scan, dets):
        return tracker.update(dets, pose_for_scan(scan, None), scan.timestamp)

    # File replay without --realtime is a batch job: back-pressure the
    # reader instead of shedding frames.
    pipe_cfg = dataclasses.replace(cfg.pipeline, drop_stale=args.realtime)
    if args.serial:
        pipe_cfg = dataclasses.replace(pipe_cfg, pipelined=False)
    source = paced(scans, pipe_cfg.scan_rate_hz) if args.realtime else iter(scans)

    track_records = []
    obstacle_records = []

    def sink(result):
        track_records.append(ds.tracks_to_record(result.tracks, result.scan.timestamp))
        obstacle_records.append(
            ds.obstacles_to_record(result.obstacles, result.scan.timestamp)
        )

    summary = run_pipeline(source, detect_fn, track_fn, pipe_cfg, sinks=[sink])
    ds.write_dataset(track_records, out / TRACKS_FILE, {"preset": cfg.preset})
    ds.write_dataset(obstacle_records, out / OBSTACLES_FILE, {"preset": cfg.preset})
    stage = collect_timings(summary.timings, pipe_cfg.scan_rate_hz)
    timings = {
        "frames_in": summary.frames_in,
        "frames_processed": summary.frames_processed,
        "frames_dropped": summary.frames_dropped,
        "achieved_hz": summary.achieved_hz,
        "stage": timing_section(stage),
    }
    (out / TIMINGS_FILE).write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    print(
        f"pipeline: {summary.frames_processed}/{summary.frames_in} frames "
        f"({summary.frames_dropped} dropped), "
        f"avg latency {stage.lat_avg_ms:.2f} ms -> {out}"
    )
    if summary.error:
        print(f"source error: {summary.error}", file=sys.stderr)
        return 1
    return 0


def _bench_one(args, preset: str | None, seed: int | None):
    sweep_args = argparse.Namespace(**vars(args))
    sweep_args.preset = preset
    if seed is not None:
        sweep_args.seed = seed
    cfg = _load_run_config(sweep_args)
    scans = gt_frames = None
    if args.in_dir:
        in_dir = Path(args.in_dir)
        scans = _read_scans(in_dir / SCANS_FILE, args.strict)
        gt_frames = _read_ground_truth(in_dir / GROUND_TRUTH_FILE, args.strict)
    mot, tracking = run_benchmark(
        cfg, scans=scans, gt_frames=gt_frames, threshold=args.threshold
    )
    return cfg, mot, tracking


def _cmd_bench(args) -> int:
    out = _out_dir(args)
    presets = args.preset.split(",") if args.preset else [None]
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]
    rows = []
    for preset in presets:
        for seed in seeds:
            cfg, mot, tracking = _bench_one(args, preset, seed)
            stage = None
            if args.timings:
                stage = collect_timings(tracking.timings, cfg.pipeline.scan_rate_hz)
            row = {
                "preset": cfg.preset,
                "kind": cfg.scenario.kind,
                "seed": cfg.scenario.seed,
                "mot": mot_section(mot),
            }
            if stage is not None:
                row["timing"] = timing_section(stage)
            rows.append((cfg, mot, row))
            print(
                f"bench {cfg.preset or 'defaults'} seed {cfg.scenario.seed}: "
                f"MOTA {mot.mota * 100:.2f}%  MOTP {mot.motp:.3f} m  "
                f"(ID {mot.total_id_switches}  Miss {mot.total_misses}  "
                f"FP {mot.total_false_positives}  g {mot.total_g})"
            )

    cfg0, mot0, row0 = rows[0]
    metadata = {
        "kind": cfg0.scenario.kind,
        "duration": cfg0.scenario.duration,
        "threshold": args.threshold,
        "velocity_gate": cfg0.pipeline.velocity_gate,
        "source": str(args.in_dir) if args.in_dir else "simulated",
        "preset": cfg0.preset,
        "seed": cfg0.scenario.seed,
    }
    if len(rows) == 1:
        report = build_report(metadata=metadata, mot=mot0)
        if "timing" in row0:
            report["timing"] = row0["timing"]
    else:
        report = build_report(metadata=metadata)
        report["rows"] = [row for _, _, row in rows]
    write_report(report, out / REPORT_FILE)
    print(f"report -> {out / REPORT_FILE}")
    return 0


def _add_common(p: argparse.ArgumentParser, scenario: bool = False):
    p.add_argument("--preset", help="named configuration (config-1/2/3)")
    p.add_argument("--config", help="JSON config file (may itself name a preset)")
    p.add_argument("--in", dest="in_dir", help="input data directory")
    p.add_argument("--out", help="output directory")
    p.add_argument(
        "--strict",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="fail on malformed dataset lines (default) or skip them",
    )
    if scenario:
        p.add_argument("--kind", choices=["sr", "mr1", "mr2"], help="scenario kind")
        p.add_argument("--seed", type=int, help="scenario seed")
        p.add_argument("--duration", type=float, help="scenario duration in seconds")
        p.add_argument("--persons", type=int, help="number of simulated persons")
        p.add_argument("--noise-std", dest="noise_std", type=float)
        p.add_argument("--dropout", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidarmot",
        description="2D LiDAR person tracking: simulate, detect, track, "
        "evaluate, pipeline, bench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a scenario into dataset files")
    _add_common(p, scenario=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("detect", help="run the detector over a scan file")
    _add_common(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("track", help="run the tracker over detections + odometry")
    _add_common(p)
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("evaluate", help="CLEAR MOT benchmark of tracks vs ground truth")
    _add_common(p)
    p.add_argument("--threshold", type=float, default=0.75, help="match threshold [m]")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="end-to-end pipelined runtime over scans")
    _add_common(p)
    p.add_argument("--realtime", action="store_true", help="pace scans at the scan rate")
    p.add_argument("--serial", action="store_true", help="disable stage overlap")
    p.add_argument("--velocity-gate", dest="velocity_gate", type=float)
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("bench", help="simulate + track + evaluate in one run")
    _add_common(p, scenario=True)
    p.add_argument("--threshold", type=float, default=0.75, help="match threshold [m]")
    p.add_argument("--velocity-gate", dest="velocity_gate", type=float)
    p.add_argument(
        "--seeds",
        help="comma-separated seed sweep (one table row per preset x seed)",
    )
    p.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock stage timings in the report "
        "(makes the report non-reproducible)",
    )
    p.set_defaults(func=_cmd_bench)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
