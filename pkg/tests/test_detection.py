import math

import numpy as np
import pytest

from lidarmot.detection import (
    ClusterDetector,
    DetectorConfig,
    cluster_detect,
    expected_person_beams,
    extract_cutouts,
    filter_by_confidence,
    make_detector,
)
from lidarmot.geometry import NO_RETURN, LidarScan, PointXY
from lidarmot.simulator import (
    AgentModel,
    LidarParams,
    Pose2D,
    WorldState,
    raycast_scan,
)

INC = math.radians(0.25)


def make_scan(ranges, angle_min=-0.75 * math.pi, t=0.0, range_max=30.0):
    return LidarScan(t, np.asarray(ranges, dtype=float), angle_min, INC, range_max)


def circle_world(centers, radius=0.3, robot=(0.0, 0.0, 0.0)):
    agents = [
        AgentModel(
            id=i,
            radius=radius,
            position=np.array(c, dtype=float),
            velocity=np.zeros(2),
        )
        for i, c in enumerate(centers)
    ]
    return WorldState(
        time=0.0,
        robot=Pose2D(*robot),
        robot_twist=(0.0, 0.0),
        agents=agents,
        circles=(),
        segments=(),
        arena=(-10, -10, 10, 10),
    )


class TestExtractCutouts:
    def test_count_with_stride_ten(self):
        scan = make_scan(np.full(1080, 3.0))
        cuts = extract_cutouts(scan, DetectorConfig(window_stride=10))
        assert len(cuts) == 108

    def test_angular_span_and_fixed_resample(self):
        # 1 m window at 5 m: half-angle atan(0.1) = 5.71 deg, so the raw
        # span covers about 45 beams; output length stays cutout_samples.
        scan = make_scan(np.full(1080, 5.0))
        cfg = DetectorConfig(window_stride=1080, cutout_samples=48)  # center 0 only
        (cut,) = extract_cutouts(scan, cfg)
        half = math.atan(0.5 / 5.0)
        expected_raw = 2 * int(half / INC) + 1
        assert expected_raw in (45, 46)
        assert len(cut.samples) == 48

    def test_identity_when_raw_count_matches(self):
        rng = np.random.default_rng(0)
        ranges = np.full(1080, 5.0)
        ranges[516:564] = rng.uniform(4.9, 5.1, 48)
        scan = make_scan(ranges)
        cfg = DetectorConfig(window_stride=1080, cutout_samples=45)
        # center beam 0: k = 22 -> 45 raw beams [0..22] clipped at 0
        (cut,) = extract_cutouts(scan, cfg)
        j0, j1 = 0, 22
        raw = ranges[j0 : j1 + 1]
        # resampling at identical knots reproduces the raw window
        np.testing.assert_allclose(cut.samples[: len(raw)], raw, atol=1e-9)

    def test_exact_knot_reproduction_mid_scan(self):
        rng = np.random.default_rng(1)
        ranges = rng.uniform(4.5, 5.5, 1080)
        ranges[541] = 5.0
        scan = make_scan(ranges)
        half = math.atan(0.5 / 5.0)
        k = int(half / INC)
        m = 2 * k + 1
        cfg = DetectorConfig(window_stride=541, cutout_samples=m)
        cuts = extract_cutouts(scan, cfg)
        cut = next(c for c in cuts if c.center_index == 541)
        np.testing.assert_allclose(
            cut.samples, ranges[541 - k : 541 + k + 1], atol=1e-9
        )

    def test_no_return_center_produces_no_cutout(self):
        ranges = np.full(1080, NO_RETURN)
        ranges[100] = 2.0
        scan = make_scan(ranges)
        cuts = extract_cutouts(scan, DetectorConfig(window_stride=1))
        assert [c.center_index for c in cuts] == [100]

    def test_no_return_imputed_with_range_max(self):
        ranges = np.full(1080, 5.0)
        ranges[530:540] = NO_RETURN
        scan = make_scan(ranges)
        cuts = extract_cutouts(scan, DetectorConfig(window_stride=541, cutout_samples=45))
        cut = next(c for c in cuts if c.center_index == 541)
        assert cut.samples.max() == pytest.approx(scan.range_max)

    def test_all_cutouts_same_length_regardless_of_range(self):
        rng = np.random.default_rng(2)
        scan = make_scan(rng.uniform(0.5, 25.0, 1080))
        cuts = extract_cutouts(scan, DetectorConfig(window_stride=7, cutout_samples=48))
        assert {len(c.samples) for c in cuts} == {48}

    def test_count_equals_ceil_on_fully_finite(self):
        scan = make_scan(np.full(1080, 4.0))
        for stride in (1, 7, 10, 13, 100):
            cuts = extract_cutouts(scan, DetectorConfig(window_stride=stride))
            assert len(cuts) == math.ceil(1080 / stride)


class TestClusterDetect:
    def test_two_groups_at_centroids(self):
        # Hand-built scan: two 20-beam arcs at different bearings, brute
        # force the centroid oracle from the raw points.
        ranges = np.full(1080, NO_RETURN)
        ranges[200:220] = 2.0
        ranges[600:620] = 3.0
        scan = make_scan(ranges)
        dets = cluster_detect(
            scan,
            DetectorConfig(window_stride=1),
            min_points=5,
            center_offset=0.0,
            flat_min_chord=99.0,
        )
        assert len(dets) == 2
        for beams, rng_val, det in [
            (range(200, 220), 2.0, dets[0]),
            (range(600, 620), 3.0, dets[1]),
        ]:
            angs = scan.angle_min + np.array(beams) * INC
            cx = float(np.mean(rng_val * np.cos(angs)))
            cy = float(np.mean(rng_val * np.sin(angs)))
            assert math.hypot(det.position.x - cx, det.position.y - cy) < 0.05

    def test_speck_below_min_points(self):
        ranges = np.full(1080, NO_RETURN)
        ranges[500:502] = 2.0
        dets = cluster_detect(make_scan(ranges), DetectorConfig(), min_points=5)
        assert dets == []

    def test_wall_rejected_by_span(self):
        # A straight wall 2 m ahead spanning ~2.5 m.
        angs = -0.75 * math.pi + np.arange(1080) * INC
        with np.errstate(divide="ignore"):
            ranges = np.where(
                (np.abs(angs) < math.atan(1.25 / 2.0)) & (np.cos(angs) > 0),
                2.0 / np.cos(angs),
                NO_RETURN,
            )
        dets = cluster_detect(
            make_scan(ranges), DetectorConfig(), max_cluster_span=0.8
        )
        assert dets == []

    def test_straight_fragment_rejected_by_flatness(self):
        # A 0.5 m piece of wall (chord above flat_min_chord, no bulge).
        angs = -0.75 * math.pi + np.arange(1080) * INC
        with np.errstate(divide="ignore"):
            wall = 2.0 / np.cos(angs)
        ranges = np.where((np.abs(angs) < math.atan(0.25 / 2.0)), wall, NO_RETURN)
        dets = cluster_detect(make_scan(ranges), DetectorConfig())
        assert dets == []

    def test_surrogate_on_simulated_person(self):
        # One circular agent at (2, 0): exactly one detection within 0.2 m.
        scan = raycast_scan(circle_world([(2.0, 0.0)]), LidarParams())
        dets = cluster_detect(scan, DetectorConfig(window_stride=10))
        assert len(dets) == 1
        d = dets[0]
        assert math.hypot(d.position.x - 2.0, d.position.y) < 0.2
        assert d.confidence == pytest.approx(1.0)

    def test_translation_equivariance(self):
        # Moving the simulated person moves the detection identically
        # (within resampling noise bounds).
        offsets = []
        for center in [(2.0, 0.3), (2.4, -0.5)]:
            scan = raycast_scan(circle_world([center]), LidarParams())
            (d,) = cluster_detect(scan, DetectorConfig(window_stride=10))
            offsets.append((d.position.x - center[0], d.position.y - center[1]))
        dx = offsets[0][0] - offsets[1][0]
        dy = offsets[0][1] - offsets[1][1]
        assert math.hypot(dx, dy) < 0.05

    def test_adjacent_bodies_resolved_by_split(self):
        # Two people shoulder to shoulder merge into one wide cluster that
        # must be cut at the grazing gap between the bodies.
        scan = raycast_scan(circle_world([(2.0, 0.35), (2.0, -0.35)]), LidarParams())
        dets = cluster_detect(scan, DetectorConfig(window_stride=10))
        assert len(dets) == 2

    def test_confidences_in_unit_interval(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            centers = rng.uniform(-3, 3, (3, 2))
            scan = raycast_scan(circle_world(centers.tolist()), LidarParams())
            for d in cluster_detect(scan, DetectorConfig()):
                assert 0.0 <= d.confidence <= 1.0

    def test_empty_scan_yields_nothing(self):
        scan = make_scan(np.full(1080, NO_RETURN))
        assert cluster_detect(scan, DetectorConfig()) == []

    def test_stride_anchor_required(self):
        # A cluster that covers no beam on the stride grid is skipped.
        ranges = np.full(1080, NO_RETURN)
        ranges[101:109] = 2.0  # beams 101..108, stride 1000 anchor = 0 only
        dets = cluster_detect(
            make_scan(ranges), DetectorConfig(window_stride=1000), min_points=5
        )
        assert dets == []


class TestFilterByConfidence:
    def test_boundary_inclusive(self):
        dets = [
            _det(0.9),
            _det(0.7),
            _det(0.85),
        ]
        kept = filter_by_confidence(dets, 0.85)
        assert [d.confidence for d in kept] == [0.9, 0.85]

    def test_zero_threshold_keeps_all(self):
        dets = [_det(0.1), _det(0.0)]
        assert filter_by_confidence(dets, 0.0) == dets

    def test_empty(self):
        assert filter_by_confidence([], 0.5) == []

    def test_output_is_subsequence(self):
        rng = np.random.default_rng(1)
        dets = [_det(c) for c in rng.uniform(0, 1, 50)]
        kept = filter_by_confidence(dets, 0.6)
        it = iter(dets)
        assert all(d in it for d in kept)


def _det(conf):
    from lidarmot.detection import Detection

    return Detection(PointXY(1.0, 1.0), conf, 0.0)


class TestDetectorFactory:
    def test_cluster_by_name(self):
        det = make_detector("cluster", DetectorConfig())
        assert isinstance(det, ClusterDetector)

    def test_replay_returns_frame_detections(self):
        dets = [_det(0.9)]
        replay = make_detector("replay", DetectorConfig(), replay=dets)
        scan = make_scan(np.full(8, 2.0))
        assert replay(scan) == dets
        later = LidarScan(99.0, np.full(8, 2.0), 0.0, INC, 30.0)
        assert replay(later) == []

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            make_detector("neural", DetectorConfig())

    def test_replay_requires_detections(self):
        with pytest.raises(ValueError):
            make_detector("replay", DetectorConfig())


def test_expected_beams_monotone_in_range():
    a = expected_person_beams(1.0, INC, 0.3)
    b = expected_person_beams(3.0, INC, 0.3)
    assert a > b > 0


def test_detector_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(window_stride=0)
    with pytest.raises(ValueError):
        DetectorConfig(confidence_threshold=1.5)
    with pytest.raises(ValueError):
        DetectorConfig(window_width=0.0)
