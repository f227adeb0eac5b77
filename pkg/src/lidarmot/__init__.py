"""2D LiDAR multi-object person tracking toolkit.

Submodules: :mod:`geometry` (scans, poses, transforms), :mod:`detection`
(cutout preprocessing and the cluster detector), :mod:`tracking` (Kalman CV
tracker with Hungarian association), :mod:`evaluation` (CLEAR MOT),
:mod:`simulator` (raycast scenarios with ground truth), :mod:`pipeline`
(two-stage real-time runtime and obstacle export), plus dataset/report file
formats and a CLI.
"""

from .detection import (
    ClusterDetector,
    Cutout,
    Detection,
    DetectorConfig,
    cluster_detect,
    extract_cutouts,
    filter_by_confidence,
    make_detector,
)
from .evaluation import (
    GroundTruthFrame,
    HypothesisFrame,
    MotFrameCounts,
    MotReport,
    evaluate_sequence,
    filter_by_fov_frame,
    match_frame,
    mota,
    motp,
)
from .geometry import (
    NO_RETURN,
    ODOM_FRAME,
    SENSOR_FRAME,
    FieldOfView,
    LidarScan,
    PointXY,
    Pose2D,
    in_fov,
    interpolate_pose,
    invert_pose,
    normalize_angle,
    polar_to_cartesian,
    transform_to_frame,
)
from .pipeline import (
    DynamicObstacle,
    FrameTiming,
    PipelineConfig,
    RunSummary,
    StageTimings,
    collect_timings,
    export_dynamic_obstacles,
    forecast_position,
    paced,
    predicts_collision,
    run_pipeline,
    time_to_closest_approach,
)
from .simulator import (
    AgentModel,
    Circle,
    LidarParams,
    ScenarioConfig,
    ScriptedAgent,
    Segment,
    WorldState,
    emit_ground_truth,
    generate_scenario,
    raycast_scan,
    run_scenario,
    step_world,
)
from .tracking import (
    AssociationResult,
    KalmanState,
    Track,
    Tracker,
    TrackerConfig,
    TrackStatus,
    build_cost_matrix,
    kalman_predict,
    kalman_update,
    lifecycle_step,
    solve_assignment,
)

__version__ = "0.1.0"
