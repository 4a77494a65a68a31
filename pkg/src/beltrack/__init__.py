"""Conveyor-belt inspection toolkit: tracking-by-detection with two-stage
association, track-level label aggregation, quality metrics, and a seeded
scene simulator."""

from .aggregation import (
    PredictionBuffer,
    TrackVerdict,
    frame_wise_verdicts,
    majority_vote,
    record_prediction,
    running_majority,
)
from .assignment import AssignmentResult, build_cost_matrix, solve_assignment
from .errors import ConfigError, InputError
from .kalman import (
    DEFAULT_NOISE,
    FilterDiverged,
    KalmanState,
    MotionNoise,
    kf_initiate,
    kf_predict,
    kf_update,
    state_to_box,
)
from .metrics import (
    ClassificationMetrics,
    VideoQualityReport,
    classification_metrics,
    count_id_switches,
    defect_ratio,
    detection_map,
    stability_report,
    temporal_stability,
)
from .model import (
    BinaryQuality,
    BoundingBox,
    CategoryLabel,
    Detection,
    FrameDetections,
    Track,
    TrackStatus,
    iou,
    to_binary,
)
from .pipeline import (
    AggregationConfig,
    PipelineResult,
    PipelineRun,
    SceneEvaluation,
    evaluate_against_truth,
    run_pipeline,
    run_stream,
)
from .simulate import (
    SceneGroundTruth,
    SceneStatistics,
    SimConfig,
    generate_scene,
    scene_statistics,
)
from .tracker import ByteTracker, TrackerConfig, TrackerOutput

__version__ = "0.1.0"
