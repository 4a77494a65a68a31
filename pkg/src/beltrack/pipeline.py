"""End-to-end orchestration: ingest or simulate a detection stream, track it,
aggregate per-track labels, and emit verdicts plus quality reports.

Aggregation is strictly downstream of tracking: switching between the
frame-wise baseline and majority voting never changes track identities,
only the labels and stability scores derived from them.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .aggregation import (
    PredictionBuffer,
    TieBreak,
    TrackVerdict,
    frame_wise_verdicts,
    majority_vote,
    record_prediction,
)
from .errors import ConfigError
from .io import ingest_detections, ingest_mot, write_detections, write_ground_truth
from .kalman import DEFAULT_NOISE, MotionNoise
from .metrics import (
    FrameChoice,
    VideoQualityReport,
    count_id_switches,
    detection_map,
    stability_report,
    temporal_stability,
)
from .model import (
    BinaryQuality,
    Detection,
    FrameDetections,
    Track,
    iou,
    to_binary,
)
from .simulate import SceneGroundTruth, SimConfig, generate_scene
from .tracker import ByteTracker, TrackerConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AggregationConfig:
    tie_break: TieBreak = "prefer_defect"
    collapse_before_vote: bool = False
    frame_choice: FrameChoice = "last"
    stability_granularity: str = "binary"


@dataclass(frozen=True)
class PipelineRun:
    """One pipeline invocation: exactly one input source plus configs."""

    input_path: str | Path | None = None
    sim_config: SimConfig | None = None
    tracker_config: TrackerConfig = field(default_factory=TrackerConfig)
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    verdicts_path: str | Path | None = None
    summary_path: str | Path | None = None
    skip_malformed: bool = False
    mot_format: bool = False
    num_categories: int = 4

    def __post_init__(self):
        if (self.input_path is None) == (self.sim_config is None):
            raise ConfigError("exactly one of input_path or sim_config must be given")


@dataclass
class PipelineResult:
    verdicts: list[TrackVerdict]
    report_aggregated: VideoQualityReport
    report_frame_wise: VideoQualityReport
    tracks: list[Track]
    n_unlabeled_tracks: int
    per_track_frame_stability: dict[int, float]


def run_stream(
    frames: list[FrameDetections],
    tracker_config: TrackerConfig | None = None,
    noise: MotionNoise = DEFAULT_NOISE,
) -> list[Track]:
    """Drive a tracker over a detection stream and return the finished tracks.

    Frames are sorted if needed (with a warning) and the tracker is stepped
    once per frame index over the full contiguous range, so tracks age and
    coast correctly through frames that produced no detections.
    """
    if not frames:
        return []
    indices = [f.frame_index for f in frames]
    if indices != sorted(indices):
        logger.warning("detection stream is out of order; sorting %d frames in memory", len(frames))
        frames = sorted(frames, key=lambda f: f.frame_index)
    by_index = {f.frame_index: f for f in frames}
    tracker = ByteTracker(tracker_config, noise)
    for frame_index in range(frames[0].frame_index, frames[-1].frame_index + 1):
        frame = by_index.get(frame_index)
        if frame is None:
            frame = FrameDetections(frame_index)
        tracker.step(frame)
    return tracker.finalize()


def buffers_from_tracks(tracks: list[Track]) -> list[PredictionBuffer]:
    """Per-track prediction buffers, skipping tracks that never saw a label."""
    buffers = []
    for track in tracks:
        if not track.predictions:
            continue
        buffer = PredictionBuffer(track.id)
        for frame_index, label in track.predictions:
            record_prediction(buffer, frame_index, label)
        buffers.append(buffer)
    return buffers


def run_pipeline(run: PipelineRun) -> PipelineResult:
    """Execute the full loop and optionally write verdict/summary files."""
    if run.sim_config is not None:
        _, frames = generate_scene(run.sim_config)
    elif run.mot_format:
        frames = ingest_mot(run.input_path)
    else:
        frames = ingest_detections(
            run.input_path,
            skip_malformed=run.skip_malformed,
            num_categories=run.num_categories,
        )

    tracks = run_stream(frames, run.tracker_config)
    buffers = buffers_from_tracks(tracks)
    n_unlabeled = len(tracks) - len(buffers)
    if n_unlabeled:
        logger.info("%d of %d tracks carry no category predictions", n_unlabeled, len(tracks))

    verdicts = [
        majority_vote(b, run.aggregation.tie_break, run.aggregation.collapse_before_vote)
        for b in buffers
    ]
    frame_stability = {
        b.track_id: temporal_stability(frame_wise_verdicts(b)) for b in buffers
    }
    report_kwargs = dict(
        frame_choice=run.aggregation.frame_choice,
        tie_break=run.aggregation.tie_break,
        granularity=run.aggregation.stability_granularity,
    )
    if buffers:
        report_aggregated = stability_report(buffers, "aggregated", **report_kwargs)
        report_frame_wise = stability_report(buffers, "frame_wise", **report_kwargs)
    else:
        empty = VideoQualityReport(0.0, {}, 0.0, 0, 0)
        report_aggregated = report_frame_wise = empty

    result = PipelineResult(
        verdicts=verdicts,
        report_aggregated=report_aggregated,
        report_frame_wise=report_frame_wise,
        tracks=tracks,
        n_unlabeled_tracks=n_unlabeled,
        per_track_frame_stability=frame_stability,
    )
    if run.verdicts_path is not None:
        write_verdicts(result, run.verdicts_path)
    if run.summary_path is not None:
        write_summary(result, run.summary_path)
    return result


def write_verdicts(result: PipelineResult, path: str | Path):
    """Verdict JSONL: one line per labeled track."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for verdict in result.verdicts:
            record = {
                "track_id": verdict.track_id,
                "category": verdict.final_category.index,
                "binary": verdict.final_binary.value,
                "k": verdict.track_length,
                "votes": list(verdict.vote_counts),
                "stability_frame_wise": result.per_track_frame_stability[verdict.track_id],
            }
            handle.write(json.dumps(record) + "\n")


def _report_dict(report: VideoQualityReport) -> dict:
    return {
        "defect_ratio": report.defect_ratio,
        "mean_stability": report.mean_stability,
        "n_total_tracks": report.n_total_tracks,
        "n_defect_tracks": report.n_defect_tracks,
        "per_track_stability": {
            str(track_id): value for track_id, value in sorted(report.per_track_stability.items())
        },
    }


def write_summary(result: PipelineResult, path: str | Path):
    """Run summary JSON with the quality report of both evaluation modes."""
    payload = {
        "n_tracks": len(result.tracks),
        "n_labeled_tracks": len(result.verdicts),
        "n_unlabeled_tracks": result.n_unlabeled_tracks,
        "aggregated": _report_dict(result.report_aggregated),
        "frame_wise": _report_dict(result.report_frame_wise),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SceneEvaluation:
    """Tracker and label quality measured against simulator ground truth."""

    n_objects: int
    n_tracks: int
    n_unmatched_objects: int
    id_switches: int
    detection_ap: float
    aggregated_binary_accuracy: float
    aggregated_category_accuracy: float
    last_frame_category_accuracy: float
    last_frame_binary_accuracy: float
    estimated_defect_ratio: float | None
    true_defect_ratio: float
    mean_frame_wise_stability: float | None


def _match_tracks_to_objects(
    tracks: list[Track], gt: SceneGroundTruth, iou_threshold: float = 0.5
) -> dict[int, int]:
    """object_id -> track id covering it on the most frames (ties: lowest id)."""
    by_frame: dict[int, list[tuple[int, object]]] = {}
    for track in tracks:
        for frame, box in track.history:
            by_frame.setdefault(frame, []).append((track.id, box))

    assignment: dict[int, int] = {}
    for obj in gt.objects:
        cover_counts: dict[int, int] = {}
        for frame, gt_box in obj.boxes:
            best_id, best_overlap = None, 0.0
            for track_id, box in by_frame.get(frame, []):
                overlap = iou(box, gt_box)
                if overlap < iou_threshold:
                    continue
                if (
                    best_id is None
                    or overlap > best_overlap
                    or (overlap == best_overlap and track_id < best_id)
                ):
                    best_id, best_overlap = track_id, overlap
            if best_id is not None:
                cover_counts[best_id] = cover_counts.get(best_id, 0) + 1
        if cover_counts:
            top = max(cover_counts.values())
            assignment[obj.object_id] = min(t for t, n in cover_counts.items() if n == top)
    return assignment


def evaluate_against_truth(
    frames: list[FrameDetections],
    gt: SceneGroundTruth,
    tracker_config: TrackerConfig | None = None,
    aggregation: AggregationConfig | None = None,
    iou_threshold: float = 0.5,
) -> SceneEvaluation:
    """Run the tracker on a stream and score everything the oracle can check.

    Object-level accuracies treat an object with no covering track (or a
    track without labels) as misclassified, so they are comparable across
    configurations that drop different objects.
    """
    aggregation = aggregation or AggregationConfig()
    tracks = run_stream(frames, tracker_config)
    buffers = {b.track_id: b for b in buffers_from_tracks(tracks)}
    verdicts = {
        track_id: majority_vote(b, aggregation.tie_break, aggregation.collapse_before_vote)
        for track_id, b in buffers.items()
    }

    gt_frames = [
        FrameDetections(frame, [Detection(frame, box, 1.0) for box in boxes])
        for frame, boxes in sorted(_boxes_by_frame(gt).items())
    ]
    ap = detection_map(frames, gt_frames, iou_threshold) if gt_frames else 0.0

    assignment = _match_tracks_to_objects(tracks, gt, iou_threshold)
    agg_bin = agg_cat = last_cat = last_bin = 0
    for obj in gt.objects:
        track_id = assignment.get(obj.object_id)
        if track_id is None or track_id not in verdicts:
            continue
        verdict = verdicts[track_id]
        true_binary = to_binary(obj.true_category)
        if verdict.final_binary is true_binary:
            agg_bin += 1
        if verdict.final_category == obj.true_category:
            agg_cat += 1
        last_label = buffers[track_id].entries[-1][1]
        if last_label == obj.true_category:
            last_cat += 1
        if to_binary(last_label) is true_binary:
            last_bin += 1

    n_objects = len(gt.objects)
    labeled_verdicts = list(verdicts.values())
    stability_values = [
        temporal_stability(frame_wise_verdicts(b)) for b in buffers.values()
    ]
    n_defect_true = sum(1 for obj in gt.objects if obj.true_category.index != 0)
    return SceneEvaluation(
        n_objects=n_objects,
        n_tracks=len(tracks),
        n_unmatched_objects=n_objects - len(assignment),
        id_switches=count_id_switches(tracks, gt, iou_threshold),
        detection_ap=ap,
        aggregated_binary_accuracy=agg_bin / n_objects if n_objects else 0.0,
        aggregated_category_accuracy=agg_cat / n_objects if n_objects else 0.0,
        last_frame_category_accuracy=last_cat / n_objects if n_objects else 0.0,
        last_frame_binary_accuracy=last_bin / n_objects if n_objects else 0.0,
        estimated_defect_ratio=(
            sum(1 for v in labeled_verdicts if v.final_binary is BinaryQuality.DEFECT)
            / len(labeled_verdicts)
            if labeled_verdicts
            else None
        ),
        true_defect_ratio=n_defect_true / n_objects if n_objects else 0.0,
        mean_frame_wise_stability=(
            float(sum(stability_values) / len(stability_values)) if stability_values else None
        ),
    )


def _boxes_by_frame(gt: SceneGroundTruth) -> dict[int, list]:
    by_frame: dict[int, list] = {}
    for obj in gt.objects:
        for frame, box in obj.boxes:
            by_frame.setdefault(frame, []).append(box)
    return by_frame


def simulate_to_files(
    config: SimConfig, detections_path: str | Path, truth_path: str | Path
) -> tuple[int, int]:
    """Generate a scene and write both stream files; returns (objects, frames)."""
    gt, frames = generate_scene(config)
    write_detections(frames, detections_path)
    write_ground_truth(gt, truth_path)
    return len(gt.objects), len(frames)
