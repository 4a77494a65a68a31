"""Evaluation metrics: video-level quality reports, classification scores,
detection average precision, and identity-switch counting against simulator
ground truth.

Temporal stability divides the change count by the full track length k (not
k - 1), so a maximally oscillating track scores 1/k rather than 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np

from .aggregation import (
    PredictionBuffer,
    TieBreak,
    TrackVerdict,
    frame_wise_verdicts,
    majority_vote,
)
from .model import BinaryQuality, FrameDetections, Track, iou
from .simulate import SceneGroundTruth

StabilityMode = Literal["frame_wise", "aggregated"]
FrameChoice = Literal["last", "first", "random"]


@dataclass(frozen=True)
class VideoQualityReport:
    """Track-level quality summary for one video stream."""

    defect_ratio: float
    per_track_stability: dict[int, float]
    mean_stability: float
    n_total_tracks: int
    n_defect_tracks: int


def defect_ratio(verdicts: Sequence[TrackVerdict]) -> float:
    """Fraction of tracks whose final label is defect."""
    if not verdicts:
        raise ValueError("defect ratio is undefined for an empty verdict list")
    n_defect = sum(1 for v in verdicts if v.final_binary is BinaryQuality.DEFECT)
    return n_defect / len(verdicts)


def temporal_stability(labels: Sequence) -> float:
    """1 - (number of adjacent label changes) / (sequence length).

    Works on any label sequence (binary or multi-class); a constant sequence
    scores exactly 1.0.
    """
    if len(labels) == 0:
        raise ValueError("temporal stability is undefined for an empty label sequence")
    changes = sum(1 for a, b in zip(labels, labels[1:]) if a != b)
    return 1.0 - changes / len(labels)


def stability_report(
    buffers: Sequence[PredictionBuffer],
    mode: StabilityMode,
    *,
    frame_choice: FrameChoice = "last",
    tie_break: TieBreak = "prefer_defect",
    granularity: Literal["binary", "category"] = "binary",
    rng: np.random.Generator | None = None,
) -> VideoQualityReport:
    """Score one video's tracks in either evaluation mode.

    ``frame_wise`` scores the raw per-frame label sequences and decides each
    track by a single frame (``frame_choice``; the default mimics an
    exit-gate camera reading the last frame). ``aggregated`` scores the
    constant post-vote sequences, whose stability is 1.0 by construction.
    """
    if not buffers:
        raise ValueError("stability report needs at least one prediction buffer")
    if mode not in ("frame_wise", "aggregated"):
        raise ValueError(f"unknown stability mode {mode!r}")
    if frame_choice == "random" and rng is None:
        rng = np.random.default_rng(0)

    per_track: dict[int, float] = {}
    n_defect = 0
    for buffer in buffers:
        if mode == "aggregated":
            verdict = majority_vote(buffer, tie_break)
            final = verdict.final_binary
            constant = [final] * verdict.track_length
            per_track[buffer.track_id] = temporal_stability(constant)
        else:
            binaries = frame_wise_verdicts(buffer)
            if granularity == "binary":
                sequence: Sequence = binaries
            else:
                sequence = [label for _, label in buffer.entries]
            per_track[buffer.track_id] = temporal_stability(sequence)
            if frame_choice == "first":
                final = binaries[0]
            elif frame_choice == "random":
                final = binaries[int(rng.integers(len(binaries)))]
            else:
                final = binaries[-1]
        if final is BinaryQuality.DEFECT:
            n_defect += 1

    return VideoQualityReport(
        defect_ratio=n_defect / len(buffers),
        per_track_stability=per_track,
        mean_stability=float(np.mean(list(per_track.values()))),
        n_total_tracks=len(buffers),
        n_defect_tracks=n_defect,
    )


class ClassificationMetrics(NamedTuple):
    """Binary scores with defect as the positive class; None marks an
    undefined value (zero denominator), deliberately distinct from 0.0."""

    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None


def classification_metrics(
    pred: Sequence[BinaryQuality], truth: Sequence[BinaryQuality]
) -> ClassificationMetrics:
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} predictions vs {len(truth)} truths")
    if not pred:
        raise ValueError("classification metrics need at least one sample")
    tp = fp = fn = tn = 0
    for p, t in zip(pred, truth):
        if p is BinaryQuality.DEFECT:
            if t is BinaryQuality.DEFECT:
                tp += 1
            else:
                fp += 1
        else:
            if t is BinaryQuality.DEFECT:
                fn += 1
            else:
                tn += 1
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(
        accuracy=(tp + tn) / len(pred), precision=precision, recall=recall, f1=f1
    )


def detection_map(
    dets: Sequence[FrameDetections],
    gt: Sequence[FrameDetections],
    iou_threshold: float = 0.5,
) -> float:
    """Single-class average precision with all-point interpolation.

    Detections are swept in descending score order (stable on ties, so the
    result depends only on the score ranking); each is greedily matched to
    the highest-IoU unmatched ground-truth box of its frame at the given
    threshold.
    """
    gt_boxes = {f.frame_index: [d.box for d in f.detections] for f in gt}
    n_gt = sum(len(boxes) for boxes in gt_boxes.values())
    if n_gt == 0:
        raise ValueError("average precision is undefined without ground-truth boxes")

    flat = [(det.score, f.frame_index, det.box) for f in dets for det in f.detections]
    flat.sort(key=lambda item: -item[0])

    gt_taken = {frame: [False] * len(boxes) for frame, boxes in gt_boxes.items()}
    tp = np.zeros(len(flat))
    for k, (_, frame, box) in enumerate(flat):
        best_iou, best_j = 0.0, -1
        for j, gt_box in enumerate(gt_boxes.get(frame, [])):
            if gt_taken[frame][j]:
                continue
            overlap = iou(box, gt_box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou, best_j = overlap, j
        if best_j >= 0:
            gt_taken[frame][best_j] = True
            tp[k] = 1.0

    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(1.0 - tp)
    recall = cum_tp / n_gt
    precision = cum_tp / np.maximum(cum_tp + cum_fp, 1.0)

    # All-point interpolation: integrate the running precision envelope.
    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0]
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def count_id_switches(
    tracks: Sequence[Track], gt: SceneGroundTruth, iou_threshold: float = 0.5
) -> int:
    """Identity handoffs over ground-truth objects.

    Each (object, frame) is assigned the overlapping track (IoU at or above
    the threshold, best overlap wins, lowest id on ties); a switch is counted
    whenever the assigned id differs from the previously assigned one.
    """
    by_frame: dict[int, list[tuple[int, object]]] = {}
    for track in tracks:
        for frame, box in track.history:
            by_frame.setdefault(frame, []).append((track.id, box))

    switches = 0
    for obj in gt.objects:
        previous: int | None = None
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
            if best_id is None:
                continue
            if previous is not None and best_id != previous:
                switches += 1
            previous = best_id
    return switches
