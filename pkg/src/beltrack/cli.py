"""Command-line interface.

Verbs: ``track`` runs the pipeline on a detection stream, ``simulate``
writes synthetic scene files, ``evaluate`` scores a stream against a
ground-truth file, and ``report`` summarizes existing verdict files.

Every flag mirroring a config field has a config-file equivalent (JSON with
``tracker``, ``simulate``, and ``aggregation`` sections); values from the
config file win over conflicting flags, with a warning. The ``BELTRACK_CONFIG``
environment variable names a default config file.

Exit codes: 0 success, 1 input error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from .errors import ConfigError, InputError
from .io import ingest_detections, ingest_mot, read_ground_truth
from .pipeline import (
    AggregationConfig,
    PipelineRun,
    evaluate_against_truth,
    run_pipeline,
    simulate_to_files,
)
from .simulate import SimConfig
from .tracker import TrackerConfig

logger = logging.getLogger("beltrack")

_TRACKER_FIELDS = [f.name for f in dataclasses.fields(TrackerConfig)]
_SIM_FIELDS = [f.name for f in dataclasses.fields(SimConfig)]
_AGGREGATION_FIELDS = [f.name for f in dataclasses.fields(AggregationConfig)]


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_tracker_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("tracker")
    group.add_argument(_flag("high_score_threshold"), type=float)
    group.add_argument(_flag("low_score_threshold"), type=float)
    group.add_argument(_flag("match_threshold_first"), type=float)
    group.add_argument(_flag("match_threshold_second"), type=float)
    group.add_argument(_flag("new_track_min_score"), type=float)
    group.add_argument(_flag("max_frames_lost"), type=int)
    group.add_argument(_flag("min_hits_to_activate"), type=int)
    group.add_argument(_flag("min_track_length_report"), type=int)


def _add_aggregation_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("aggregation")
    group.add_argument(_flag("tie_break"), choices=["prefer_defect", "lowest_index"])
    group.add_argument(
        _flag("collapse_before_vote"), action="store_const", const=True, default=None
    )
    group.add_argument(_flag("frame_choice"), choices=["last", "first", "random"])
    group.add_argument(_flag("stability_granularity"), choices=["binary", "category"])


def _add_sim_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("simulator")
    group.add_argument("--seed", type=int)
    group.add_argument(_flag("n_lanes"), type=int)
    group.add_argument(_flag("lane_spacing"), type=float)
    group.add_argument(_flag("belt_velocity"), type=float)
    group.add_argument(_flag("spawn_interval_frames"), type=int)
    group.add_argument(_flag("spawn_jitter_frames"), type=int)
    group.add_argument(_flag("box_size_mean"), type=float)
    group.add_argument(_flag("box_size_std"), type=float)
    group.add_argument(_flag("n_frames"), type=int)
    group.add_argument(_flag("frame_width"), type=float)
    group.add_argument(_flag("frame_height"), type=float)
    group.add_argument(_flag("defect_probability"), type=float)
    group.add_argument(
        _flag("defect_category_weights"),
        type=lambda s: tuple(float(v) for v in s.split(",")),
        metavar="W1,W2,W3",
    )
    group.add_argument(_flag("detection_dropout_prob"), type=float)
    group.add_argument(_flag("bbox_jitter_std"), type=float)
    group.add_argument(_flag("false_positive_rate"), type=float)
    group.add_argument(_flag("score_mean_true"), type=float)
    group.add_argument(_flag("score_std_true"), type=float)
    group.add_argument(_flag("score_mean_fp"), type=float)
    group.add_argument(_flag("score_std_fp"), type=float)
    group.add_argument(_flag("label_flip_prob"), type=float)
    group.add_argument(_flag("n_objects_per_lane"), type=int)
    group.add_argument(_flag("num_categories"), type=int)


def _load_config_file(args: argparse.Namespace) -> dict:
    path = args.config or os.environ.get("BELTRACK_CONFIG")
    if not path:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    return data


def _resolve(section: dict, args: argparse.Namespace, names: list[str]) -> dict:
    """Merge config-file section and CLI flags; the file wins conflicts."""
    unknown = set(section) - set(names)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for name in names:
        cli_value = getattr(args, name, None)
        if name in section:
            value = section[name]
            if isinstance(value, list):
                value = tuple(value)
            if cli_value is not None and value != cli_value:
                logger.warning(
                    "config file overrides %s=%r (flag gave %r)", name, value, cli_value
                )
            merged[name] = value
        elif cli_value is not None:
            merged[name] = cli_value
    return merged


def _build_tracker_config(config_file: dict, args) -> TrackerConfig:
    return TrackerConfig(**_resolve(config_file.get("tracker", {}), args, _TRACKER_FIELDS))


def _build_aggregation_config(config_file: dict, args) -> AggregationConfig:
    return AggregationConfig(
        **_resolve(config_file.get("aggregation", {}), args, _AGGREGATION_FIELDS)
    )


def _cmd_track(args) -> int:
    config_file = _load_config_file(args)
    run = PipelineRun(
        input_path=args.input,
        tracker_config=_build_tracker_config(config_file, args),
        aggregation=_build_aggregation_config(config_file, args),
        verdicts_path=args.output_verdicts,
        summary_path=args.output_summary,
        skip_malformed=args.skip_malformed,
        mot_format=args.mot,
        num_categories=args.num_categories,
    )
    result = run_pipeline(run)
    print(
        f"{len(result.tracks)} tracks ({len(result.verdicts)} labeled), "
        f"aggregated defect ratio "
        f"{result.report_aggregated.defect_ratio:.4f}, "
        f"frame-wise mean stability {result.report_frame_wise.mean_stability:.4f}"
    )
    return 0


def _cmd_simulate(args) -> int:
    config_file = _load_config_file(args)
    sim = SimConfig(**_resolve(config_file.get("simulate", {}), args, _SIM_FIELDS))
    n_objects, n_frames = simulate_to_files(sim, args.output_detections, args.output_truth)
    print(
        f"wrote {n_objects} objects over {n_frames} non-empty frames to "
        f"{args.output_detections} / {args.output_truth}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    config_file = _load_config_file(args)
    tracker_config = _build_tracker_config(config_file, args)
    if args.mot:
        frames = ingest_mot(args.detections)
    else:
        frames = ingest_detections(args.detections, num_categories=args.num_categories)
    gt = read_ground_truth(args.truth, num_categories=args.num_categories)
    evaluation = evaluate_against_truth(
        frames, gt, tracker_config, iou_threshold=args.iou_threshold
    )
    payload = dataclasses.asdict(evaluation)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_report(args) -> int:
    path = Path(args.verdicts)
    if not path.exists():
        raise InputError(f"verdict file not found: {path}")
    records = []
    with path.open(encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{line_number}: invalid JSON ({exc.msg})") from exc
    if not records:
        raise InputError(f"{path}: no verdicts to summarize")
    n_defect = sum(1 for r in records if r.get("binary") == "defect")
    lengths = [r.get("k", 0) for r in records]
    stability = [r["stability_frame_wise"] for r in records if "stability_frame_wise" in r]
    payload = {
        "n_tracks": len(records),
        "n_defect_tracks": n_defect,
        "defect_ratio": n_defect / len(records),
        "mean_track_length": sum(lengths) / len(records),
        "mean_stability_frame_wise": sum(stability) / len(stability) if stability else None,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beltrack",
        description="Conveyor-belt inspection pipeline: tracking, label aggregation, metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="run the pipeline on a detection stream")
    track.add_argument("--input", required=True, help="detection JSONL (or MOT text with --mot)")
    track.add_argument("--mot", action="store_true", help="input is MOT-challenge text")
    track.add_argument("--skip-malformed", action="store_true")
    track.add_argument("--num-categories", type=int, default=4)
    track.add_argument("--output-verdicts", help="per-track verdict JSONL path")
    track.add_argument("--output-summary", help="run summary JSON path")
    track.add_argument("--config", help="JSON config file (overrides flags)")
    _add_tracker_flags(track)
    _add_aggregation_flags(track)
    track.set_defaults(func=_cmd_track)

    simulate = sub.add_parser("simulate", help="generate a synthetic scene")
    simulate.add_argument("--output-detections", required=True)
    simulate.add_argument("--output-truth", required=True)
    simulate.add_argument("--config", help="JSON config file (overrides flags)")
    _add_sim_flags(simulate)
    simulate.set_defaults(func=_cmd_simulate)

    evaluate = sub.add_parser("evaluate", help="score a stream against ground truth")
    evaluate.add_argument("--detections", required=True)
    evaluate.add_argument("--truth", required=True)
    evaluate.add_argument("--mot", action="store_true")
    evaluate.add_argument("--num-categories", type=int, default=4)
    evaluate.add_argument("--iou-threshold", type=float, default=0.5)
    evaluate.add_argument("--output", help="write the evaluation JSON here as well")
    evaluate.add_argument("--config", help="JSON config file (overrides flags)")
    _add_tracker_flags(evaluate)
    evaluate.set_defaults(func=_cmd_evaluate)

    report = sub.add_parser("report", help="summarize an existing verdict file")
    report.add_argument("--verdicts", required=True)
    report.add_argument("--output")
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
