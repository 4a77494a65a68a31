import json

import pytest

from beltrack import InputError
from beltrack.io import (
    ingest_detections,
    ingest_mot,
    read_ground_truth,
    write_detections,
    write_ground_truth,
)
from beltrack.simulate import SimConfig, generate_scene


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


class TestIngestDetections:
    def test_groups_by_frame(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, [
            '{"frame": 1, "x": 0, "y": 0, "w": 10, "h": 10, "score": 0.9, "category": 0}',
            '{"frame": 0, "x": 5, "y": 5, "w": 10, "h": 10, "score": 0.8, "category": null}',
            '{"frame": 1, "x": 40, "y": 0, "w": 10, "h": 10, "score": 0.7, "category": 2}',
        ])
        frames = ingest_detections(path)
        assert [f.frame_index for f in frames] == [0, 1]
        assert len(frames[1].detections) == 2
        assert frames[0].detections[0].category_observation is None
        assert frames[1].detections[1].category_observation.index == 2

    def test_zero_width_rejected_with_line_number(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, [
            '{"frame": 0, "x": 0, "y": 0, "w": 10, "h": 10, "score": 0.9, "category": 0}',
            '{"frame": 0, "x": 0, "y": 0, "w": 0, "h": 10, "score": 0.9, "category": 0}',
        ])
        with pytest.raises(InputError, match=r":2:"):
            ingest_detections(path)

    def test_bad_json_rejected_with_line_number(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, ['{"frame": 0, "x": 0', ""])
        with pytest.raises(InputError, match=r":1:"):
            ingest_detections(path)

    def test_score_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, ['{"frame": 0, "x": 0, "y": 0, "w": 5, "h": 5, "score": 1.2, "category": 0}'])
        with pytest.raises(InputError, match=r":1:"):
            ingest_detections(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, ['{"frame": 0, "x": 0, "y": 0, "w": 5, "h": 5}'])
        with pytest.raises(InputError, match="score"):
            ingest_detections(path)

    def test_skip_malformed_keeps_good_lines(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, [
            "not json",
            '{"frame": 0, "x": 0, "y": 0, "w": 5, "h": 5, "score": 0.9, "category": 1}',
            '{"frame": 0, "x": 0, "y": 0, "w": -3, "h": 5, "score": 0.9, "category": 1}',
        ])
        frames = ingest_detections(path, skip_malformed=True)
        assert len(frames) == 1
        assert len(frames[0].detections) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            ingest_detections(tmp_path / "nope.jsonl")

    def test_missing_category_key_means_no_label(self, tmp_path):
        path = tmp_path / "dets.jsonl"
        write_lines(path, ['{"frame": 0, "x": 0, "y": 0, "w": 5, "h": 5, "score": 0.9}'])
        frames = ingest_detections(path)
        assert frames[0].detections[0].category_observation is None


class TestRoundTrip:
    def test_file_round_trip_is_exact(self, tmp_path):
        config = SimConfig(
            seed=31, n_lanes=2, n_objects_per_lane=4, frame_width=150.0,
            bbox_jitter_std=1.3, label_flip_prob=0.2, detection_dropout_prob=0.1,
            score_std_true=0.05, false_positive_rate=0.3,
        )
        _, frames = generate_scene(config)
        first = tmp_path / "a.jsonl"
        second = tmp_path / "b.jsonl"
        write_detections(frames, first)
        write_detections(ingest_detections(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_in_memory_round_trip(self, tmp_path):
        config = SimConfig(seed=32, n_lanes=1, n_objects_per_lane=3, frame_width=120.0)
        _, frames = generate_scene(config)
        path = tmp_path / "dets.jsonl"
        write_detections(frames, path)
        assert ingest_detections(path) == frames

    def test_ground_truth_round_trip(self, tmp_path):
        config = SimConfig(seed=33, n_lanes=2, n_objects_per_lane=3, frame_width=120.0)
        gt, _ = generate_scene(config)
        path = tmp_path / "gt.jsonl"
        write_ground_truth(gt, path)
        assert read_ground_truth(path) == gt


class TestReadGroundTruth:
    def test_category_change_rejected(self, tmp_path):
        path = tmp_path / "gt.jsonl"
        write_lines(path, [
            '{"frame": 0, "object_id": 1, "x": 0, "y": 0, "w": 5, "h": 5, "true_category": 0}',
            '{"frame": 1, "object_id": 1, "x": 5, "y": 0, "w": 5, "h": 5, "true_category": 2}',
        ])
        with pytest.raises(InputError, match="changes category"):
            read_ground_truth(path)

    def test_boxes_sorted_by_frame(self, tmp_path):
        path = tmp_path / "gt.jsonl"
        write_lines(path, [
            '{"frame": 3, "object_id": 1, "x": 15, "y": 0, "w": 5, "h": 5, "true_category": 1}',
            '{"frame": 1, "object_id": 1, "x": 5, "y": 0, "w": 5, "h": 5, "true_category": 1}',
        ])
        gt = read_ground_truth(path)
        assert [f for f, _ in gt.objects[0].boxes] == [1, 3]


class TestMotAdapter:
    def test_basic_parse(self, tmp_path):
        path = tmp_path / "dets.txt"
        write_lines(path, [
            "1,1,10,20,30,40,0.9,-1,-1,-1",
            "1,2,100,20,30,40,0.5,-1,-1,-1",
            "2,1,15,20,30,40,0.8,-1,-1,-1",
        ])
        frames = ingest_mot(path)
        assert [f.frame_index for f in frames] == [1, 2]
        assert len(frames[0].detections) == 2
        det = frames[0].detections[0]
        assert (det.box.x, det.box.y, det.box.w, det.box.h) == (10, 20, 30, 40)
        assert det.category_observation is None

    def test_confidence_clamped(self, tmp_path):
        path = tmp_path / "dets.txt"
        write_lines(path, ["1,1,10,20,30,40,-1", "1,2,10,80,30,40,7.5"])
        frames = ingest_mot(path)
        scores = [d.score for d in frames[0].detections]
        assert scores == [0.0, 1.0]

    def test_short_line_rejected(self, tmp_path):
        path = tmp_path / "dets.txt"
        write_lines(path, ["1,1,10,20,30"])
        with pytest.raises(InputError, match=r":1:"):
            ingest_mot(path)
