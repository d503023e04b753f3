"""Reliability filtering and bias reporting tests."""

import pandas as pd
import pytest

from jndscale.analysis.filtering import bias_report, bias_tally, filter_batches
from jndscale.analysis.scaling import AnalysisError


def instance_rows(worker, batch, answers_on_traps, bias_answers=(), protocol="BTC"):
    """One worker x batch instance: trap questions plus optional bias rows."""
    rows = []
    for i, answer in enumerate(answers_on_traps):
        ten_left = i % 2 == 0
        rows.append(
            {
                "question_id": f"{batch}_trap{i}",
                "worker_id": worker,
                "batch_id": batch,
                "protocol": protocol,
                "kind": "trap",
                "source_id": "sA",
                "left_codec": "cX" if ten_left else "source",
                "left_level": 10 if ten_left else 0,
                "right_codec": "source" if ten_left else "cX",
                "right_level": 0 if ten_left else 10,
                "answer": answer,
                "response_time_ms": 1000,
                "submitted_at": "2024-01-01T00:00:00+00:00",
            }
        )
    for i, answer in enumerate(bias_answers):
        rows.append(
            {
                "question_id": f"{batch}_bias{i}",
                "worker_id": worker,
                "batch_id": batch,
                "protocol": protocol,
                "kind": "bias",
                "source_id": "sA",
                "left_codec": "cX",
                "left_level": 4,
                "right_codec": "cX",
                "right_level": 4,
                "answer": answer,
                "response_time_ms": 1000,
                "submitted_at": "2024-01-01T00:00:00+00:00",
            }
        )
    return rows


def correct_for(i):
    return "left" if i % 2 == 0 else "right"


class TestFilterBatches:
    def test_all_traps_correct_is_kept(self):
        rows = instance_rows("w1", "b1", [correct_for(i) for i in range(10)])
        kept, report = filter_batches(pd.DataFrame(rows))
        assert len(kept) == 10
        assert report.instances[0].kept
        assert report.instances[0].accuracy == 1.0

    def test_sixty_percent_accuracy_removed(self):
        answers = [correct_for(i) if i < 6 else "not_sure" for i in range(10)]
        rows = instance_rows("w1", "b1", answers)
        kept, report = filter_batches(pd.DataFrame(rows))
        assert kept.empty
        assert report.instances[0].accuracy == pytest.approx(0.6)

    def test_not_sure_counts_as_incorrect(self):
        answers = [correct_for(i) for i in range(7)] + ["not_sure"] * 3
        _, report = filter_batches(pd.DataFrame(rows := instance_rows("w1", "b1", answers)))
        assert report.instances[0].accuracy == pytest.approx(0.7)
        assert report.instances[0].kept  # exactly at threshold

    def test_same_codec_extreme_pairs_qualify(self):
        rows = instance_rows("w1", "b1", [correct_for(0)])
        rows[0]["kind"] = "same_codec"
        kept, report = filter_batches(pd.DataFrame(rows))
        assert report.instances[0].n_qualifying == 1
        assert len(kept) == 1

    def test_removal_drops_whole_instance(self):
        good = instance_rows("w1", "b1", [correct_for(i) for i in range(10)], ["left"])
        bad = instance_rows("w2", "b1", ["not_sure"] * 10, ["right"] * 3)
        kept, report = filter_batches(pd.DataFrame(good + bad))
        assert set(kept["worker_id"]) == {"w1"}
        raw = report.raw["BTC"]
        after = report.kept["BTC"]
        assert raw == {"batches": 2, "subjects": 2}
        assert after == {"batches": 1, "subjects": 1}

    def test_instance_without_extreme_questions_errors(self):
        rows = instance_rows("w1", "b1", [correct_for(0)])
        rows[0]["kind"] = "same_codec"
        rows[0]["left_level"] = 5  # no 0-vs-10 question left in the instance
        with pytest.raises(AnalysisError, match="without any level-0"):
            filter_batches(pd.DataFrame(rows))

    def test_histogram_data_available(self):
        rows = instance_rows("w1", "b1", [correct_for(i) for i in range(10)])
        _, report = filter_batches(pd.DataFrame(rows))
        hist, edges = report.histogram("BTC")
        assert sum(hist) == 1
        assert len(edges) == len(hist) + 1


class TestBiasReport:
    def test_extreme_bias_flagged(self):
        rows = instance_rows("w1", "b1", [correct_for(i) for i in range(10)], ["right"] * 40)
        tally = bias_tally(pd.DataFrame(rows))
        assert tally.right == 40 and tally.left == 0
        assert tally.p_value < 1e-9

    def test_balanced_answers_not_rejected(self):
        rows = instance_rows(
            "w1", "b1", [correct_for(i) for i in range(10)], ["left", "right"] * 20
        )
        tally = bias_tally(pd.DataFrame(rows))
        assert tally.p_value > 0.05

    def test_pre_and_post_filter_tallies(self):
        good = instance_rows("w1", "b1", [correct_for(i) for i in range(10)], ["left", "right"])
        bad = instance_rows("w2", "b1", ["not_sure"] * 10, ["right"] * 6)
        frame = pd.DataFrame(good + bad)
        kept, _ = filter_batches(frame)
        report = bias_report(frame, kept, "BTC")
        assert report["pre_filter"].right == 7
        assert report["post_filter"].right == 1
