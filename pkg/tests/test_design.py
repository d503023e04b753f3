"""Design generation tests: full-study counts, pairing rules, batch splitting."""

import json

import numpy as np
import pytest

from jndscale.design import (
    Batch,
    DesignConfig,
    DesignError,
    KIND_BIAS,
    KIND_CROSS_CODEC,
    KIND_SAME_CODEC,
    KIND_TRAP,
    PROTOCOL_BTC,
    PROTOCOL_PTC,
    batch_questions,
    generate_bias_and_trap,
    generate_cross_codec,
    generate_design,
    generate_same_codec,
    read_manifest,
    split_into_batches,
    write_manifest,
)

from conftest import FULL_STUDY_CONFIG, SMALL_CONFIG


def kind_counts(questions):
    counts = {}
    for q in questions:
        counts[q.kind] = counts.get(q.kind, 0) + 1
    return counts


class TestSameCodec:
    def test_full_study_btc_count(self):
        qs = generate_same_codec(FULL_STUDY_CONFIG, PROTOCOL_BTC)
        assert len(qs) == 2750

    def test_full_study_ptc_count(self):
        qs = generate_same_codec(FULL_STUDY_CONFIG, PROTOCOL_PTC)
        assert len(qs) == 750

    def test_smallest_ordered_pair_case(self):
        config = DesignConfig(
            sources=("s",), codecs=("c",), btc_levels=(0, 10), ptc_levels=(0, 10),
            bias_per_cell={PROTOCOL_BTC: 1, PROTOCOL_PTC: 1},
            trap_per_cell={PROTOCOL_BTC: 2, PROTOCOL_PTC: 2},
            n_batches=1,
        )
        qs = generate_same_codec(config, PROTOCOL_BTC)
        pairs = {(q.left_level, q.right_level) for q in qs}
        assert pairs == {(0, 10), (10, 0)}

    def test_level_zero_side_uses_source_codec(self):
        qs = generate_same_codec(FULL_STUDY_CONFIG, PROTOCOL_BTC)
        for q in qs:
            if q.left_level == 0:
                assert q.left_codec == "source"
            else:
                assert q.left_codec != "source"


class TestCrossCodec:
    def test_full_study_counts(self):
        rng = np.random.default_rng(0)
        assert len(generate_cross_codec(FULL_STUDY_CONFIG, PROTOCOL_BTC, rng)) == 550
        assert len(generate_cross_codec(FULL_STUDY_CONFIG, PROTOCOL_PTC, rng)) == 150

    def test_level_and_codec_constraints(self):
        rng = np.random.default_rng(1)
        for proto in (PROTOCOL_BTC, PROTOCOL_PTC):
            for q in generate_cross_codec(FULL_STUDY_CONFIG, proto, rng):
                assert q.left_codec != q.right_codec
                assert abs(q.left_level - q.right_level) <= 1
                assert q.left_level > 0 and q.right_level > 0

    def test_infeasible_ratio_rejected(self):
        config = DesignConfig(
            sources=("s",), codecs=("c1", "c2"), n_batches=1, cross_codec_ratio=1.0
        )
        with pytest.raises(DesignError, match="infeasible"):
            generate_cross_codec(config, PROTOCOL_PTC, np.random.default_rng(0))


class TestBiasAndTrap:
    def test_full_study_counts(self):
        btc = kind_counts(generate_bias_and_trap(FULL_STUDY_CONFIG, PROTOCOL_BTC))
        ptc = kind_counts(generate_bias_and_trap(FULL_STUDY_CONFIG, PROTOCOL_PTC))
        assert btc == {KIND_BIAS: 100, KIND_TRAP: 200}
        assert ptc == {KIND_BIAS: 50, KIND_TRAP: 100}

    def test_bias_questions_pair_identical_stimuli(self):
        for q in generate_bias_and_trap(FULL_STUDY_CONFIG, PROTOCOL_BTC):
            if q.kind == KIND_BIAS:
                assert (q.left_codec, q.left_level) == (q.right_codec, q.right_level)

    def test_traps_oppose_source_and_level_ten(self):
        for q in generate_bias_and_trap(FULL_STUDY_CONFIG, PROTOCOL_PTC):
            if q.kind == KIND_TRAP:
                assert {q.left_level, q.right_level} == {0, 10}

    def test_trap_sides_balanced(self):
        traps = [
            q for q in generate_bias_and_trap(FULL_STUDY_CONFIG, PROTOCOL_BTC)
            if q.kind == KIND_TRAP
        ]
        ten_left = sum(1 for q in traps if q.left_level == 10)
        assert ten_left == len(traps) // 2


class TestBatches:
    def test_full_study_batch_sizes(self):
        for proto, size in ((PROTOCOL_BTC, 360), (PROTOCOL_PTC, 105)):
            batches = generate_design(FULL_STUDY_CONFIG, proto)
            assert len(batches) == 10
            assert all(len(b.questions) == size for b in batches)

    def test_traps_and_bias_uniform_per_batch(self):
        batches = generate_design(FULL_STUDY_CONFIG, PROTOCOL_BTC)
        for batch in batches:
            counts = kind_counts(batch.questions)
            assert counts[KIND_TRAP] == 20
            assert counts[KIND_BIAS] == 10

    def test_partition_property(self):
        batches = generate_design(SMALL_CONFIG, PROTOCOL_BTC)
        ids = [q.question_id for b in batches for q in b.questions]
        assert len(ids) == len(set(ids))
        regenerated = batch_questions(generate_design(SMALL_CONFIG, PROTOCOL_BTC))
        assert set(ids) == {q.question_id for q in regenerated}

    def test_indivisible_counts_rejected(self):
        config = DesignConfig(sources=("sA", "sB"), codecs=("cX", "cY", "cZ"), n_batches=7)
        with pytest.raises(DesignError, match="divisible"):
            generate_design(config, PROTOCOL_BTC)

    def test_every_batch_has_a_trap(self):
        for batch in generate_design(SMALL_CONFIG, PROTOCOL_PTC):
            assert any(q.kind == KIND_TRAP for q in batch.questions)


class TestReproducibility:
    def test_same_seed_same_design_bytes(self, tmp_path):
        paths = []
        for name in ("a", "b"):
            qs = batch_questions(generate_design(FULL_STUDY_CONFIG, PROTOCOL_PTC))
            path = tmp_path / f"{name}.jsonl"
            write_manifest(qs, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_different_seed_differs(self):
        other = DesignConfig(rng_seed=123)
        a = batch_questions(generate_design(FULL_STUDY_CONFIG, PROTOCOL_BTC))
        b = batch_questions(generate_design(other, PROTOCOL_BTC))
        assert [q.question_id for q in a] != [q.question_id for q in b]

    def test_manifest_round_trip(self, tmp_path):
        qs = batch_questions(generate_design(SMALL_CONFIG, PROTOCOL_BTC))
        path = tmp_path / "manifest.jsonl"
        write_manifest(qs, path)
        assert read_manifest(path) == qs

    def test_manifest_lines_are_json_objects(self, tmp_path):
        qs = batch_questions(generate_design(SMALL_CONFIG, PROTOCOL_PTC))
        path = tmp_path / "manifest.jsonl"
        write_manifest(qs, path)
        with open(path) as fh:
            for line in fh:
                rec = json.loads(line)
                assert rec["protocol"] == PROTOCOL_PTC
                assert rec["batch_id"].startswith("ptc_")


def test_source_sharing_invariant():
    for q in batch_questions(generate_design(FULL_STUDY_CONFIG, PROTOCOL_BTC)):
        assert q.source_id  # left and right always carry the question's source
