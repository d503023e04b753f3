"""Triplet-question generation and batch splitting.

A design covers four question kinds per protocol: exhaustive ordered
same-codec level pairs, randomly sampled cross-codec pairs at near-equal
levels, identical-pair bias checks, and easy 0-vs-10 trap questions. The
full set is split into batches with traps and bias checks spread uniformly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .stimuli import SOURCE_CODEC

PROTOCOL_BTC = "BTC"
PROTOCOL_PTC = "PTC"
PROTOCOLS = (PROTOCOL_BTC, PROTOCOL_PTC)

KIND_SAME_CODEC = "same_codec"
KIND_CROSS_CODEC = "cross_codec"
KIND_BIAS = "bias"
KIND_TRAP = "trap"

TRAP_LEVEL = 10

MANIFEST_FIELDS = (
    "question_id",
    "protocol",
    "kind",
    "source_id",
    "batch_id",
    "left_codec",
    "left_level",
    "right_codec",
    "right_level",
)


class DesignError(ValueError):
    """Raised when a design request cannot be satisfied."""


@dataclass(frozen=True)
class TripletQuestion:
    question_id: str
    protocol: str
    kind: str
    source_id: str
    left_codec: str
    left_level: int
    right_codec: str
    right_level: int
    batch_id: str | None = None

    def to_json_dict(self) -> dict:
        return {name: getattr(self, name) for name in MANIFEST_FIELDS}


@dataclass(frozen=True)
class Batch:
    batch_id: str
    protocol: str
    questions: tuple[TripletQuestion, ...]


@dataclass(frozen=True)
class DesignConfig:
    sources: tuple[str, ...] = ("s1", "s2", "s3", "s4", "s5")
    codecs: tuple[str, ...] = ("c1", "c2", "c3", "c4", "c5")
    btc_levels: tuple[int, ...] = tuple(range(11))
    ptc_levels: tuple[int, ...] = (0, 2, 4, 6, 8, 10)
    cross_codec_ratio: float = 0.2
    n_batches: int = 10
    rng_seed: int = 0
    bias_per_cell: dict = field(
        default_factory=lambda: {PROTOCOL_BTC: 4, PROTOCOL_PTC: 2}
    )
    trap_per_cell: dict = field(
        default_factory=lambda: {PROTOCOL_BTC: 8, PROTOCOL_PTC: 4}
    )

    def __post_init__(self):
        if not 0 < self.cross_codec_ratio <= 1:
            raise DesignError(f"cross_codec_ratio must be in (0, 1], got {self.cross_codec_ratio}")
        if len(set(self.sources)) != len(self.sources) or len(set(self.codecs)) != len(self.codecs):
            raise DesignError("duplicate source or codec identifiers")
        for levels in (self.btc_levels, self.ptc_levels):
            if 0 not in levels or TRAP_LEVEL not in levels:
                raise DesignError(f"level sets must contain 0 and {TRAP_LEVEL}, got {levels}")
            if any(not 0 <= lv <= 10 for lv in levels) or len(set(levels)) != len(levels):
                raise DesignError(f"invalid level set {levels}")

    def levels(self, protocol: str) -> tuple[int, ...]:
        return self.btc_levels if protocol == PROTOCOL_BTC else self.ptc_levels

    def distorted_levels(self, protocol: str) -> tuple[int, ...]:
        return tuple(lv for lv in self.levels(protocol) if lv > 0)


def _codec_for(codec: str, level: int) -> str:
    return codec if level > 0 else SOURCE_CODEC


def question_id(protocol, kind, source, left_codec, left_level, right_codec, right_level, ordinal=0):
    """Deterministic id so design, responses, and analysis join stably."""
    key = "|".join(
        str(part)
        for part in (protocol, kind, source, left_codec, left_level, right_codec, right_level, ordinal)
    )
    return hashlib.blake2s(key.encode(), digest_size=8).hexdigest()


def _make_question(protocol, kind, source, codec_l, level_l, codec_r, level_r, ordinal=0):
    cl = _codec_for(codec_l, level_l)
    cr = _codec_for(codec_r, level_r)
    return TripletQuestion(
        question_id=question_id(protocol, kind, source, cl, level_l, cr, level_r, ordinal),
        protocol=protocol,
        kind=kind,
        source_id=source,
        left_codec=cl,
        left_level=level_l,
        right_codec=cr,
        right_level=level_r,
    )


def generate_same_codec(config: DesignConfig, protocol: str) -> list[TripletQuestion]:
    """Every ordered pair of distinct levels, per source and codec."""
    levels = config.levels(protocol)
    if not levels:
        raise DesignError("empty level set")
    questions = []
    for source in config.sources:
        for codec in config.codecs:
            for la in levels:
                for lb in levels:
                    if la == lb:
                        continue
                    questions.append(
                        _make_question(protocol, KIND_SAME_CODEC, source, codec, la, codec, lb)
                    )
    return questions


def generate_cross_codec(
    config: DesignConfig, protocol: str, rng: np.random.Generator
) -> list[TripletQuestion]:
    """Seeded sample of different-codec pairs with levels differing by <= 1."""
    if len(config.codecs) < 2:
        raise DesignError("cross-codec questions need at least two codecs")
    levels = config.distorted_levels(protocol)
    same_count = (
        len(config.sources) * len(config.codecs) * len(config.levels(protocol)) * (len(config.levels(protocol)) - 1)
    )
    total = round(config.cross_codec_ratio * same_count)
    per_source = [total // len(config.sources)] * len(config.sources)
    for i in range(total % len(config.sources)):
        per_source[i] += 1

    questions = []
    for source, target in zip(config.sources, per_source):
        candidates = [
            (ca, la, cb, lb)
            for ca in config.codecs
            for cb in config.codecs
            if ca != cb
            for la in levels
            for lb in levels
            if abs(la - lb) <= 1
        ]
        if target > len(candidates):
            raise DesignError(
                f"cross-codec ratio infeasible: need {target} pairs for {source}, "
                f"only {len(candidates)} distinct candidates"
            )
        picks = rng.choice(len(candidates), size=target, replace=False)
        for p in sorted(picks):
            ca, la, cb, lb = candidates[p]
            questions.append(
                _make_question(protocol, KIND_CROSS_CODEC, source, ca, la, cb, lb)
            )
    return questions


def generate_bias_and_trap(config: DesignConfig, protocol: str) -> list[TripletQuestion]:
    """Identical-pair bias checks plus 0-vs-10 traps with balanced sides.

    Trap and bias questions repeat the same physical comparison across
    batches, so their ids carry a replicate ordinal.
    """
    levels = config.distorted_levels(protocol)
    questions = []
    cell_index = 0
    for source in config.sources:
        for codec in config.codecs:
            for j in range(config.bias_per_cell[protocol]):
                level = levels[(cell_index * config.bias_per_cell[protocol] + j) % len(levels)]
                questions.append(
                    _make_question(protocol, KIND_BIAS, source, codec, level, codec, level, ordinal=j)
                )
            for j in range(config.trap_per_cell[protocol]):
                if j % 2 == 0:
                    args = (codec, TRAP_LEVEL, codec, 0)
                else:
                    args = (codec, 0, codec, TRAP_LEVEL)
                questions.append(
                    _make_question(protocol, KIND_TRAP, source, *args, ordinal=j)
                )
            cell_index += 1
    return questions


def split_into_batches(
    questions: list[TripletQuestion], config: DesignConfig, rng: np.random.Generator
) -> list[Batch]:
    """Partition into n_batches with traps and bias checks spread evenly."""
    protocol = questions[0].protocol
    groups = {
        "trap": [q for q in questions if q.kind == KIND_TRAP],
        "bias": [q for q in questions if q.kind == KIND_BIAS],
        "study": [q for q in questions if q.kind in (KIND_SAME_CODEC, KIND_CROSS_CODEC)],
    }
    n = config.n_batches
    for name, group in groups.items():
        if len(group) % n:
            raise DesignError(
                f"{name} question count {len(group)} is not divisible by {n} batches"
            )
    if not groups["trap"]:
        raise DesignError("designs need at least one trap question per batch")

    buckets: list[list[TripletQuestion]] = [[] for _ in range(n)]
    for group in groups.values():
        order = rng.permutation(len(group))
        share = len(group) // n
        for b in range(n):
            buckets[b].extend(group[i] for i in order[b * share : (b + 1) * share])

    batches = []
    for b, bucket in enumerate(buckets):
        batch_id = f"{protocol.lower()}_{b:02d}"
        shuffled = [bucket[i] for i in rng.permutation(len(bucket))]
        batches.append(
            Batch(
                batch_id=batch_id,
                protocol=protocol,
                questions=tuple(replace(q, batch_id=batch_id) for q in shuffled),
            )
        )
    return batches


def generate_design(config: DesignConfig, protocol: str) -> list[Batch]:
    """Full seeded design for one protocol."""
    if protocol not in PROTOCOLS:
        raise DesignError(f"unknown protocol {protocol!r}")
    seed_root = np.random.SeedSequence(
        entropy=config.rng_seed, spawn_key=(PROTOCOLS.index(protocol),)
    )
    cross_rng, split_rng = (np.random.default_rng(s) for s in seed_root.spawn(2))
    questions = generate_same_codec(config, protocol)
    questions += generate_cross_codec(config, protocol, cross_rng)
    study_ids = [q.question_id for q in questions]
    if len(set(study_ids)) != len(study_ids):
        raise DesignError("duplicate study question generated")
    questions += generate_bias_and_trap(config, protocol)
    return split_into_batches(questions, config, split_rng)


def batch_questions(batches: list[Batch]) -> list[TripletQuestion]:
    return [q for batch in batches for q in batch.questions]


def write_manifest(questions, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for q in questions:
            fh.write(json.dumps(q.to_json_dict()) + "\n")


def read_manifest(path) -> list[TripletQuestion]:
    questions = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            questions.append(TripletQuestion(**{k: rec[k] for k in MANIFEST_FIELDS}))
    return questions
