"""Synthetic observers answering triplet questions from planted true scales.

The simulator draws a noisy perceived-difference variable per question under
the same equal-variance Gaussian model the analysis assumes, so reconstructed
scales can be checked against the planted ground truth. A configurable share
of workers is unreliable (high lapse rate, optionally with a sided answer
bias) to exercise the reliability filter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np
import pandas as pd

from .design import PROTOCOL_BTC, PROTOCOLS, TripletQuestion
from .stimuli import SOURCE_CODEC
from .analysis.scaling import PHI_INV_75

ANSWER_LEFT = "left"
ANSWER_RIGHT = "right"
ANSWER_NOT_SURE = "not_sure"
ANSWERS = (ANSWER_LEFT, ANSWER_RIGHT, ANSWER_NOT_SURE)

EXPORT_COLUMNS = [
    "question_id",
    "worker_id",
    "batch_id",
    "protocol",
    "kind",
    "source_id",
    "left_codec",
    "left_level",
    "right_codec",
    "right_level",
    "answer",
    "response_time_ms",
    "toggled_count",
    "submitted_at",
]

_CAMPAIGN_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)
_RESPONSE_GAP_MS = 500


class UnknownStimulusError(KeyError):
    pass


@dataclass
class GroundTruth:
    """Planted latent impairments in JND units.

    ``plain_jnd`` maps (source, codec, level >= 1) to the unboosted scale;
    level 0 is always 0. ``boost_gain`` holds per-(source, codec) quadratic
    coefficients (a, b) turning a plain scale x into the boosted scale
    a*x + b*x**2 seen under the boosted protocol.
    """

    plain_jnd: dict = field(default_factory=dict)
    boost_gain: dict = field(default_factory=dict)
    lapse_rate: float = 0.0
    not_sure_band_jnd: float = 0.2

    @classmethod
    def linear(
        cls,
        sources,
        codecs,
        levels=tuple(range(1, 11)),
        jnd_per_level: float = 0.25,
        boost_gain=(2.0, 0.0),
        lapse_rate: float = 0.0,
        not_sure_band_jnd: float = 0.2,
    ) -> "GroundTruth":
        """Equally spaced plain scales with one boost gain for every cell."""
        plain = {
            (s, c, lv): jnd_per_level * lv for s in sources for c in codecs for lv in levels
        }
        gains = {(s, c): tuple(boost_gain) for s in sources for c in codecs}
        return cls(plain, gains, lapse_rate, not_sure_band_jnd)

    def scale(self, protocol: str, source_id: str, codec_id: str, level: int) -> float:
        if level == 0 or codec_id == SOURCE_CODEC:
            return 0.0
        try:
            plain = self.plain_jnd[(source_id, codec_id, level)]
        except KeyError:
            raise UnknownStimulusError((source_id, codec_id, level)) from None
        if protocol == PROTOCOL_BTC:
            a, b = self.boost_gain[(source_id, codec_id)]
            return a * plain + b * plain * plain
        return plain

    def to_json(self) -> str:
        plain: dict = {}
        for (s, c, lv), val in sorted(self.plain_jnd.items()):
            plain.setdefault(s, {}).setdefault(c, {})[str(lv)] = val
        gains: dict = {}
        for (s, c), ab in sorted(self.boost_gain.items()):
            gains.setdefault(s, {})[c] = list(ab)
        return json.dumps(
            {
                "lapse_rate": self.lapse_rate,
                "not_sure_band_jnd": self.not_sure_band_jnd,
                "plain_jnd": plain,
                "boost_gain": gains,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        raw = json.loads(text)
        plain = {
            (s, c, int(lv)): float(val)
            for s, by_codec in raw["plain_jnd"].items()
            for c, by_level in by_codec.items()
            for lv, val in by_level.items()
        }
        gains = {
            (s, c): tuple(ab)
            for s, by_codec in raw["boost_gain"].items()
            for c, ab in by_codec.items()
        }
        return cls(plain, gains, raw.get("lapse_rate", 0.0), raw.get("not_sure_band_jnd", 0.2))


@dataclass(frozen=True)
class ReliabilityMix:
    """Share and behavior of unreliable workers in a simulated campaign."""

    unreliable_fraction: float = 0.0
    unreliable_lapse_rate: float = 0.8
    unreliable_right_bias: float = 0.7

    def lapse_probs(self, unreliable: bool) -> tuple[float, float, float]:
        # (left, right, not_sure); right_bias = 1/3 reproduces the uniform
        # lapse of reliable workers.
        beta = self.unreliable_right_bias if unreliable else 1.0 / 3.0
        return ((1.0 - beta) / 2.0, beta, (1.0 - beta) / 2.0)


def _draw_answers(mu, band, lapse_rate, lapse_probs, rng):
    """Vectorized Thurstone draws -> array of answer strings."""
    draws = mu + rng.standard_normal(mu.shape)
    answers = np.where(
        np.abs(draws) < band, ANSWER_NOT_SURE, np.where(draws > 0, ANSWER_LEFT, ANSWER_RIGHT)
    )
    if lapse_rate > 0:
        lapses = rng.random(mu.shape) < lapse_rate
        random_answers = rng.choice(np.array(ANSWERS), size=mu.shape, p=lapse_probs)
        answers = np.where(lapses, random_answers, answers)
    return answers


def simulate_response(question: TripletQuestion, truth: GroundTruth, rng) -> str:
    """One simulated answer to one triplet question."""
    s_left = truth.scale(question.protocol, question.source_id, question.left_codec, question.left_level)
    s_right = truth.scale(question.protocol, question.source_id, question.right_codec, question.right_level)
    mu = np.array([PHI_INV_75 * (s_left - s_right)])
    band = truth.not_sure_band_jnd * PHI_INV_75
    mix = ReliabilityMix()
    return str(_draw_answers(mu, band, truth.lapse_rate, mix.lapse_probs(False), rng)[0])


def _response_window_ms(protocol: str) -> int:
    return 11_000 if protocol == PROTOCOL_BTC else 30_000


def planted_unreliable(protocol: str, n_workers: int, mix: ReliabilityMix, seed: int) -> np.ndarray:
    """Which worker indices a campaign will treat as unreliable (by seed)."""
    seed_root = np.random.SeedSequence(entropy=seed, spawn_key=(PROTOCOLS.index(protocol),))
    master = np.random.default_rng(seed_root)
    n_unreliable = round(mix.unreliable_fraction * n_workers)
    unreliable = np.zeros(n_workers, dtype=bool)
    unreliable[master.permutation(n_workers)[:n_unreliable]] = True
    return unreliable


def simulate_campaign(
    questions: list[TripletQuestion],
    truth: GroundTruth,
    n_workers: int,
    reliability_mix: ReliabilityMix | None = None,
    seed: int = 0,
    batches_per_worker: int = 1,
) -> pd.DataFrame:
    """Simulate a full campaign; returns rows in the service export schema.

    ``n_workers`` applies per protocol present in ``questions``. Workers are
    dealt batches round-robin so every question collects the same number of
    responses; the question order within an assignment is a per-worker
    seeded permutation, like the live service.
    """
    if not questions:
        raise ValueError("empty design")
    mix = reliability_mix or ReliabilityMix()
    frames = []
    for proto_idx, protocol in enumerate(PROTOCOLS):
        proto_questions = [q for q in questions if q.protocol == protocol]
        if not proto_questions:
            continue
        by_batch: dict[str, list[TripletQuestion]] = {}
        for q in proto_questions:
            by_batch.setdefault(q.batch_id, []).append(q)
        batch_ids = sorted(by_batch)
        seed_root = np.random.SeedSequence(entropy=seed, spawn_key=(proto_idx,))
        worker_seeds = seed_root.spawn(n_workers)
        unreliable = planted_unreliable(protocol, n_workers, mix, seed)

        window = _response_window_ms(protocol)
        band = truth.not_sure_band_jnd * PHI_INV_75
        mu_cache = {
            q.question_id: PHI_INV_75
            * (
                truth.scale(protocol, q.source_id, q.left_codec, q.left_level)
                - truth.scale(protocol, q.source_id, q.right_codec, q.right_level)
            )
            for q in proto_questions
        }

        for w in range(n_workers):
            rng = np.random.default_rng(worker_seeds[w])
            worker_id = f"{protocol.lower()}_w{w:05d}"
            assigned = [
                by_batch[batch_ids[(w + extra) % len(batch_ids)]]
                for extra in range(batches_per_worker)
            ]
            served = [q for batch in assigned for q in batch]
            order = rng.permutation(len(served))
            served = [served[i] for i in order]

            mu = np.array([mu_cache[q.question_id] for q in served])
            lapse = mix.unreliable_lapse_rate if unreliable[w] else truth.lapse_rate
            answers = _draw_answers(mu, band, lapse, mix.lapse_probs(unreliable[w]), rng)
            times = rng.integers(800, min(window, 8000), size=len(served))
            offsets = np.cumsum(times + _RESPONSE_GAP_MS)
            if protocol == PROTOCOL_BTC:
                toggles = np.full(len(served), pd.NA, dtype=object)
            else:
                toggles = 1 + rng.integers(0, 4, size=len(served))

            frames.append(
                pd.DataFrame(
                    {
                        "question_id": [q.question_id for q in served],
                        "worker_id": worker_id,
                        "batch_id": [q.batch_id for q in served],
                        "protocol": protocol,
                        "kind": [q.kind for q in served],
                        "source_id": [q.source_id for q in served],
                        "left_codec": [q.left_codec for q in served],
                        "left_level": [q.left_level for q in served],
                        "right_codec": [q.right_codec for q in served],
                        "right_level": [q.right_level for q in served],
                        "answer": answers,
                        "response_time_ms": times,
                        "toggled_count": toggles,
                        "submitted_at": [
                            (_CAMPAIGN_EPOCH + timedelta(milliseconds=int(ms))).isoformat()
                            for ms in offsets
                        ],
                    }
                )
            )
    table = pd.concat(frames, ignore_index=True)[EXPORT_COLUMNS]
    return table.sort_values(["worker_id", "submitted_at"], kind="stable").reset_index(drop=True)


def write_responses_csv(table: pd.DataFrame, path) -> None:
    table.to_csv(path, index=False, na_rep="")


def read_responses_csv(path) -> pd.DataFrame:
    return pd.read_csv(
        path,
        dtype={"toggled_count": "Int64"},
        keep_default_na=False,
        na_values=[""],
    )
