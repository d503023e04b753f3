"""Reliability filtering of batch instances and order-bias reporting.

A batch instance is one worker's pass over one batch. Its reliability is
judged on the questions opposing level 0 to level 10 within the same codec
(all traps plus the qualifying same-codec study questions); "not sure"
counts as incorrect. Instances below the accuracy threshold are dropped
wholesale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.stats import binomtest

from ..design import KIND_BIAS, KIND_SAME_CODEC, KIND_TRAP, TRAP_LEVEL
from .scaling import AnalysisError

DEFAULT_RELIABILITY_THRESHOLD = 0.70


@dataclass
class BatchInstance:
    worker_id: str
    batch_id: str
    protocol: str
    n_qualifying: int
    accuracy: float
    kept: bool


@dataclass
class ReliabilityReport:
    threshold: float
    instances: list[BatchInstance]
    raw: dict = field(default_factory=dict)
    kept: dict = field(default_factory=dict)

    def accuracies(self, protocol: str) -> np.ndarray:
        return np.array([b.accuracy for b in self.instances if b.protocol == protocol])

    def histogram(self, protocol: str, bins: int = 20):
        counts, edges = np.histogram(self.accuracies(protocol), bins=bins, range=(0.0, 1.0))
        return counts.tolist(), edges.tolist()

    def to_json_dict(self) -> dict:
        protocols = sorted({b.protocol for b in self.instances})
        out = {"threshold": self.threshold, "raw": self.raw, "kept": self.kept, "protocols": {}}
        for proto in protocols:
            counts, edges = self.histogram(proto)
            out["protocols"][proto] = {
                "accuracy_histogram": {"counts": counts, "bin_edges": edges},
                "instances": [
                    {
                        "worker_id": b.worker_id,
                        "batch_id": b.batch_id,
                        "n_qualifying": b.n_qualifying,
                        "accuracy": b.accuracy,
                        "kept": b.kept,
                    }
                    for b in self.instances
                    if b.protocol == proto
                ],
            }
        return out


def _qualifying_mask(responses: pd.DataFrame) -> pd.Series:
    lo = np.minimum(responses["left_level"], responses["right_level"]) == 0
    hi = np.maximum(responses["left_level"], responses["right_level"]) == TRAP_LEVEL
    return (responses["kind"] == KIND_TRAP) | (
        (responses["kind"] == KIND_SAME_CODEC) & lo & hi
    )


def _correct_mask(responses: pd.DataFrame) -> pd.Series:
    worse_on_left = responses["left_level"] == TRAP_LEVEL
    return np.where(worse_on_left, responses["answer"] == "left", responses["answer"] == "right")


def filter_batches(
    responses: pd.DataFrame,
    threshold: float = DEFAULT_RELIABILITY_THRESHOLD,
) -> tuple[pd.DataFrame, ReliabilityReport]:
    """Drop unreliable batch instances; returns (kept responses, report)."""
    if responses.empty:
        raise AnalysisError("no responses to filter")
    qualifying = responses.loc[_qualifying_mask(responses)].copy()
    qualifying["correct"] = _correct_mask(qualifying)

    instance_keys = responses.groupby(["worker_id", "batch_id"])["protocol"].first()
    accuracy = qualifying.groupby(["worker_id", "batch_id"])["correct"].agg(["mean", "size"])
    missing = instance_keys.index.difference(accuracy.index)
    if len(missing):
        raise AnalysisError(
            f"batch instances without any level-0-vs-{TRAP_LEVEL} question: {list(missing)[:5]}"
        )

    instances = []
    kept_keys = set()
    for key, proto in instance_keys.items():
        acc = float(accuracy.loc[key, "mean"])
        n = int(accuracy.loc[key, "size"])
        keep = acc >= threshold
        if keep:
            kept_keys.add(key)
        instances.append(BatchInstance(key[0], key[1], proto, n, acc, keep))

    keyed = pd.MultiIndex.from_frame(responses[["worker_id", "batch_id"]])
    kept = responses.loc[keyed.isin(kept_keys)].reset_index(drop=True)

    def _stats(frame: pd.DataFrame) -> dict:
        grouped = frame.groupby("protocol")
        return {
            proto: {
                "batches": int(g[["worker_id", "batch_id"]].drop_duplicates().shape[0]),
                "subjects": int(g["worker_id"].nunique()),
            }
            for proto, g in grouped
        }

    report = ReliabilityReport(
        threshold=threshold,
        instances=instances,
        raw=_stats(responses),
        kept=_stats(kept) if not kept.empty else {},
    )
    return kept, report


@dataclass
class BiasTally:
    left: int
    right: int
    not_sure: int
    p_value: float

    def to_json_dict(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "not_sure": self.not_sure,
            "symmetry_p_value": self.p_value,
        }


def bias_tally(responses: pd.DataFrame) -> BiasTally:
    """Answer counts on identical-pair questions + two-sided symmetry test."""
    bias = responses.loc[responses["kind"] == KIND_BIAS, "answer"]
    left = int((bias == "left").sum())
    right = int((bias == "right").sum())
    not_sure = int((bias == "not_sure").sum())
    if left + right == 0:
        p = 1.0
    else:
        p = float(binomtest(left, left + right, 0.5).pvalue)
    return BiasTally(left, right, not_sure, p)


def bias_report(
    responses: pd.DataFrame, kept: pd.DataFrame, protocol: str | None = None
) -> dict:
    """Pre- and post-filter bias tallies (optionally for one protocol)."""
    if protocol is not None:
        responses = responses.loc[responses["protocol"] == protocol]
        kept = kept.loc[kept["protocol"] == protocol]
    return {"pre_filter": bias_tally(responses), "post_filter": bias_tally(kept)}
