"""Aggregation of responses into ordered pairwise-comparison counts.

Responses are interpreted as two-alternative forced choices: each "not sure"
splits into half a vote for either side, bias questions carry no pairwise
information and are excluded, and the left/right presentation order is
collapsed into the stimulus-pair direction. Counts are kept both as a
matrix (for reconstruction) and per question (the bootstrap resamples
responses within each question).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..design import KIND_BIAS, TripletQuestion
from ..stimuli import SOURCE_CODEC
from .scaling import AnalysisError

ANCHOR_NODE = (SOURCE_CODEC, 0)


@dataclass
class ComparisonCounts:
    """Ordered pair counts for one source under one protocol.

    ``matrix[i, k]`` is the effective number of "node i judged more
    distorted than node k" votes. ``q_*`` arrays hold the same information
    per question for within-question resampling.
    """

    source_id: str
    protocol: str
    nodes: tuple
    matrix: np.ndarray
    q_left: np.ndarray
    q_right: np.ndarray
    q_n_left: np.ndarray
    q_n_right: np.ndarray
    q_n_not_sure: np.ndarray

    @property
    def anchor_index(self) -> int:
        return self.nodes.index(ANCHOR_NODE)

    @property
    def total_responses(self) -> float:
        return float(self.q_n_left.sum() + self.q_n_right.sum() + self.q_n_not_sure.sum())


def design_nodes(questions: list[TripletQuestion], protocol: str, source_id: str) -> tuple:
    """All stimulus nodes of one source/protocol, anchor first."""
    nodes = set()
    for q in questions:
        if q.protocol != protocol or q.source_id != source_id:
            continue
        nodes.add((q.left_codec, q.left_level))
        nodes.add((q.right_codec, q.right_level))
    nodes.discard(ANCHOR_NODE)
    return (ANCHOR_NODE,) + tuple(sorted(nodes))


def matrix_from_question_counts(n_nodes, q_left, q_right, n_left, n_right, n_not_sure):
    matrix = np.zeros((n_nodes, n_nodes))
    half = 0.5 * n_not_sure
    flat_lr = q_left * n_nodes + q_right
    flat_rl = q_right * n_nodes + q_left
    matrix += np.bincount(flat_lr, weights=n_left + half, minlength=n_nodes * n_nodes).reshape(
        n_nodes, n_nodes
    )
    matrix += np.bincount(flat_rl, weights=n_right + half, minlength=n_nodes * n_nodes).reshape(
        n_nodes, n_nodes
    )
    return matrix


def build_counts(
    responses: pd.DataFrame,
    questions: list[TripletQuestion],
    source_id: str,
    protocol: str,
) -> ComparisonCounts:
    """Pairwise counts for one source from (already filtered) responses."""
    nodes = design_nodes(questions, protocol, source_id)
    index = {node: i for i, node in enumerate(nodes)}

    mask = (
        (responses["protocol"] == protocol)
        & (responses["source_id"] == source_id)
        & (responses["kind"] != KIND_BIAS)
    )
    sub = responses.loc[mask]
    grouped = sub.groupby(
        ["question_id", "left_codec", "left_level", "right_codec", "right_level"],
        sort=True,
    )["answer"].value_counts().unstack(fill_value=0)
    for col in ("left", "right", "not_sure"):
        if col not in grouped.columns:
            grouped[col] = 0

    q_left = np.empty(len(grouped), dtype=np.int64)
    q_right = np.empty(len(grouped), dtype=np.int64)
    for row, (_, lc, ll, rc, rl) in enumerate(grouped.index):
        try:
            q_left[row] = index[(lc, int(ll))]
            q_right[row] = index[(rc, int(rl))]
        except KeyError as exc:
            raise AnalysisError(f"response references unknown stimulus {exc}") from None

    n_left = grouped["left"].to_numpy(dtype=np.float64)
    n_right = grouped["right"].to_numpy(dtype=np.float64)
    n_not_sure = grouped["not_sure"].to_numpy(dtype=np.float64)
    matrix = matrix_from_question_counts(len(nodes), q_left, q_right, n_left, n_right, n_not_sure)
    return ComparisonCounts(
        source_id=source_id,
        protocol=protocol,
        nodes=nodes,
        matrix=matrix,
        q_left=q_left,
        q_right=q_right,
        q_n_left=n_left,
        q_n_right=n_right,
        q_n_not_sure=n_not_sure,
    )
