"""Psychometric functions of correct-response proportions by distortion level.

For each level d, pools the same-codec questions opposing level 0 to level d
(correct = chose the level-d side, "not sure" = incorrect), averages the
proportion over source-codec cells, and locates the level where the curve
crosses 0.75 -- the 1-JND threshold -- by linear interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..design import KIND_SAME_CODEC, KIND_TRAP

JND_PROPORTION = 0.75


@dataclass
class PsychometricCurve:
    protocol: str
    levels: list[int]
    proportions: list[float]
    n_responses: list[int]
    jnd_threshold_level: float | None
    empty_cells: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "levels": self.levels,
            "proportions": self.proportions,
            "n_responses": self.n_responses,
            "jnd_threshold_level": self.jnd_threshold_level,
            "empty_cells": [list(cell) for cell in self.empty_cells],
        }


def _crossing(levels: np.ndarray, proportions: np.ndarray, target: float) -> float | None:
    """First linear-interpolation crossing of the target proportion."""
    if len(levels) == 0:
        return None
    if proportions[0] >= target:
        return float(levels[0])
    for i in range(1, len(levels)):
        p0, p1 = proportions[i - 1], proportions[i]
        if p0 < target <= p1:
            frac = (target - p0) / (p1 - p0)
            return float(levels[i - 1] + frac * (levels[i] - levels[i - 1]))
    return None


def psychometric_curves(responses: pd.DataFrame) -> dict[str, PsychometricCurve]:
    """One curve per protocol present in the (already filtered) responses."""
    mask = responses["kind"].isin([KIND_SAME_CODEC, KIND_TRAP])
    lo = np.minimum(responses["left_level"], responses["right_level"]) == 0
    sub = responses.loc[mask & lo].copy()
    if sub.empty:
        return {}

    level = np.maximum(sub["left_level"], sub["right_level"])
    worse_on_left = sub["left_level"] > 0
    codec = np.where(worse_on_left, sub["left_codec"], sub["right_codec"])
    correct = np.where(worse_on_left, sub["answer"] == "left", sub["answer"] == "right")
    sub = sub.assign(level=level, cell_codec=codec, correct=correct)
    sub = sub.loc[sub["level"] > 0]

    curves = {}
    for protocol, frame in sub.groupby("protocol"):
        cells = frame.groupby(["source_id", "cell_codec", "level"])["correct"].agg(
            ["mean", "size"]
        )
        per_level = cells.groupby(level=2).agg(
            proportion=("mean", "mean"), n=("size", "sum"), cells=("size", "size")
        )
        expected_cells = (
            frame[["source_id", "cell_codec"]].drop_duplicates().shape[0]
        )
        empty = []
        for lv, row in per_level.iterrows():
            if row["cells"] < expected_cells:
                have = set(
                    cells.loc[(slice(None), slice(None), lv), :].index.droplevel(2)
                )
                all_cells = set(
                    map(tuple, frame[["source_id", "cell_codec"]].drop_duplicates().values)
                )
                empty.extend(sorted((s, c, int(lv)) for s, c in all_cells - have))

        levels = [int(lv) for lv in per_level.index]
        proportions = per_level["proportion"].to_numpy()
        curves[protocol] = PsychometricCurve(
            protocol=protocol,
            levels=levels,
            proportions=[float(p) for p in proportions],
            n_responses=[int(n) for n in per_level["n"]],
            jnd_threshold_level=_crossing(np.array(levels), proportions, JND_PROPORTION),
            empty_cells=empty,
        )
    return curves
