"""End-to-end analysis: filter, reconstruct, align, bootstrap, report.

Consumes a design manifest plus a response table in the export schema and
writes three artifacts: ``scales.csv`` (per-stimulus JND scales with CIs),
``alignment.json`` (coefficients and the AIC table), and ``report.json``
(filter statistics, bias tallies, psychometric curves).
"""

from __future__ import annotations


import json
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from ..design import PROTOCOL_BTC, PROTOCOL_PTC, TripletQuestion
from .alignment import (
    DEFAULT_BTC_PARAM_COUNT,
    GRANULARITIES,
    AlignmentModel,
    fit_alignment,
    select_granularity,
)
from .bootstrap import BootstrapResult, bootstrap_cis
from .counts import ComparisonCounts, build_counts
from .curves import psychometric_curves
from .filtering import DEFAULT_RELIABILITY_THRESHOLD, bias_report, filter_batches
from .scaling import AnalysisError

SCALES_CSV_COLUMNS = [
    "source_id",
    "codec_id",
    "level",
    "protocol",
    "aligned",
    "scale_jnd",
    "ci_low",
    "ci_high",
]


@dataclass
class AnalysisConfig:
    filter_threshold: float = DEFAULT_RELIABILITY_THRESHOLD
    bootstrap_n: int = 10_000
    seed: int = 0
    granularity: str = "auto"
    aic_likelihood: str = "thurstone"
    btc_param_count: int | None = None


@dataclass
class AnalysisOutput:
    kept_responses: pd.DataFrame
    reliability_report: object
    bias: dict
    curves: dict
    alignment_models: list[AlignmentModel]
    chosen_alignment: AlignmentModel | None
    bootstrap: BootstrapResult


def join_responses(responses: pd.DataFrame, questions: list[TripletQuestion]) -> pd.DataFrame:
    """Validate response rows against the design manifest (authoritative)."""
    by_id = {q.question_id: q for q in questions}
    unknown = set(responses["question_id"]) - set(by_id)
    if unknown:
        raise AnalysisError(f"responses reference unknown questions: {sorted(unknown)[:5]}")
    design_cols = [
        "question_id",
        "protocol",
        "kind",
        "source_id",
        "left_codec",
        "left_level",
        "right_codec",
        "right_level",
    ]
    design_frame = pd.DataFrame(
        [{col: getattr(q, col) for col in design_cols} for q in questions]
    )
    joined = responses[
        ["question_id", "worker_id", "batch_id", "answer", "response_time_ms", "submitted_at"]
    ].merge(design_frame, on="question_id", how="left", validate="many_to_one")
    return joined


def counts_per_source(
    kept: pd.DataFrame, questions: list[TripletQuestion], protocol: str
) -> list[ComparisonCounts]:
    sources = sorted(
        {q.source_id for q in questions if q.protocol == protocol}
    )
    present = set(kept.loc[kept["protocol"] == protocol, "source_id"])
    return [
        build_counts(kept, questions, source_id, protocol)
        for source_id in sources
        if source_id in present
    ]


def analyze_study(
    responses: pd.DataFrame,
    questions: list[TripletQuestion],
    config: AnalysisConfig,
) -> AnalysisOutput:
    joined = join_responses(responses, questions)
    kept, reliability = filter_batches(joined, config.filter_threshold)
    if kept.empty:
        raise AnalysisError("reliability filter removed every batch instance")

    bias = {
        proto: bias_report(joined, kept, proto)
        for proto in sorted(joined["protocol"].unique())
    }
    curves = psychometric_curves(kept)

    btc_counts = counts_per_source(kept, questions, PROTOCOL_BTC)
    ptc_counts = counts_per_source(kept, questions, PROTOCOL_PTC)

    alignment_models: list[AlignmentModel] = []
    chosen: AlignmentModel | None = None
    granularity = None
    if btc_counts and ptc_counts:
        from .bootstrap import _fit_jnd, _stimulus_map  # full-data point estimates

        fit_kwargs: dict = {}
        btc_map = _stimulus_map(
            btc_counts, {c.source_id: _fit_jnd(c.matrix, c, fit_kwargs) for c in btc_counts}
        )
        ptc_map = _stimulus_map(
            ptc_counts, {c.source_id: _fit_jnd(c.matrix, c, fit_kwargs) for c in ptc_counts}
        )
        if config.granularity == "auto":
            alignment_models = [fit_alignment(btc_map, ptc_map, g) for g in GRANULARITIES]
        elif config.granularity in GRANULARITIES:
            alignment_models = [fit_alignment(btc_map, ptc_map, config.granularity)]
        else:
            raise AnalysisError(f"unknown granularity {config.granularity!r}")
        btc_param_count = config.btc_param_count
        if btc_param_count is None:
            btc_param_count = sum(len(c.nodes) - 1 for c in btc_counts)
        chosen = select_granularity(
            alignment_models,
            btc_jnd=btc_map,
            ptc_counts=ptc_counts,
            btc_param_count=btc_param_count,
            likelihood=config.aic_likelihood,
        )
        granularity = chosen.granularity

    boot = bootstrap_cis(
        btc_counts,
        ptc_counts,
        granularity,
        n_replicates=config.bootstrap_n,
        seed=config.seed,
    )
    return AnalysisOutput(
        kept_responses=kept,
        reliability_report=reliability,
        bias=bias,
        curves=curves,
        alignment_models=alignment_models,
        chosen_alignment=chosen,
        bootstrap=boot,
    )


def scales_csv_text(bootstrap: BootstrapResult) -> str:
    rows = sorted(
        bootstrap.results,
        key=lambda r: (r.protocol, r.aligned, r.source_id, r.codec_id, r.level),
    )
    out = [",".join(SCALES_CSV_COLUMNS)]
    for r in rows:
        out.append(
            f"{r.source_id},{r.codec_id},{r.level},{r.protocol},{str(r.aligned).lower()},"
            f"{r.scale_jnd:.6f},{r.ci_low:.6f},{r.ci_high:.6f}"
        )
    return "\n".join(out) + "\n"


def write_artifacts(output: AnalysisOutput, out_dir, run_id: str | None = None) -> dict:
    """Write scales.csv, alignment.json, report.json; returns their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    scales_path = out_dir / "scales.csv"
    scales_path.write_text(scales_csv_text(output.bootstrap))

    alignment_path = out_dir / "alignment.json"
    alignment_payload = {
        "run_id": run_id,
        "selected_granularity": (
            output.chosen_alignment.granularity if output.chosen_alignment else None
        ),
        "selected": output.chosen_alignment.to_json_dict() if output.chosen_alignment else None,
        "candidates": [m.to_json_dict() for m in output.alignment_models],
    }
    alignment_path.write_text(json.dumps(alignment_payload, indent=2) + "\n")

    report_path = out_dir / "report.json"
    report_payload = {
        "run_id": run_id,
        "filtering": output.reliability_report.to_json_dict(),
        "bias": {
            proto: {
                phase: tally.to_json_dict()
                for phase, tally in report.items()
            }
            for proto, report in output.bias.items()
        },
        "psychometric": {
            proto: curve.to_json_dict() for proto, curve in output.curves.items()
        },
        "bootstrap": {
            "n_replicates": output.bootstrap.n_replicates,
            "dropped_replicates": output.bootstrap.dropped_replicates,
        },
    }
    report_path.write_text(json.dumps(report_payload, indent=2) + "\n")
    return {
        "scales": scales_path,
        "alignment": alignment_path,
        "report": report_path,
    }
