"""Alignment of boosted scales onto the plain perceptual scale.

Boosted-protocol JND values (predictors) are mapped onto plain-protocol JND
values (targets) by a zero-intercept quadratic y = a*x + b*x**2, fitted by
least squares at one of four granularities: one polynomial overall, one per
source, one per codec, or one per source-codec pair. The granularity is
chosen by AIC, where the log-likelihood is that of the filtered plain
responses under the Thurstone model with the transformed boosted scales
(a residual-based Gaussian likelihood is available as an alternative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from .counts import ComparisonCounts
from .scaling import AnalysisError, DEFAULT_PROB_FLOOR, PHI_INV_75

GRANULARITIES = ("global", "per_source", "per_codec", "per_pair")

# Scale parameters behind the boosted-protocol estimates in the full-scale
# study: 5 sources x 5 codecs x 10 levels.
DEFAULT_BTC_PARAM_COUNT = 250


@dataclass
class AlignmentModel:
    granularity: str
    coefficients: dict  # group key -> (a, b)
    rss: float
    n_points: int
    n_transform_params: int
    log_likelihood: float | None = None
    aic: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def group_key(self, source_id: str, codec_id: str):
        if self.granularity == "global":
            return "all"
        if self.granularity == "per_source":
            return source_id
        if self.granularity == "per_codec":
            return codec_id
        return (source_id, codec_id)

    def apply(self, source_id: str, codec_id: str, x: float) -> float:
        a, b = self.coefficients[self.group_key(source_id, codec_id)]
        return a * x + b * x * x

    def to_json_dict(self) -> dict:
        coeff = {
            "|".join(key) if isinstance(key, tuple) else key: [a, b]
            for key, (a, b) in sorted(self.coefficients.items(), key=lambda kv: str(kv[0]))
        }
        return {
            "granularity": self.granularity,
            "coefficients": coeff,
            "rss": self.rss,
            "n_points": self.n_points,
            "n_transform_params": self.n_transform_params,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
        }


def _fit_zero_intercept_quadratic(
    x: np.ndarray, y: np.ndarray, w: np.ndarray | None = None
) -> tuple[float, float]:
    """Least squares for y = a*x + b*x**2 (no constant term)."""
    design = np.column_stack([x, x * x])
    if w is not None:
        scale = np.sqrt(w)
        design = design * scale[:, None]
        y = y * scale
    coeff, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coeff[0]), float(coeff[1])


def fit_alignment(
    btc_jnd: dict,
    ptc_jnd: dict,
    granularity: str,
    weights: dict | None = None,
) -> AlignmentModel:
    """Fit the quadratic map from boosted to plain JND scales.

    ``btc_jnd`` / ``ptc_jnd`` map (source_id, codec_id, level) to JND scale
    values; the overlap is taken where both protocols scaled the same
    stimulus (the level-0 anchor is pinned at 0 on both sides and adds
    nothing to the fit). ``weights`` optionally maps the same keys to
    per-point least-squares weights; the default is the unweighted fit.
    """
    if granularity not in GRANULARITIES:
        raise AnalysisError(f"unknown granularity {granularity!r}")
    overlap = sorted(set(btc_jnd) & set(ptc_jnd))
    if not overlap:
        raise AnalysisError("no overlap stimuli between the two protocols")

    groups: dict = {}
    for key in overlap:
        source_id, codec_id, _ = key
        if granularity == "global":
            gkey = "all"
        elif granularity == "per_source":
            gkey = source_id
        elif granularity == "per_codec":
            gkey = codec_id
        else:
            gkey = (source_id, codec_id)
        groups.setdefault(gkey, []).append(key)

    coefficients = {}
    rss = 0.0
    for gkey, keys in groups.items():
        x = np.array([btc_jnd[k] for k in keys])
        y = np.array([ptc_jnd[k] for k in keys])
        if len(keys) < 2:
            raise AnalysisError(
                f"alignment group {gkey!r} has {len(keys)} overlap points for 2 parameters"
            )
        w = None if weights is None else np.array([weights[k] for k in keys])
        a, b = _fit_zero_intercept_quadratic(x, y, w)
        coefficients[gkey] = (a, b)
        rss += float(np.sum((y - a * x - b * x * x) ** 2))

    return AlignmentModel(
        granularity=granularity,
        coefficients=coefficients,
        rss=rss,
        n_points=len(overlap),
        n_transform_params=2 * len(coefficients),
    )


def _thurstone_loglik_for_model(
    model: AlignmentModel,
    btc_jnd: dict,
    ptc_counts: list[ComparisonCounts],
    prob_floor: float,
) -> float:
    """Plain-response log-likelihood with scales from the transformed boosted fit."""
    total = 0.0
    for counts in ptc_counts:
        scales = np.zeros(len(counts.nodes))
        for i, (codec_id, level) in enumerate(counts.nodes):
            if level == 0:
                continue
            key = (counts.source_id, codec_id, level)
            if key not in btc_jnd:
                raise AnalysisError(f"no boosted scale for overlap stimulus {key}")
            aligned = model.apply(counts.source_id, codec_id, btc_jnd[key])
            scales[i] = aligned * PHI_INV_75
        ll, _, _ = _kernels.pair_loglik(counts.matrix, scales, prob_floor)
        total += float(ll)
    return total


def _residual_loglik(model: AlignmentModel) -> float:
    # Gaussian profile likelihood of the regression residuals.
    n = model.n_points
    rss = max(model.rss, 1e-300)
    return -0.5 * n * (math.log(2.0 * math.pi) + math.log(rss / n) + 1.0)


def select_granularity(
    models: list[AlignmentModel],
    btc_jnd: dict | None = None,
    ptc_counts: list[ComparisonCounts] | None = None,
    btc_param_count: int = DEFAULT_BTC_PARAM_COUNT,
    likelihood: str = "thurstone",
    prob_floor: float = DEFAULT_PROB_FLOOR,
) -> AlignmentModel:
    """Pick the minimum-AIC alignment model.

    AIC = 2k - 2 lnL with k = btc_param_count + transformation parameters.
    ``likelihood="thurstone"`` (default) evaluates the plain responses under
    the transformed boosted scales and needs ``btc_jnd`` and ``ptc_counts``;
    ``likelihood="residual"`` uses the Gaussian regression likelihood.
    """
    if not models:
        raise AnalysisError("no candidate models")
    for model in models:
        if likelihood == "thurstone":
            if btc_jnd is None or ptc_counts is None:
                raise AnalysisError("thurstone AIC needs btc_jnd and ptc_counts")
            lnl = _thurstone_loglik_for_model(model, btc_jnd, ptc_counts, prob_floor)
        elif likelihood == "residual":
            lnl = _residual_loglik(model)
        else:
            raise AnalysisError(f"unknown AIC likelihood {likelihood!r}")
        k = btc_param_count + model.n_transform_params
        model.log_likelihood = lnl
        model.aic = 2.0 * k - 2.0 * lnl
        model.diagnostics["k"] = k
    best = min(models, key=lambda m: (m.aic, m.n_transform_params))
    return best
