"""Response analysis: reliability filtering, Thurstonian scale reconstruction,
alignment of boosted scales, bootstrap confidence intervals, psychometric
curves, and bias reporting."""

from .scaling import PHI_INV_75, reconstruct_scales, to_jnd  # noqa: F401
from .counts import ComparisonCounts, build_counts  # noqa: F401
from .filtering import filter_batches, bias_report  # noqa: F401
from .alignment import AlignmentModel, fit_alignment, select_granularity  # noqa: F401
from .bootstrap import bootstrap_cis  # noqa: F401
from .curves import psychometric_curves  # noqa: F401
from .run import AnalysisConfig, analyze_study  # noqa: F401
