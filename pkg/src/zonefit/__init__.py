"""Superellipse logistic strike-zone fitting and gray-zone analysis."""

from .analysis import (
    RatioReport,
    ZoneBand,
    classify_band,
    decision_pitch_mix,
    hit_attempt_ratio,
    jeffreys_interval,
    per_umpire_fits,
    strike_ratio,
    two_proportion_test,
)
from .data import (
    BatterHand,
    Dataset,
    FilterSpec,
    Outcome,
    Pitch,
    PitchType,
    filter_dataset,
    load_csv,
    summary,
    write_csv,
)
from .fit import FitConfig, FitResult, bootstrap_intervals, fit, negative_log_likelihood
from .kernels import BACKEND
from .synth import LabelMode, SynthConfig, generate
from .zone import (
    KBO_ZONE,
    ProbabilityGrid,
    RulebookZone,
    ZoneParams,
    contour,
    derived_metrics,
    grid_difference,
    probability_grid,
    rulebook_call,
    strike_probability,
    superellipse_distance,
)

__all__ = [
    "BACKEND",
    "BatterHand",
    "Dataset",
    "FilterSpec",
    "FitConfig",
    "FitResult",
    "KBO_ZONE",
    "LabelMode",
    "Outcome",
    "Pitch",
    "PitchType",
    "ProbabilityGrid",
    "RatioReport",
    "RulebookZone",
    "SynthConfig",
    "ZoneBand",
    "ZoneParams",
    "bootstrap_intervals",
    "classify_band",
    "contour",
    "decision_pitch_mix",
    "derived_metrics",
    "filter_dataset",
    "fit",
    "generate",
    "grid_difference",
    "hit_attempt_ratio",
    "jeffreys_interval",
    "load_csv",
    "negative_log_likelihood",
    "per_umpire_fits",
    "probability_grid",
    "rulebook_call",
    "strike_probability",
    "strike_ratio",
    "summary",
    "superellipse_distance",
    "two_proportion_test",
    "write_csv",
]
