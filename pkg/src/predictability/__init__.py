"""Predictability profiling of time series.

Weighted permutation entropy measures how much structure a signal has;
rolling one-step forecasts scored by MASE measure how much of it a given
method uses. A fitted WPE-versus-MASE curve relates the two.
"""

from .embedding import DelayParams, embed, estimate_delay_params, false_nearest_neighbors, mutual_information_curve
from .errors import (
    FitDegenerate,
    InsufficientData,
    InvalidArgument,
    PredictabilityError,
    PredictabilityWarning,
    TraceFormatError,
    UndefinedScale,
)
from .forecast import METHODS, ForecastRun, ForecastTask, rolling_forecast
from .heuristic import REFERENCE_FIT, HeuristicFit, Verdict, WpeMasePoint, band, classify, curve, fit_points
from .metrics import MaseScore, mase, trial_stats
from .ordinal import (
    EntropyReport,
    OrdinalPattern,
    ordinal_distribution,
    ordinal_pattern,
    permutation_entropy,
    persistent_wpe,
    select_word_length,
)
from .pipeline import ProfileConfig, ProfileReport, aggregate, profile, profile_many
from .series import TimeSeries
from .signals import GeneratorSpec, generate
from .tracefile import read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "DelayParams",
    "EntropyReport",
    "FitDegenerate",
    "ForecastRun",
    "ForecastTask",
    "GeneratorSpec",
    "HeuristicFit",
    "InsufficientData",
    "InvalidArgument",
    "METHODS",
    "MaseScore",
    "OrdinalPattern",
    "PredictabilityError",
    "PredictabilityWarning",
    "ProfileConfig",
    "ProfileReport",
    "REFERENCE_FIT",
    "TimeSeries",
    "TraceFormatError",
    "UndefinedScale",
    "Verdict",
    "WpeMasePoint",
    "aggregate",
    "band",
    "classify",
    "curve",
    "embed",
    "estimate_delay_params",
    "false_nearest_neighbors",
    "fit_points",
    "generate",
    "mase",
    "mutual_information_curve",
    "ordinal_distribution",
    "ordinal_pattern",
    "permutation_entropy",
    "persistent_wpe",
    "profile",
    "profile_many",
    "read_trace",
    "rolling_forecast",
    "select_word_length",
    "trial_stats",
    "write_trace",
]
