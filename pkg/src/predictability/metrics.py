"""Mean absolute scaled error and across-trial summaries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .errors import InvalidArgument, UndefinedScale


@dataclass(frozen=True)
class MaseScore:
    """MASE of a forecast run.

    ``value = numerator / (k * denominator_scale)``, where ``denominator_scale``
    is the mean absolute one-step change over the training prefix, i.e. the
    in-sample error of a random-walk forecast.
    """

    value: float
    numerator: float
    denominator_scale: float
    n: int
    k: int

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "numerator": self.numerator,
            "denominator_scale": self.denominator_scale,
            "n": self.n,
            "k": self.k,
        }


def mase_from_arrays(train, predictions, truths) -> MaseScore:
    train = np.asarray(train, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    c = np.asarray(truths, dtype=np.float64)
    if train.size < 2:
        raise InvalidArgument("MASE needs at least 2 training values")
    if p.shape != c.shape or p.size == 0:
        raise InvalidArgument("predictions and truths must be non-empty and equally long")
    scale = float(np.mean(np.abs(np.diff(train))))
    if scale == 0.0:
        raise UndefinedScale("training signal is constant: random-walk scale is zero")
    numerator = float(np.sum(np.abs(p - c)))
    k = int(c.size)
    return MaseScore(numerator / (k * scale), numerator, scale, int(train.size), k)


def mase(run) -> MaseScore:
    """MASE of a :class:`~predictability.forecast.ForecastRun`.

    Values below 1 beat an in-sample random walk on average.

    Raises
    ------
    UndefinedScale
        If every first difference of the training prefix is zero.
    """
    return mase_from_arrays(run.train_prefix, run.predictions, run.truths)


def trial_stats(scores: Iterable) -> Tuple[float, float]:
    """Sample mean and sample standard deviation (n - 1 divisor) of scores.

    Accepts :class:`MaseScore` objects or plain numbers. A single score has
    deviation 0.
    """
    values = [s.value if isinstance(s, MaseScore) else float(s) for s in scores]
    if not values:
        raise InvalidArgument("trial_stats needs at least one score")
    arr = np.asarray(values)
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(np.mean(arr)), float(np.std(arr, ddof=1))

