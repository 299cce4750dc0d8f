"""Delay-coordinate embedding: lag selection, dimension selection, windowing.

The lag comes from the first local minimum of the time-delayed mutual
information (histogram estimate, equal-width bins over the series range);
the dimension from the false-nearest-neighbor test of Kennel, Brown and
Abarbanel. Distances are Euclidean and neighbor searches are exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import InsufficientData, InvalidArgument, PredictabilityWarning
from .series import TimeSeries


@dataclass(frozen=True)
class DelayParams:
    tau: int
    m: int
    tau_curve: Optional[Tuple[Tuple[int, float], ...]] = None
    fnn_curve: Optional[Tuple[Tuple[int, float], ...]] = None

    def __post_init__(self):
        if int(self.tau) != self.tau or self.tau < 1:
            raise InvalidArgument(f"tau must be a positive integer, got {self.tau!r}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgument(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "tau", int(self.tau))
        object.__setattr__(self, "m", int(self.m))

    def span(self) -> int:
        """Number of samples covered by one delay vector."""
        return (self.m - 1) * self.tau + 1


@dataclass(frozen=True)
class EmbeddedSeries:
    """Delay vectors of a series.

    ``source_index[k]`` is the 0-based offset into the series values of the
    first coordinate of ``points[k]``.
    """

    points: np.ndarray
    source_index: np.ndarray
    params: DelayParams

    def __len__(self):
        return int(self.points.shape[0])


@dataclass(frozen=True)
class MutualInformationCurve:
    lags: np.ndarray
    bits: np.ndarray
    bins: int
    degenerate: bool = False

    def __iter__(self):
        return iter(zip(self.lags.tolist(), self.bits.tolist()))

    def __len__(self):
        return int(self.lags.size)


@dataclass(frozen=True)
class FnnResult:
    m: int
    curve: Tuple[Tuple[int, float], ...]
    converged: bool


def delay_vectors(values: np.ndarray, tau: int, m: int) -> np.ndarray:
    """Rows ``(x_i, x_{i+tau}, ..., x_{i+(m-1)tau})`` for every valid ``i``."""
    count = values.size - (m - 1) * tau
    if count < 1:
        raise InsufficientData(
            f"{values.size} samples are too few for tau={tau}, m={m}"
        )
    idx = np.arange(count)[:, None] + tau * np.arange(m)[None, :]
    return values[idx]


def embed(series, params: DelayParams) -> EmbeddedSeries:
    series = TimeSeries.of(series)
    points = delay_vectors(series.values, params.tau, params.m)
    return EmbeddedSeries(points, np.arange(points.shape[0]), params)


def _bin_indices(values: np.ndarray, bins: int):
    lo, hi = float(values.min()), float(values.max())
    if not hi > lo:
        return None
    idx = np.floor((values - lo) / (hi - lo) * bins).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def _entropy_bits(counts: np.ndarray) -> float:
    c = counts[counts > 0].astype(np.float64)
    p = c / c.sum()
    return float(-np.sum(p * np.log2(p)))


def mutual_information_curve(series, max_lag: int, bins: int = 32,
                             include_zero: bool = False) -> MutualInformationCurve:
    """Histogram estimate of ``I(x_t; x_{t+lag})`` in bits for ``lag = 1..max_lag``.

    Both axes share the same ``bins`` equal-width bins spanning the series'
    minimum to maximum. A constant series yields an all-zero curve flagged
    as degenerate.
    """
    series = TimeSeries.of(series)
    x = series.values
    n = x.size
    if int(bins) != bins or bins < 2:
        raise InvalidArgument(f"bins must be an integer >= 2, got {bins!r}")
    if int(max_lag) != max_lag or max_lag < 1 or not max_lag < n / 2:
        raise InvalidArgument(f"max_lag must satisfy 1 <= max_lag < N/2 = {n / 2}, got {max_lag!r}")
    first = 0 if include_zero else 1
    lags = np.arange(first, int(max_lag) + 1)
    idx = _bin_indices(x, bins)
    if idx is None:
        return MutualInformationCurve(lags, np.zeros(lags.size), bins, degenerate=True)

    bits = np.empty(lags.size)
    for k, lag in enumerate(lags):
        a = idx[: n - lag]
        b = idx[lag:]
        joint = np.bincount(a * bins + b, minlength=bins * bins)
        h_a = _entropy_bits(np.bincount(a, minlength=bins))
        h_b = _entropy_bits(np.bincount(b, minlength=bins))
        bits[k] = max(h_a + h_b - _entropy_bits(joint), 0.0)
    return MutualInformationCurve(lags, bits, bins)


def shuffle_baseline(series, bins: int = 32, trials: int = 8, seed: int = 0) -> Tuple[float, float]:
    """Mean and standard deviation of the histogram MI between the series and
    seeded random permutations of itself: the estimator's independence level."""
    series = TimeSeries.of(series)
    x = series.values
    idx = _bin_indices(x, bins)
    if idx is None:
        return 0.0, 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    h = _entropy_bits(np.bincount(idx, minlength=bins))
    vals = []
    for _ in range(trials):
        b = rng.permutation(idx)
        vals.append(max(2.0 * h - _entropy_bits(np.bincount(idx * bins + b, minlength=bins * bins)), 0.0))
    return float(np.mean(vals)), float(np.std(vals))


def truncate_at_noise_floor(curve: MutualInformationCurve, floor: float) -> MutualInformationCurve:
    """Drop every lag from the first one whose MI is at or below ``floor``.

    Once the curve reaches the independence level any later dip is
    estimation noise, not a decorrelation minimum.
    """
    below = np.flatnonzero(curve.bits <= floor)
    if below.size == 0:
        return curve
    cut = max(int(below[0]), 1)
    return MutualInformationCurve(curve.lags[:cut], curve.bits[:cut], curve.bins, curve.degenerate)


def _first_minimum(curve) -> Optional[int]:
    pairs = [(int(lag), float(v)) for lag, v in curve]
    if not pairs:
        raise InvalidArgument("mutual-information curve is empty")
    for k in range(1, len(pairs) - 1):
        if pairs[k - 1][1] > pairs[k][1] < pairs[k + 1][1]:
            return pairs[k][0]
    return None


def select_tau(curve: Iterable[Tuple[int, float]]) -> int:
    """Lag of the first interior local minimum of a mutual-information curve.

    Falls back to lag 1, with a warning, when the curve has no interior
    minimum.
    """
    tau = _first_minimum(curve)
    if tau is not None:
        return tau
    warnings.warn("mutual-information curve has no interior minimum; using tau=1",
                  PredictabilityWarning, stacklevel=2)
    return 1


def _nearest_eligible(tree: cKDTree, points: np.ndarray, min_separation: int):
    """Index of and distance to each point's nearest neighbor at least
    ``min_separation`` samples away in time (never itself)."""
    sep = max(int(min_separation), 1)
    count = points.shape[0]
    # at most 2*sep - 1 points (self included) fall inside the exclusion window
    k = min(2 * sep, count)
    dist, nbr = tree.query(points, k=k)
    if k == 1:
        dist, nbr = dist[:, None], nbr[:, None]
    ok = np.abs(nbr - np.arange(count)[:, None]) >= sep
    ok &= nbr < count
    has = ok.any(axis=1)
    col = np.argmax(ok, axis=1)
    rows = np.arange(count)
    return nbr[rows, col], dist[rows, col], has


def false_nearest_neighbors(series, tau: int, m_max: int = 10, r_tol: float = 15.0,
                            a_tol: float = 2.0, threshold: float = 0.01,
                            min_separation: Optional[int] = None, warn: bool = True) -> FnnResult:
    """Embedding dimension by the false-nearest-neighbor test.

    For each ``m`` in ``1..m_max`` the nearest neighbor of every delay
    vector is found in dimension ``m``; the pair is false when the added
    coordinate separates them by more than ``r_tol`` times their distance,
    or when their distance in dimension ``m + 1`` exceeds ``a_tol`` times
    the series standard deviation. Neighbors closer than ``min_separation``
    samples in time (default ``tau``) are skipped.

    Returns the smallest ``m`` whose false fraction is below ``threshold``,
    or ``m_max`` with ``converged=False``.
    """
    series = TimeSeries.of(series)
    x = series.values
    n = x.size
    if int(tau) != tau or tau < 1:
        raise InvalidArgument(f"tau must be a positive integer, got {tau!r}")
    if m_max < 1:
        raise InvalidArgument("m_max must be >= 1")
    if n - (m_max - 1) * tau < 50 or n - m_max * tau < 2:
        raise InsufficientData(
            f"{n} samples are too few for tau={tau}, m_max={m_max}"
        )
    sep = tau if min_separation is None else int(min_separation)
    scale = float(np.std(x))
    # distances this small are rounding noise, not geometry
    floor = 1e-10 * scale

    curve = []
    for m in range(1, m_max + 1):
        count = n - m * tau
        pts = delay_vectors(x, tau, m)[:count]
        tree = cKDTree(pts)
        nbr, dist, has = _nearest_eligible(tree, pts, sep)
        i = np.arange(count)[has]
        j = nbr[has]
        d = dist[has]
        if i.size == 0:
            raise InsufficientData("no neighbor pairs satisfy the temporal separation")
        gap = np.abs(x[i + m * tau] - x[j + m * tau])
        lifted = np.sqrt(d * d + gap * gap)
        false_ratio = (gap > r_tol * d) & (gap > floor)
        false_size = lifted > a_tol * scale if scale > 0 else np.zeros(i.size, bool)
        frac = float(np.mean(false_ratio | false_size))
        curve.append((m, frac))
        if frac < threshold:
            return FnnResult(m, tuple(curve), True)
    if warn:
        warnings.warn(f"false-neighbor fraction never fell below {threshold}; using m={m_max}",
                      PredictabilityWarning, stacklevel=2)
    return FnnResult(m_max, tuple(curve), False)


def fnn_curve(series, tau: int, m_max: int = 10, **kwargs) -> Tuple[Tuple[int, float], ...]:
    """The full false-neighbor curve for ``m = 1..m_max`` (no early stop)."""
    return false_nearest_neighbors(series, tau, m_max, threshold=-1.0, warn=False, **kwargs).curve


def estimate_delay_params(series, max_lag: Optional[int] = None, bins: int = 32,
                          m_max: int = 10, notes: Optional[List[str]] = None) -> DelayParams:
    """Estimate ``(tau, m)`` from mutual information and false neighbors.

    The mutual-information curve is cut where it first reaches the
    shuffled-pair noise floor (mean + 3 sd) before its first minimum is
    sought. Fallbacks are appended to ``notes`` when given, otherwise
    issued as warnings.
    """
    series = TimeSeries.of(series)
    n = len(series)
    if max_lag is None:
        max_lag = max(1, min(100, (n - 1) // 2 - 1, n // 10))
    mi = mutual_information_curve(series, max_lag, bins)
    mean, sd = shuffle_baseline(series, bins)
    found = _first_minimum(truncate_at_noise_floor(mi, mean + 3.0 * sd))
    messages = []
    if found is None:
        messages.append("mutual-information curve has no interior minimum above the noise floor; using tau=1")
    tau = found or 1
    # shrink the dimension search so at least 50 vectors survive
    m_max = max(1, min(m_max, (n - 50) // tau + 1, (n - 2) // tau))
    fnn = false_nearest_neighbors(series, tau, m_max, warn=False)
    if not fnn.converged:
        messages.append(f"false-neighbor fraction never fell below 0.01; using m={fnn.m}")
    if notes is None:
        for msg in messages:
            warnings.warn(msg, PredictabilityWarning, stacklevel=2)
    else:
        notes.extend(messages)
    return DelayParams(tau, fnn.m, tuple(mi), fnn.curve)
