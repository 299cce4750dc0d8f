"""Ordinal patterns, permutation entropy and weighted permutation entropy.

Windows of length ``l`` slide over the series with stride 1. Each window is
mapped to the permutation listing its 1-based positions in ascending value
order; equal values are ordered by position, so a constant window maps to
the identity. Entropies are in bits and normalized by ``log2(l!)``.

Weighted mode weights every window by its variance (population form,
divisor ``l``), so windows dominated by small fluctuations count for little.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, NamedTuple, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InsufficientData, InvalidArgument, PredictabilityWarning
from .series import TimeSeries

PLAIN = "plain"
WEIGHTED = "weighted"
MODES = (PLAIN, WEIGHTED)

MAX_ENCODABLE_LENGTH = 12


@dataclass(frozen=True, order=True)
class OrdinalPattern:
    """Permutation of ``1..l`` giving window positions sorted by value."""

    ranks: Tuple[int, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        if len(ranks) < 2:
            raise InvalidArgument("an ordinal pattern needs at least 2 positions")
        if sorted(ranks) != list(range(1, len(ranks) + 1)):
            raise InvalidArgument(f"{ranks} is not a permutation of 1..{len(ranks)}")
        object.__setattr__(self, "ranks", ranks)

    @property
    def word_length(self) -> int:
        return len(self.ranks)

    def __str__(self) -> str:
        sep = "" if self.word_length < 10 else ","
        return sep.join(str(r) for r in self.ranks)

    @classmethod
    def parse(cls, text: str) -> "OrdinalPattern":
        text = text.strip()
        parts = text.split(",") if "," in text else list(text)
        return cls(tuple(int(p) for p in parts))


@dataclass(frozen=True)
class OrdinalDistribution:
    """Probability mass over the ordinal patterns observed in a series.

    ``degenerate`` is set in weighted mode when every window has zero
    weight (a constant series); ``mass`` is then empty.
    """

    word_length: int
    mode: str
    mass: Dict[OrdinalPattern, float]
    observed_windows: int
    degenerate: bool = False

    @property
    def support_size(self) -> int:
        return len(self.mass)


@dataclass(frozen=True)
class EntropyReport:
    word_length: int
    raw_entropy: float
    normalized: float
    mode: str
    redundancy: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "word_length": self.word_length,
            "raw_entropy": self.raw_entropy,
            "normalized": self.normalized,
            "mode": self.mode,
            "redundancy": self.redundancy,
            "degenerate": self.degenerate,
        }


def _check_word_length(word_length):
    if int(word_length) != word_length or word_length < 2:
        raise InvalidArgument(f"word length must be an integer >= 2, got {word_length!r}")
    if word_length > MAX_ENCODABLE_LENGTH:
        raise InvalidArgument(f"word length above {MAX_ENCODABLE_LENGTH} is not supported")
    return int(word_length)


def ordinal_pattern(window) -> OrdinalPattern:
    """Return the ordinal pattern of a single window.

    >>> str(ordinal_pattern((9, 1, 7)))
    '231'
    """
    arr = np.asarray(window, dtype=np.float64).reshape(-1)
    if arr.size < 2:
        raise InvalidArgument("window must contain at least 2 values")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument("window contains a non-finite value")
    order = np.argsort(arr, kind="stable")
    return OrdinalPattern(tuple(order + 1))


def _pattern_codes(values: np.ndarray, word_length: int):
    windows = sliding_window_view(values, word_length)
    # stable sort gives the earlier-index-first tie rule
    order = np.argsort(windows, axis=1, kind="stable")
    powers = word_length ** np.arange(word_length - 1, -1, -1, dtype=np.int64)
    codes = order.astype(np.int64) @ powers
    return windows, codes


def _decode(code: int, word_length: int) -> OrdinalPattern:
    digits = []
    for _ in range(word_length):
        code, d = divmod(code, word_length)
        digits.append(d + 1)
    return OrdinalPattern(tuple(reversed(digits)))


def window_weights(windows: np.ndarray) -> np.ndarray:
    """Variance of each window, ``(1/l) * sum (x_j - mean)^2``."""
    centred = windows - windows.mean(axis=1, keepdims=True)
    return np.mean(centred * centred, axis=1)


def ordinal_distribution(series, word_length: int, mode: str = PLAIN) -> OrdinalDistribution:
    """Tally the ordinal patterns of all ``N - l + 1`` overlapping windows.

    Parameters
    ----------
    series : TimeSeries or array_like
    word_length : int
        Pattern length ``l`` (>= 2).
    mode : {"plain", "weighted"}
        Plain mode counts windows; weighted mode sums window variances.

    Returns
    -------
    OrdinalDistribution
    """
    series = TimeSeries.of(series)
    word_length = _check_word_length(word_length)
    if mode not in MODES:
        raise InvalidArgument(f"mode must be one of {MODES}, got {mode!r}")
    n = len(series)
    if n < word_length:
        raise InsufficientData(f"series of length {n} is shorter than word length {word_length}")

    windows, codes = _pattern_codes(series.values, word_length)
    n_windows = codes.size
    unique, inverse = np.unique(codes, return_inverse=True)

    if mode == PLAIN:
        counts = np.bincount(inverse, minlength=unique.size)
        probs = counts / n_windows
        degenerate = False
    else:
        weights = window_weights(windows)
        sums = np.bincount(inverse, weights=weights, minlength=unique.size)
        total = float(np.sum(sums))
        degenerate = not total > 0.0
        probs = np.zeros_like(sums) if degenerate else sums / total

    mass = {
        _decode(int(code), word_length): float(p)
        for code, p in zip(unique, probs)
        if p > 0.0
    }
    return OrdinalDistribution(word_length, mode, mass, n_windows, degenerate)


def entropy(dist: OrdinalDistribution) -> EntropyReport:
    """Shannon entropy (bits) of an ordinal distribution, with normalization."""
    max_bits = math.log2(math.factorial(dist.word_length))
    p = np.array([v for v in dist.mass.values() if v > 0.0], dtype=np.float64)
    if dist.degenerate or p.size <= 1:
        raw = 0.0
    else:
        raw = float(-np.sum(p * np.log2(p)))
    raw = min(max(raw, 0.0), max_bits)
    normalized = min(raw / max_bits, 1.0)
    return EntropyReport(
        word_length=dist.word_length,
        raw_entropy=raw,
        normalized=normalized,
        mode=dist.mode,
        redundancy=1.0 - normalized,
        degenerate=dist.degenerate,
    )


def permutation_entropy(series, word_length: int, weighted: bool = True) -> EntropyReport:
    """Convenience wrapper: distribution then entropy."""
    mode = WEIGHTED if weighted else PLAIN
    return entropy(ordinal_distribution(series, word_length, mode))


def select_word_length(n: int, counts_per_ordinal: int = 100, min_length: int = 3,
                       max_length: int = 8) -> int:
    """Largest word length whose patterns get ``counts_per_ordinal`` samples on average.

    Returns ``min_length`` with a :class:`PredictabilityWarning` when even
    that length is not supported by ``n`` samples.
    """
    if max_length > 8:
        raise InvalidArgument("word length is capped at 8")
    if min_length < 2 or min_length > max_length:
        raise InvalidArgument(f"invalid word-length range [{min_length}, {max_length}]")
    if n < min_length:
        raise InsufficientData(f"{n} samples cannot form a window of length {min_length}")
    best = None
    for length in range(min_length, max_length + 1):
        if n >= counts_per_ordinal * math.factorial(length):
            best = length
    if best is None:
        warnings.warn(
            f"{n} samples give fewer than {counts_per_ordinal} counts per ordinal "
            f"at word length {min_length}",
            PredictabilityWarning,
            stacklevel=2,
        )
        return min_length
    return best


class PersistentEntropy(NamedTuple):
    word_length: int
    report: EntropyReport
    converged: bool
    by_length: Dict[int, EntropyReport]


def persistent_wpe(series, tolerance: float = 0.01, weighted: bool = True,
                   counts_per_ordinal: int = 100) -> PersistentEntropy:
    """Increase the word length from 3 until the normalized entropy settles.

    Stops at the first length whose value differs from the previous one by
    less than ``tolerance``. If the data run out first, the largest
    supported length is returned with ``converged=False``.
    """
    series = TimeSeries.of(series)
    n = len(series)
    if n < counts_per_ordinal * math.factorial(3):
        raise InsufficientData(
            f"{n} samples do not support word length 3 "
            f"({counts_per_ordinal * 6} needed)"
        )
    top = select_word_length(n, counts_per_ordinal)
    by_length = {}
    previous = None
    for length in range(3, top + 1):
        report = permutation_entropy(series, length, weighted=weighted)
        by_length[length] = report
        if previous is not None and abs(report.normalized - previous.normalized) < tolerance:
            return PersistentEntropy(length, report, True, by_length)
        previous = report
    return PersistentEntropy(top, by_length[top], False, by_length)
