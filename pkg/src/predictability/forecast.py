"""One-step forecasters and the rolling forecast protocol.

Four strategies are available:

``random_walk``
    the last observation.
``naive``
    the mean of every observation so far.
``auto_ar``
    an autoregression with automatic differencing (KPSS level test) and
    order selection (AICc over least-squares fits). No moving-average or
    seasonal terms.
``lma``
    Lorenz's method of analogues: the successor of the nearest past delay
    vector.

:func:`rolling_forecast` predicts the last ``k`` values of a series one at a
time, appending each observed value (never the prediction) before the next
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import solve_triangular

from .embedding import DelayParams, delay_vectors, estimate_delay_params
from .errors import InsufficientData, InvalidArgument
from .series import TimeSeries

METHODS = ("random_walk", "naive", "auto_ar", "lma")

KPSS_LEVEL_CRITICAL = {0.10: 0.347, 0.05: 0.463, 0.025: 0.574, 0.01: 0.739}
AUTO_AR_MIN_HISTORY = 20


def _as_history(history) -> np.ndarray:
    h = np.asarray(history, dtype=np.float64).reshape(-1)
    if h.size == 0:
        raise InvalidArgument("history is empty")
    return h


def random_walk_step(history) -> float:
    return float(_as_history(history)[-1])


def naive_step(history) -> float:
    return float(np.mean(_as_history(history)))


# -- automatic autoregression ------------------------------------------------

def kpss_lags(length: int) -> int:
    """Bartlett bandwidth ``floor(4 (L/100)^(1/4))``."""
    return int(math.floor(4.0 * (length / 100.0) ** 0.25))


def kpss_level_statistic(values, lags: Optional[int] = None) -> float:
    """KPSS statistic for the null of level stationarity.

    Residuals are deviations from the mean; the long-run variance uses a
    Bartlett window with ``lags`` autocovariances (default :func:`kpss_lags`).
    A constant input returns 0.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if lags is None:
        lags = kpss_lags(n)
    lags = min(int(lags), n - 1)
    e = x - x.mean()
    s2 = float(e @ e) / n
    for s in range(1, lags + 1):
        s2 += 2.0 * (1.0 - s / (lags + 1.0)) * float(e[s:] @ e[:-s]) / n
    if not s2 > 0.0:
        return 0.0
    partial = np.cumsum(e)
    return float(partial @ partial) / (n * n * s2)


@dataclass(frozen=True)
class AutoArFit:
    """Selected autoregression. Coefficients act on the (possibly differenced) data."""

    d: int
    p: int
    intercept: float
    coefficients: tuple
    kpss_statistic: float
    aicc: float
    fallback: bool = False

    def forecast(self, history) -> float:
        h = _as_history(history)
        if self.fallback:
            return naive_step(h)
        y = np.diff(h) if self.d == 1 else h
        yhat = self.intercept
        for i, c in enumerate(self.coefficients, start=1):
            yhat += c * y[-i]
        return float(h[-1] + yhat) if self.d == 1 else float(yhat)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "p": self.p,
            "intercept": self.intercept,
            "coefficients": list(self.coefficients),
            "kpss_statistic": self.kpss_statistic,
            "aicc": self.aicc,
            "fallback": self.fallback,
        }


def _ols_orders(y: np.ndarray, p_max: int):
    """Least-squares AR fits of order 0..p_max on a common sample.

    One QR factorization of the full lag matrix serves every order, since
    the designs are nested. Yields ``(p, intercept, coefs, rss, n_eff)``
    for each order up to the first rank-deficient column.
    """
    n_eff = y.size - p_max
    centre = float(np.mean(y))
    yc = y - centre
    target = yc[p_max:]
    lagged = sliding_window_view(yc, p_max + 1)[:, :-1][:, ::-1] if p_max else np.empty((n_eff, 0))
    X = np.column_stack([np.ones(n_eff), lagged, target])
    # factor [X | y]: the last column of R holds Q'y
    R = np.linalg.qr(X, mode="r")
    qty = R[:-1, -1]
    total = float(target @ target)
    norms = np.sqrt(np.einsum("ij,ij->j", X, X))[:-1]
    for p in range(p_max + 1):
        if abs(R[p, p]) <= 1e-10 * max(norms[p], 1.0):
            break  # collinear lag: this and every larger order is singular
        coef = solve_triangular(R[: p + 1, : p + 1], qty[: p + 1])
        rss = max(total - float(qty[: p + 1] @ qty[: p + 1]), 0.0)
        phis = tuple(float(c) for c in coef[1:])
        intercept = float(coef[0]) + centre * (1.0 - sum(phis))
        yield p, intercept, phis, rss, n_eff


def fit_auto_ar(history, p_max: int = 10, kpss_alpha: float = 0.05,
                d: Optional[int] = None) -> AutoArFit:
    """Choose differencing by KPSS and AR order by AICc, then fit by least squares.

    ``d`` forces the differencing order (0 or 1) instead of testing.
    Histories shorter than 20 samples give a naive-mean fallback fit.
    """
    h = _as_history(history)
    if kpss_alpha not in KPSS_LEVEL_CRITICAL:
        raise InvalidArgument(f"kpss_alpha must be one of {sorted(KPSS_LEVEL_CRITICAL)}")
    if d not in (None, 0, 1):
        raise InvalidArgument("d must be None, 0 or 1")
    if h.size < AUTO_AR_MIN_HISTORY:
        return AutoArFit(0, 0, float(np.mean(h)), (), float("nan"), float("nan"), fallback=True)

    stat = kpss_level_statistic(h)
    if d is None:
        d = 1 if stat > KPSS_LEVEL_CRITICAL[kpss_alpha] else 0
    y = np.diff(h) if d == 1 else h
    # keep at least 2p + 4 fitting rows
    p_top = max(0, min(int(p_max), (y.size - 4) // 3))

    best = None
    for p, c, coefs, rss, n_eff in _ols_orders(y, p_top):
        k = p + 2
        if n_eff - k - 1 <= 0:
            continue
        sigma2 = max(rss / n_eff, np.finfo(float).tiny)
        aicc = n_eff * math.log(sigma2) + 2 * k + 2 * k * (k + 1) / (n_eff - k - 1)
        if best is None or aicc < best[0]:
            best = (aicc, p, c, coefs)
    aicc, p, c, coefs = best
    return AutoArFit(d, p, c, coefs, stat, aicc)


def auto_ar_step(history, p_max: int = 10, kpss_alpha: float = 0.05,
                 d: Optional[int] = None) -> float:
    return fit_auto_ar(history, p_max, kpss_alpha, d).forecast(history)


# -- method of analogues -----------------------------------------------------

@dataclass(frozen=True)
class AnalogueMatch:
    prediction: float
    neighbor: Optional[int]  # 0-based start of the matched delay vector
    distance: float
    fallback: bool = False


def _analogue(x: np.ndarray, vectors: np.ndarray, end: int, tau: int, m: int,
              min_separation: int, visible: Optional[int] = None) -> AnalogueMatch:
    """Match the delay vector ending at ``x[end - 1]`` against earlier ones.

    Only ``x[:end]`` is read: candidates must have a successor inside it.
    ``visible`` further restricts candidates to vectors starting before it.
    """
    span = (m - 1) * tau
    query_start = end - 1 - span
    if query_start < 0:
        return AnalogueMatch(float(x[end - 1]), None, math.inf, fallback=True)
    last = min(query_start - 1, query_start - min_separation)
    if visible is not None:
        last = min(last, visible - 1)
    if last < 0:
        return AnalogueMatch(float(x[end - 1]), None, math.inf, fallback=True)
    diff = vectors[: last + 1] - vectors[query_start]
    d2 = np.einsum("ij,ij->i", diff, diff)
    i = int(np.argmin(d2))  # ties go to the earliest analogue
    return AnalogueMatch(float(x[i + span + 1]), i, math.sqrt(float(d2[i])))


def lma_match(history, tau: int, m: int, min_separation: Optional[int] = None) -> AnalogueMatch:
    h = _as_history(history)
    if min_separation is None:
        min_separation = tau
    if min_separation < 0:
        raise InvalidArgument("min_separation must be nonnegative")
    if h.size < (m - 1) * tau + 2:
        raise InsufficientData(f"LMA with tau={tau}, m={m} needs {(m - 1) * tau + 2} samples")
    return _analogue(h, delay_vectors(h, tau, m), h.size, tau, m, int(min_separation))


def lma_step(history, tau: int, m: int, min_separation: Optional[int] = None) -> float:
    """Successor of the nearest past analogue of the latest delay vector.

    Falls back to the last value when no past vector is eligible.
    """
    return lma_match(history, tau, m, min_separation).prediction


# -- rolling protocol --------------------------------------------------------

@dataclass(frozen=True)
class ForecastTask:
    series: TimeSeries
    method: str
    train_fraction: float = 0.9
    refit_interval: int = 1
    method_config: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "series", TimeSeries.of(self.series))
        if self.method not in METHODS:
            raise InvalidArgument(f"unknown method {self.method!r}; choose from {METHODS}")
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidArgument("train_fraction must lie strictly between 0 and 1")
        if int(self.refit_interval) != self.refit_interval or self.refit_interval < 1:
            raise InvalidArgument("refit_interval must be a positive integer")
        n = self.train_length
        if n < 2 or len(self.series) - n < 1:
            raise InsufficientData(
                f"a {len(self.series)}-sample series split at {self.train_fraction} "
                f"leaves {n} training and {len(self.series) - n} test samples"
            )

    @property
    def train_length(self) -> int:
        # the epsilon keeps e.g. 0.9 * 70 from flooring to 62
        return int(math.floor(self.train_fraction * len(self.series) + 1e-9))

    @property
    def test_length(self) -> int:
        return len(self.series) - self.train_length


@dataclass(frozen=True)
class ForecastRun:
    method: str
    predictions: np.ndarray
    truths: np.ndarray
    train_prefix: np.ndarray
    diagnostics: Dict[str, Any]

    @property
    def n(self) -> int:
        return int(self.train_prefix.size)

    @property
    def k(self) -> int:
        return int(self.truths.size)


def resolve_delay_params(train, config: Dict[str, Any], warnings_out: List[str]) -> DelayParams:
    if "tau" in config and "m" in config:
        return DelayParams(int(config["tau"]), int(config["m"]))
    return estimate_delay_params(
        train,
        max_lag=config.get("max_lag"),
        bins=config.get("bins", 32),
        m_max=config.get("m_max", 10),
        notes=warnings_out,
    )


def rolling_forecast(task: ForecastTask) -> ForecastRun:
    """Predict each test value from everything observed before it."""
    x = task.series.values
    n, k = task.train_length, task.test_length
    cfg = dict(task.method_config)
    preds = np.empty(k)
    steps: List[Dict[str, Any]] = []
    notes: List[str] = []
    diag: Dict[str, Any] = {"refit_interval": task.refit_interval, "warnings": notes}

    if task.method == "random_walk":
        for s in range(k):
            preds[s] = x[n + s - 1]
    elif task.method == "naive":
        running = np.cumsum(x)
        for s in range(k):
            j = n + s
            preds[s] = running[j - 1] / j
    elif task.method == "auto_ar":
        p_max = int(cfg.get("p_max", 10))
        alpha = float(cfg.get("kpss_alpha", 0.05))
        d = cfg.get("d")
        fit = None
        for s in range(k):
            hist = x[: n + s]
            if s % task.refit_interval == 0:
                fit = fit_auto_ar(hist, p_max, alpha, d)
            preds[s] = fit.forecast(hist)
            steps.append({"d": fit.d, "p": fit.p, "fallback": fit.fallback})
    else:
        params = resolve_delay_params(x[:n], cfg, notes)
        diag["delay_params"] = {"tau": params.tau, "m": params.m}
        tau, m = params.tau, params.m
        min_sep = int(cfg.get("min_separation", tau))
        diag["min_separation"] = min_sep
        span = (m - 1) * tau
        vectors = delay_vectors(x[: n + k - 1], tau, m) if n + k - 1 > span else np.empty((0, m))
        library_end = n
        for s in range(k):
            j = n + s
            if s % task.refit_interval == 0:
                library_end = j
            # vectors past the library end are hidden until the next refit
            visible = max(0, library_end - span - 1)
            match = _analogue(x, vectors, j, tau, m, min_sep, visible)
            preds[s] = match.prediction
            steps.append({"neighbor": match.neighbor, "fallback": match.fallback})

    if steps:
        diag["steps"] = steps
        diag["fallbacks"] = int(sum(1 for st in steps if st.get("fallback")))
    return ForecastRun(task.method, preds, x[n:].copy(), x[:n].copy(), diag)

