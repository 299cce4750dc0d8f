"""The WPE-versus-MASE heuristic.

Best-achievable forecast error grows with the entropy of a signal. Fitting
``wpe = a * log2(b * mase + 1)`` to (MASE, WPE) pairs of good forecasts gives
a reference curve through the origin; the envelope of the curves with each
parameter moved by one standard deviation is the acceptance band. A forecast
lying below the band (too much error for how little entropy the signal has)
is leaving predictable structure unused.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import FitDegenerate, InvalidArgument, PredictabilityWarning

LN2 = math.log(2.0)
MAX_ITERATIONS = 200
STEP_TOLERANCE = 1e-9
GRID_B = np.logspace(0.0, 5.0, 101)


class Verdict(str, Enum):
    WELL_MATCHED = "well_matched"
    BETTER_THAN_BAND = "better_than_band"
    UNDEREXPLOITED = "underexploited"
    BEYOND_CAP = "beyond_cap"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class WpeMasePoint:
    mase: float
    wpe: float
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.mase) and self.mase >= 0.0):
            raise InvalidArgument(f"MASE must be finite and nonnegative, got {self.mase}")
        if not (math.isfinite(self.wpe) and 0.0 <= self.wpe <= 1.0):
            raise InvalidArgument(f"WPE must lie in [0, 1], got {self.wpe}")


@dataclass(frozen=True)
class HeuristicFit:
    a: float
    b: float
    sigma_a: float = 0.0
    sigma_b: float = 0.0
    log_base: float = 2.0
    mase_cap: float = 1.0
    residual_norm: Optional[float] = None
    label: str = ""
    iterations: int = field(default=0, compare=False)

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidArgument(f"fit parameters must be positive, got a={self.a}, b={self.b}")
        if self.sigma_a < 0 or self.sigma_b < 0:
            raise InvalidArgument("parameter deviations must be nonnegative")
        if self.log_base != 2.0:
            raise InvalidArgument("only base-2 logarithms are supported")
        if not self.mase_cap > 0:
            raise InvalidArgument("mase_cap must be positive")

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "sigma_a": self.sigma_a,
            "sigma_b": self.sigma_b,
            "log_base": self.log_base,
            "mase_cap": self.mase_cap,
            "residual_norm": self.residual_norm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HeuristicFit":
        try:
            return cls(
                a=float(data["a"]),
                b=float(data["b"]),
                sigma_a=float(data.get("sigma_a", 0.0)),
                sigma_b=float(data.get("sigma_b", 0.0)),
                log_base=float(data.get("log_base", 2.0)),
                mase_cap=float(data.get("mase_cap", 1.0)),
                residual_norm=None if data.get("residual_norm") is None else float(data["residual_norm"]),
                label=str(data.get("label", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"malformed fit document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps({"schema_version": 1, "label": self.label, **self.to_dict()}, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "HeuristicFit":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"fit document is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidArgument("fit document must be a JSON object")
        return cls.from_dict(data)


# deviations are set so the col_major lma and auto_ar means land on opposite
# sides of the band (see README)
REFERENCE_FIT = HeuristicFit(a=7.97e-2, b=1.52e3, sigma_a=0.01, sigma_b=300.0, label="reference fit")


def _curve(a, b, x):
    return a * np.log2(b * x + 1.0)


def curve(fit: HeuristicFit, x):
    """``a * log2(b x + 1)``; scalar in, scalar out."""
    xs = np.asarray(x, dtype=np.float64)
    if np.any(xs < 0):
        raise InvalidArgument("MASE must be nonnegative")
    out = _curve(fit.a, fit.b, xs)
    return float(out) if out.ndim == 0 else out


def band(fit: HeuristicFit, x) -> Tuple[float, float]:
    """Pointwise min and max over the four curves with ``a +- sigma_a``, ``b +- sigma_b``.

    A parameter pushed below zero is clipped to zero, which flattens that
    curve onto the axis.
    """
    if x < 0:
        raise InvalidArgument("MASE must be nonnegative")
    values = [
        _curve(max(a, 0.0), max(b, 0.0), float(x))
        for a in (fit.a - fit.sigma_a, fit.a + fit.sigma_a)
        for b in (fit.b - fit.sigma_b, fit.b + fit.sigma_b)
    ]
    return float(min(values)), float(max(values))


def classify(point: WpeMasePoint, fit: HeuristicFit) -> Verdict:
    if point.mase > fit.mase_cap:
        return Verdict.BEYOND_CAP
    low, high = band(fit, point.mase)
    if point.wpe > high:
        return Verdict.BETTER_THAN_BAND
    if point.wpe < low:
        return Verdict.UNDEREXPLOITED
    return Verdict.WELL_MATCHED


def nonstationarity_flag(rw_mase, tolerance: float = 0.15) -> bool:
    """True when a random-walk MASE strays from 1 by more than ``tolerance``.

    On a stationary signal the random walk scores about the same out of
    sample as in sample, so a large deviation hints at a regime change.
    """
    value = getattr(rw_mase, "value", rw_mase)
    return abs(float(value) - 1.0) > tolerance


# -- fitting -------------------------------------------------------------

def _residuals_and_jacobian(x, y, a, b):
    g = np.log2(b * x + 1.0)
    r = y - a * g
    # d r / d(a, b)
    J = np.column_stack([-g, -a * x / ((b * x + 1.0) * LN2)])
    return r, J


def sse_and_gradient(x, y, a: float, b: float) -> Tuple[float, np.ndarray]:
    """Sum of squared residuals and its analytic gradient in ``(a, b)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    r, J = _residuals_and_jacobian(x, y, a, b)
    return float(r @ r), 2.0 * (J.T @ r)


def _grid_seed(x, y):
    best = None
    for b in GRID_B:
        g = np.log2(b * x + 1.0)
        gg = float(g @ g)
        if gg == 0.0:
            continue
        a = float(g @ y) / gg
        if a <= 0.0:
            continue
        r = y - a * g
        sse = float(r @ r)
        if best is None or sse < best[0]:
            best = (sse, a, float(b))
    if best is None:
        raise FitDegenerate("no positive-slope curve fits the points")
    return best[1], best[2]


def _as_arrays(points) -> Tuple[np.ndarray, np.ndarray]:
    xs, ys = [], []
    for pt in points:
        if not isinstance(pt, WpeMasePoint):
            pt = WpeMasePoint(float(pt[0]), float(pt[1]))
        xs.append(pt.mase)
        ys.append(pt.wpe)
    return np.asarray(xs), np.asarray(ys)


def fit_points(points: Iterable, mase_cap: float = 1.0) -> HeuristicFit:
    """Least-squares fit of ``wpe = a log2(b mase + 1)``.

    Parameters
    ----------
    points : iterable of WpeMasePoint or (mase, wpe) pairs
    mase_cap : float
        Stored on the returned fit; classification treats larger MASE
        values as outside the heuristic's range.

    Returns
    -------
    HeuristicFit
        With parameter standard deviations from ``s^2 (J^T J)^-1``, where
        ``s^2`` is the residual variance with ``n - 2`` degrees of freedom.

    Notes
    -----
    A coarse log-spaced grid over ``b`` (with the optimal ``a`` for each)
    seeds a Levenberg-damped Gauss-Newton iteration that keeps both
    parameters positive. Iteration stops once no parameter moves by more
    than 1e-9 of its value, or after 200 iterations with a
    :class:`~predictability.errors.PredictabilityWarning`.
    """
    x, y = _as_arrays(points)
    if x.size < 3:
        raise FitDegenerate(f"need at least 3 points, got {x.size}")
    if np.all(x == x[0]):
        raise FitDegenerate("all MASE values are equal")
    if np.all(y == y[0]):
        raise FitDegenerate("all WPE values are equal")

    a, b = _grid_seed(x, y)
    r, J = _residuals_and_jacobian(x, y, a, b)
    sse = float(r @ r)
    lam = 1e-3
    iterations = 0
    converged = False
    for iterations in range(1, MAX_ITERATIONS + 1):
        JtJ = J.T @ J
        grad = J.T @ r
        accepted = False
        while lam < 1e20:
            A = JtJ + lam * np.diag(np.diag(JtJ))
            try:
                step = np.linalg.solve(A, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            a_new, b_new = a + step[0], b + step[1]
            if a_new > 0.0 and b_new > 0.0:
                r_new, J_new = _residuals_and_jacobian(x, y, a_new, b_new)
                sse_new = float(r_new @ r_new)
                if sse_new <= sse:
                    accepted = True
                    break
            lam *= 10.0
        if not accepted:
            converged = True  # no descent direction left: at the minimum to rounding
            break
        a, b, r, J, sse = a_new, b_new, r_new, J_new, sse_new
        lam = max(lam / 10.0, 1e-12)
        if max(abs(step[0]) / a, abs(step[1]) / b) < STEP_TOLERANCE:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"curve fit did not settle in {MAX_ITERATIONS} iterations (b = {b:.3g}); "
            "points this flat in WPE pull b toward infinity",
            PredictabilityWarning,
            stacklevel=2,
        )

    dof = x.size - 2
    JtJ = J.T @ J
    if dof > 0:
        try:
            cov = (sse / dof) * np.linalg.inv(JtJ)
            sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        except np.linalg.LinAlgError:
            sig = np.array([math.inf, math.inf])
    else:
        sig = np.zeros(2)
    return HeuristicFit(
        a=float(a),
        b=float(b),
        sigma_a=float(sig[0]),
        sigma_b=float(sig[1]),
        mase_cap=mase_cap,
        residual_norm=math.sqrt(sse),
        iterations=iterations,
    )
