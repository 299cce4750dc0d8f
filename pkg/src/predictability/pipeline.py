"""End-to-end predictability profile of one or many series."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from .embedding import DelayParams
from .errors import InvalidArgument, PredictabilityError, UndefinedScale
from .forecast import METHODS, ForecastTask, rolling_forecast
from .heuristic import REFERENCE_FIT, HeuristicFit, Verdict, WpeMasePoint, classify, nonstationarity_flag
from .metrics import MaseScore, mase, trial_stats
from .ordinal import EntropyReport, persistent_wpe
from .series import TimeSeries

THREADS_ENV = "PREDICTABILITY_THREADS"


@dataclass(frozen=True)
class ProfileConfig:
    train_fraction: float = 0.9
    refit_interval: int = 1
    wpe_tolerance: float = 0.01
    nonstationarity_tolerance: float = 0.15
    method_config: Dict[str, Dict[str, Any]] = field(default_factory=dict)


@dataclass(frozen=True)
class MethodResult:
    method: str
    mase: Optional[MaseScore]
    verdict: Optional[Verdict]
    warnings: List[str] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "mase": None if self.mase is None else self.mase.as_dict(),
            "verdict": None if self.verdict is None else self.verdict.value,
            "warnings": list(self.warnings),
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class ProfileReport:
    label: str
    wpe: EntropyReport
    wpe_converged: bool
    methods: Dict[str, MethodResult]
    delay_params: Optional[DelayParams]
    nonstationary: Optional[bool]
    fit: HeuristicFit
    warnings: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "wpe": {**self.wpe.as_dict(), "converged": self.wpe_converged},
            "methods": {name: r.as_dict() for name, r in self.methods.items()},
            "delay_params": None
            if self.delay_params is None
            else {"tau": self.delay_params.tau, "m": self.delay_params.m},
            "nonstationary": self.nonstationary,
            "fit": {"label": self.fit.label, **self.fit.to_dict()},
            "warnings": list(self.warnings),
        }


def _run_method(series: TimeSeries, method: str, wpe: float, fit: HeuristicFit,
                config: ProfileConfig) -> MethodResult:
    notes: List[str] = []
    try:
        task = ForecastTask(
            series,
            method,
            train_fraction=config.train_fraction,
            refit_interval=config.refit_interval,
            method_config=dict(config.method_config.get(method, {})),
        )
        run = rolling_forecast(task)
        notes.extend(run.diagnostics.get("warnings", []))
        if run.diagnostics.get("fallbacks"):
            notes.append(f"{run.diagnostics['fallbacks']} step(s) fell back to a simpler predictor")
    except PredictabilityError as exc:
        return MethodResult(method, None, None, [f"{method}: {exc}"])
    try:
        score = mase(run)
    except UndefinedScale as exc:
        notes.append(f"{method}: undefined MASE scale: {exc}")
        return MethodResult(method, None, None, notes, run.diagnostics)
    verdict = classify(WpeMasePoint(score.value, wpe, series.name or ""), fit)
    return MethodResult(method, score, verdict, notes, run.diagnostics)


def profile(series, methods: Iterable[str] = METHODS, fit: HeuristicFit = REFERENCE_FIT,
            config: Optional[ProfileConfig] = None, label: Optional[str] = None) -> ProfileReport:
    """WPE, rolling forecasts, MASE and heuristic verdicts for one series.

    WPE is computed on the whole series (test segment included). Method
    failures become warnings on that method; only a series too short for
    any entropy estimate raises.
    """
    series = TimeSeries.of(series)
    config = config or ProfileConfig()
    requested = list(dict.fromkeys(methods))
    unknown = [m for m in requested if m not in METHODS]
    if unknown:
        raise InvalidArgument(f"unknown method(s): {unknown}")
    label = label if label is not None else (series.name or "")

    notes: List[str] = []
    pwpe = persistent_wpe(series, tolerance=config.wpe_tolerance)
    if not pwpe.converged:
        notes.append(f"WPE did not converge; reporting word length {pwpe.word_length}")
    if pwpe.report.degenerate:
        notes.append("series is constant: WPE is 0 by convention")
    wpe = pwpe.report.normalized

    results = {m: _run_method(series, m, wpe, fit, config) for m in requested}

    delay = None
    if "lma" in results:
        dp = results["lma"].diagnostics.get("delay_params")
        if dp:
            delay = DelayParams(dp["tau"], dp["m"])
    nonstationary = None
    rw = results.get("random_walk")
    if rw is not None and rw.mase is not None:
        nonstationary = nonstationarity_flag(rw.mase, config.nonstationarity_tolerance)
        if nonstationary:
            notes.append(f"random-walk MASE {rw.mase.value:.6g} suggests nonstationarity")
    for r in results.values():
        notes.extend(r.warnings)
    return ProfileReport(label, pwpe.report, pwpe.converged, results, delay, nonstationary, fit, notes)


def thread_count() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise InvalidArgument(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 0:
        raise InvalidArgument(f"{THREADS_ENV} must be >= 0")
    return n or None


def profile_many(items: Sequence, threads: Optional[int] = None, **kwargs) -> List[ProfileReport]:
    """Profile several series concurrently; results keep the input order.

    ``items`` holds series or ``(label, series)`` pairs.
    """
    def one(item):
        if isinstance(item, tuple):
            lab, s = item
            return profile(s, label=lab, **kwargs)
        return profile(item, **kwargs)

    if threads == 1 or len(items) <= 1:
        return [one(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, items))


@dataclass(frozen=True)
class AggregateRow:
    group: str
    trials: int
    wpe_mean: float
    wpe_std: float
    mase: Dict[str, Optional[tuple]]  # method -> (mean, std, scored trials)

    def as_dict(self) -> dict:
        return {
            "group": self.group,
            "trials": self.trials,
            "wpe_mean": self.wpe_mean,
            "wpe_std": self.wpe_std,
            "mase": {
                m: None if v is None else {"mean": v[0], "std": v[1], "scored": v[2]}
                for m, v in self.mase.items()
            },
        }


def aggregate(reports: Sequence[ProfileReport],
              key: Callable[[ProfileReport], str] = lambda r: r.label) -> List[AggregateRow]:
    """Mean and sample deviation of WPE and each method's MASE per group.

    Groups appear in order of first occurrence. Trials whose MASE is
    undefined are left out of that method's statistics.
    """
    groups: Dict[str, List[ProfileReport]] = {}
    for r in reports:
        groups.setdefault(key(r), []).append(r)
    if not groups:
        raise InvalidArgument("nothing to aggregate")
    rows = []
    for name, members in groups.items():
        w_mean, w_std = trial_stats(r.wpe.normalized for r in members)
        methods = list(dict.fromkeys(m for r in members for m in r.methods))
        stats = {}
        for m in methods:
            scores = [r.methods[m].mase for r in members if m in r.methods and r.methods[m].mase is not None]
            stats[m] = (*trial_stats(scores), len(scores)) if scores else None
        rows.append(AggregateRow(name, len(members), w_mean, w_std, stats))
    return rows


def render_table(rows: Sequence[AggregateRow]) -> str:
    """Plain-text table, one row per group, 6 significant digits."""
    methods = list(dict.fromkeys(m for r in rows for m in r.mase))
    header = ["signal"] + [f"{m} MASE" for m in methods] + ["WPE"]
    lines = [header]
    for r in rows:
        cells = [r.group]
        for m in methods:
            v = r.mase.get(m)
            cells.append("undefined" if v is None else f"{v[0]:.6g} ± {v[1]:.6g}")
        cells.append(f"{r.wpe_mean:.6g} ± {r.wpe_std:.6g}")
        lines.append(cells)
    widths = [max(len(row[i]) for row in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in lines)
