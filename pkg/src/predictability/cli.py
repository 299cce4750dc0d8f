"""Command-line front end.

Exit status is 0 on success, 1 on a usage error and 2 when the input data
cannot be read or processed. JSON output carries ``schema_version`` and
renders floats with 17 significant digits; human-readable output uses 6.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import jsonout
from .embedding import estimate_delay_params
from .errors import InvalidArgument, PredictabilityError
from .forecast import METHODS, ForecastTask, rolling_forecast
from .heuristic import REFERENCE_FIT, HeuristicFit, WpeMasePoint, classify, fit_points
from .metrics import mase
from .ordinal import permutation_entropy, persistent_wpe
from .pipeline import ProfileConfig, aggregate, profile_many, render_table, thread_count
from .signals import DEFAULT_PARAMS, KINDS, GeneratorSpec, generate
from .tracefile import TraceFormatError, format_trace, parse_csv, read_trace, write_trace

PROG = "predictability"
KIND_PARAMS = sorted({name for params in DEFAULT_PARAMS.values() for name in params})


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def g6(x) -> str:
    return "nan" if x is None else f"{x:.6g}"


def g17(x: float) -> str:
    return format(float(x), ".17g")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _trace(args, path):
    return read_trace(path, fmt=args.format, column=args.column)


def _add_trace_options(p):
    p.add_argument("--format", choices=("plain", "csv"), default=None,
                   help="trace format (default: csv for *.csv, else plain)")
    p.add_argument("--column", default=None,
                   help="CSV column name or 0-based index (default: 0)")


def _load_fit(path: Optional[str]) -> HeuristicFit:
    if path is None or path == "reference":
        return REFERENCE_FIT
    try:
        return HeuristicFit.from_json(Path(path).read_text())
    except InvalidArgument as exc:
        raise DataError(f"{path}: {exc}") from exc


# -- subcommands ----------------------------------------------------------

def cmd_wpe(args) -> int:
    series = _trace(args, args.file)
    weighted = not args.plain_pe
    if args.word_length is not None:
        report = permutation_entropy(series, args.word_length, weighted=weighted)
        converged, by_length = None, {args.word_length: report}
    else:
        result = persistent_wpe(series, weighted=weighted)
        report, converged, by_length = result.report, result.converged, result.by_length
    if args.json:
        payload = {
            "file": str(args.file),
            "n": len(series),
            **report.as_dict(),
            "converged": converged,
            "by_length": [r.as_dict() for _, r in sorted(by_length.items())],
        }
        sys.stdout.write(jsonout.document("entropy_report", payload) + "\n")
        return 0
    lines = [
        f"file          {args.file}",
        f"n             {len(series)}",
        f"mode          {report.mode}",
        f"word_length   {report.word_length}",
        f"entropy_bits  {g6(report.raw_entropy)}",
        f"normalized    {g6(report.normalized)}",
        f"redundancy    {g6(report.redundancy)}",
    ]
    if converged is not None:
        lines.append(f"converged     {'yes' if converged else 'no'}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_embed_params(args) -> int:
    series = _trace(args, args.file)
    notes: List[str] = []
    params = estimate_delay_params(series, max_lag=args.max_lag, bins=args.bins,
                                   m_max=args.m_max, notes=notes)
    for note in notes:
        print(f"{PROG}: warning: {note}", file=sys.stderr)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity", "index", "value"])
    w.writerow(["tau", "", params.tau])
    w.writerow(["m", "", params.m])
    for lag, bits in params.tau_curve:
        w.writerow(["mutual_information", lag, g17(bits)])
    for m, frac in params.fnn_curve:
        w.writerow(["false_neighbors", m, g17(frac)])
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_forecast(args) -> int:
    series = _trace(args, args.file)
    config = {}
    if args.tau is not None:
        config["tau"] = args.tau
    if args.m is not None:
        config["m"] = args.m
    task = ForecastTask(series, args.method, train_fraction=args.train_fraction,
                        refit_interval=args.refit_interval, method_config=config)
    run = rolling_forecast(task)
    for note in run.diagnostics.get("warnings", []):
        print(f"{PROG}: warning: {note}", file=sys.stderr)
    score = mase(run)
    if args.json:
        payload = {
            "file": str(args.file),
            "method": run.method,
            "n": run.n,
            "k": run.k,
            "mase": score.as_dict(),
            "predictions": run.predictions,
            "truths": run.truths,
            "diagnostics": run.diagnostics,
        }
        sys.stdout.write(jsonout.document("forecast_run", payload) + "\n")
        return 0
    lines = [
        f"file    {args.file}",
        f"method  {run.method}",
        f"n       {run.n}",
        f"k       {run.k}",
        f"MASE    {g6(score.value)}",
        "",
        "step  prediction  truth",
    ]
    for i, (p, c) in enumerate(zip(run.predictions, run.truths), start=1):
        lines.append(f"{i}  {g6(p)}  {g6(c)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def group_of(label: str) -> str:
    """Strip a trailing trial suffix (``-seed3``, ``_07``) so trials aggregate together."""
    return re.sub(r"[-_](?:seed|trial|run)?\d+$", "", label) or label


def _methods(text: str) -> List[str]:
    if text == "all":
        return list(METHODS)
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in METHODS]
    if bad or not names:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)} or 'all'")
    return names


def cmd_profile(args) -> int:
    methods = _methods(args.methods)
    fit = _load_fit(args.fit)
    items = [(Path(f).stem, _trace(args, f)) for f in args.files]
    threads = args.threads if args.threads is not None else thread_count()
    config = ProfileConfig(train_fraction=args.train_fraction, refit_interval=args.refit_interval)
    reports = profile_many(items, threads=threads, methods=methods, fit=fit, config=config)
    rows = aggregate(reports, key=lambda r: group_of(r.label))

    if args.json:
        payload = {
            "reports": [{"file": str(f), **r.as_dict()} for f, r in zip(args.files, reports)],
            "aggregate": [row.as_dict() for row in rows],
        }
        sys.stdout.write(jsonout.document("profile", payload) + "\n")
        return 0
    if args.csv:
        sys.stdout.write(_scatter_csv(
            (r.label, r.wpe.normalized, name, res.mase.value if res.mase else None,
             res.verdict.value if res.verdict else "")
            for r in reports for name, res in r.methods.items()
        ))
        return 0
    out = []
    for f, r in zip(args.files, reports):
        out.append(f"{r.label}: WPE {g6(r.wpe.normalized)} (word length {r.wpe.word_length})")
        for name, res in r.methods.items():
            if res.mase is None:
                out.append(f"  {name:<12} MASE undefined")
            else:
                out.append(f"  {name:<12} MASE {g6(res.mase.value):<10} {res.verdict.value}")
        if r.nonstationary is not None:
            out.append(f"  nonstationary {'yes' if r.nonstationary else 'no'}")
        for note in r.warnings:
            out.append(f"  warning: {note}")
    out.append("")
    out.append(render_table(rows))
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def _read_points(path) -> List[WpeMasePoint]:
    text = Path(path).read_text()
    first = next((ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")), "")
    header = [c.strip() for c in first.split(",")]
    has_header = "mase" in header and "wpe" in header
    xs = parse_csv(text, "mase" if has_header else 0, path)
    ys = parse_csv(text, "wpe" if has_header else 1, path)
    try:
        return [WpeMasePoint(x, y) for x, y in zip(xs, ys)]
    except InvalidArgument as exc:
        raise DataError(f"{path}: {exc}") from exc


def _fit_document(fit: HeuristicFit) -> str:
    return jsonout.document("heuristic_fit", {"label": fit.label, **fit.to_dict()}) + "\n"


def cmd_fit(args) -> int:
    if args.reference:
        fit = REFERENCE_FIT
    elif args.points is None:
        raise UsageError("fit needs a points file or --reference")
    else:
        fit = fit_points(_read_points(args.points), mase_cap=args.mase_cap)
    _emit(_fit_document(fit), args.out)
    if args.out not in (None, "-"):
        print(f"a = {g6(fit.a)} ± {g6(fit.sigma_a)}, b = {g6(fit.b)} ± {g6(fit.sigma_b)}")
    return 0


def cmd_classify(args) -> int:
    fit = _load_fit(args.fit)
    try:
        point = WpeMasePoint(args.mase, args.wpe)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from exc
    print(classify(point, fit).value)
    return 0


def cmd_gen(args) -> int:
    given = {name: getattr(args, f"p_{name}") for name in KIND_PARAMS
             if getattr(args, f"p_{name}") is not None}
    foreign = sorted(set(given) - set(DEFAULT_PARAMS[args.kind]))
    if foreign:
        raise UsageError(f"{args.kind} does not take parameter(s) {', '.join('--' + f for f in foreign)}")
    try:
        spec = GeneratorSpec(args.kind, args.length, seed=args.seed, params=given,
                             transient_discard=args.transient_discard)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from exc
    series = generate(spec)
    comment = f"{args.kind} length={args.length} seed={args.seed}"
    if given:
        comment += " " + " ".join(f"{k}={v!r}" for k, v in sorted(given.items()))
    if args.out is None or args.out == "-":
        sys.stdout.write(format_trace(series, comment))
    else:
        write_trace(args.out, series, comment)
    return 0


def _scatter_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mase", "wpe", "method", "label", "verdict"])
    for label, wpe, method, value, verdict in rows:
        w.writerow(["" if value is None else g17(value), g17(wpe), method, label, verdict])
    return buf.getvalue()


def cmd_scatter(args) -> int:
    rows = []
    for path in args.reports:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{exc.lineno}: not valid JSON: {exc.msg}") from exc
        reports = doc.get("reports") if isinstance(doc, dict) else None
        if not isinstance(reports, list):
            raise DataError(f"{path}: not a profile report (run `profile --json`)")
        for r in reports:
            try:
                wpe = r["wpe"]["normalized"]
                for name, res in r["methods"].items():
                    value = None if res["mase"] is None else res["mase"]["value"]
                    rows.append((r["label"], wpe, name, value, res["verdict"] or ""))
            except (KeyError, TypeError) as exc:
                raise DataError(f"{path}: malformed report entry: {exc}") from exc
    _emit(_scatter_csv(rows), args.out)
    return 0


# -- parser ---------------------------------------------------------------

def build_parser() -> Parser:
    parser = Parser(prog=PROG, description="Predictability profiling of time series.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("wpe", help="permutation entropy of a trace")
    p.add_argument("file")
    p.add_argument("--word-length", type=int, default=None,
                   help="fixed word length (default: grow until the value settles)")
    p.add_argument("--plain-pe", action="store_true", help="unweighted permutation entropy")
    p.add_argument("--json", action="store_true")
    _add_trace_options(p)
    p.set_defaults(func=cmd_wpe)

    p = sub.add_parser("embed-params", help="delay and dimension estimates with diagnostic curves")
    p.add_argument("file")
    p.add_argument("--max-lag", type=int, default=None)
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--m-max", type=int, default=10)
    _add_trace_options(p)
    p.set_defaults(func=cmd_embed_params)

    p = sub.add_parser("forecast", help="rolling one-step forecast and its MASE")
    p.add_argument("file")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--refit-interval", type=int, default=1)
    p.add_argument("--tau", type=int, default=None, help="lma delay (default: estimated)")
    p.add_argument("--m", type=int, default=None, help="lma dimension (default: estimated)")
    p.add_argument("--json", action="store_true")
    _add_trace_options(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("profile", help="full predictability profile of one or more traces")
    p.add_argument("files", nargs="+")
    p.add_argument("--methods", default="all", help="comma-separated methods or 'all'")
    p.add_argument("--fit", default=None, help="fit JSON (default: built-in reference fit)")
    p.add_argument("--train-fraction", type=float, default=0.9)
    p.add_argument("--refit-interval", type=int, default=1)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $PREDICTABILITY_THREADS or automatic)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    _add_trace_options(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("fit", help="fit the heuristic curve to (mase, wpe) points")
    p.add_argument("points", nargs="?", default=None)
    p.add_argument("--reference", action="store_true", help="emit the built-in reference fit")
    p.add_argument("--mase-cap", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("classify", help="place one (mase, wpe) point against the band")
    p.add_argument("--fit", default=None, help="fit JSON (default: built-in reference fit)")
    p.add_argument("--mase", type=float, required=True)
    p.add_argument("--wpe", type=float, required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gen", help="write a synthetic trace")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--transient-discard", type=int, default=-1)
    for name in KIND_PARAMS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=f"p_{name}", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("scatter", help="tidy (mase, wpe) rows from profile JSON reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_scatter)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, DataError, TraceFormatError, PredictabilityError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
