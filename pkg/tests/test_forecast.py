import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_nearest
from predictability.embedding import delay_vectors
from predictability.errors import InsufficientData, InvalidArgument
from predictability.forecast import (
    METHODS,
    ForecastTask,
    fit_auto_ar,
    kpss_lags,
    kpss_level_statistic,
    lma_match,
    lma_step,
    naive_step,
    random_walk_step,
    rolling_forecast,
)
from predictability.signals import GeneratorSpec, generate


def run(values, method, **kw):
    return rolling_forecast(ForecastTask(np.asarray(values, dtype=float), method, **kw))


class TestClosedFormSteps:
    @pytest.mark.parametrize("history,expected", [((5, 7, 9), 9), ((1.86,), 1.86)])
    def test_random_walk(self, history, expected):
        assert random_walk_step(history) == expected

    @pytest.mark.parametrize(
        "history,expected", [((0, 1, 0, 1), 0.5), ((2, 2, 2), 2.0), ((9, 1, 7), 17 / 3)]
    )
    def test_naive(self, history, expected):
        assert naive_step(history) == pytest.approx(expected, rel=1e-15)

    @pytest.mark.parametrize("step", [random_walk_step, naive_step])
    def test_empty(self, step):
        with pytest.raises(InvalidArgument):
            step([])

    def test_random_walk_out_of_phase(self):
        r = run([0, 1] * 50, "random_walk")
        np.testing.assert_array_equal(np.abs(r.predictions - r.truths), 1.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=12, max_size=60))
def test_rolling_closed_forms_match_direct(values):
    x = np.asarray(values)
    rw, nv = run(x, "random_walk"), run(x, "naive")
    n = rw.n
    for s in range(rw.k):
        hist = list(values[: n + s])
        assert rw.predictions[s] == hist[-1]
        assert nv.predictions[s] == pytest.approx(sum(hist) / len(hist), rel=1e-9, abs=1e-6)


class TestRollingExamples:
    def test_random_walk_ten(self):
        r = run(range(1, 11), "random_walk")
        assert (r.n, r.k) == (9, 1)
        assert r.predictions.tolist() == [9.0]
        assert r.truths.tolist() == [10.0]

    def test_naive_ten(self):
        r = run([0, 1] * 5, "naive")
        assert r.predictions[0] == pytest.approx(4 / 9, rel=1e-15)

    def test_truths_are_tail(self):
        x = np.arange(100.0) ** 1.5
        r = run(x, "naive", train_fraction=0.75)
        np.testing.assert_array_equal(r.truths, x[75:])
        np.testing.assert_array_equal(r.train_prefix, x[:75])

    def test_lma_sine(self):
        x = generate(GeneratorSpec("sine", 10_000)).values
        r = run(x, "lma")
        assert r.k == 1000
        assert np.max(np.abs(r.predictions - r.truths)) < 1e-3


class TestTaskValidation:
    def test_unknown_method(self):
        with pytest.raises(InvalidArgument):
            ForecastTask(np.arange(20.0), "arima")

    @pytest.mark.parametrize("tf", [0.0, 1.0, -0.5, 1.5])
    def test_fraction_bounds(self, tf):
        with pytest.raises(InvalidArgument):
            ForecastTask(np.arange(20.0), "naive", train_fraction=tf)

    @pytest.mark.parametrize("length,tf", [(5, 1 - 1e-12), (2, 0.4)])
    def test_degenerate_split(self, length, tf):
        with pytest.raises(InsufficientData):
            ForecastTask(np.arange(float(length)), "naive", train_fraction=tf)

    @pytest.mark.parametrize("interval", [0, -1, 1.5])
    def test_refit_interval(self, interval):
        with pytest.raises(InvalidArgument):
            ForecastTask(np.arange(20.0), "naive", refit_interval=interval)

    def test_split_rounding(self):
        assert ForecastTask(np.arange(70.0), "naive").train_length == 63


@pytest.mark.parametrize("method", METHODS)
def test_no_lookahead(method):
    x = generate(GeneratorSpec("ar1", 400, seed=4)).values
    cfg = {"tau": 1, "m": 3} if method == "lma" else {}
    base = run(x, method, method_config=cfg)
    n = base.n
    for s in (0, 7, base.k - 1):
        y = x.copy()
        y[n + s:] += 1e3  # disturb the truth being predicted and everything after it
        moved = run(y, method, method_config=cfg)
        np.testing.assert_array_equal(moved.predictions[: s + 1], base.predictions[: s + 1])


class TestAutoAr:
    def test_ar1_recovery(self):
        x = generate(GeneratorSpec("ar1", 2000, seed=0)).values
        fit = fit_auto_ar(x)
        assert fit.d == 0
        assert 1 <= fit.p <= 3
        assert fit.coefficients[0] == pytest.approx(0.8, abs=0.05)

    def test_random_walk_differenced(self):
        x = generate(GeneratorSpec("gaussian_random_walk", 2000, seed=0)).values
        fit = fit_auto_ar(x)
        assert fit.d == 1
        # the predicted increment is small next to the unit step scale
        assert abs(fit.forecast(x) - x[-1]) < 0.3

    def test_constant(self):
        fit = fit_auto_ar(np.full(100, 3.25))
        assert fit.forecast(np.full(100, 3.25)) == pytest.approx(3.25, abs=1e-12)

    def test_short_history_falls_back(self):
        fit = fit_auto_ar([1.0, 2.0, 6.0])
        assert fit.fallback
        assert fit.forecast([1.0, 2.0, 6.0]) == 3.0

    def test_forced_differencing(self):
        x = generate(GeneratorSpec("ar1", 500, seed=1)).values
        assert fit_auto_ar(x, d=1).d == 1

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_coefficients_match_lstsq(self, seed):
        x = generate(GeneratorSpec("ar1", 600, seed=seed)).values
        fit = fit_auto_ar(x, d=0)
        # refit the selected order directly
        p = fit.p
        rows = np.column_stack([np.ones(600 - 10)] + [x[10 - i: 600 - i] for i in range(1, p + 1)])
        beta = np.linalg.lstsq(rows, x[10:], rcond=None)[0]
        assert fit.intercept == pytest.approx(beta[0], abs=1e-10)
        np.testing.assert_allclose(fit.coefficients, beta[1:], atol=1e-10)

    def test_rolling_diagnostics(self):
        x = generate(GeneratorSpec("ar1", 300, seed=2)).values
        r = run(x, "auto_ar", refit_interval=5)
        assert r.diagnostics["refit_interval"] == 5
        assert len(r.diagnostics["steps"]) == r.k
        assert all(step["d"] in (0, 1) for step in r.diagnostics["steps"])


class TestKpss:
    def test_lags(self):
        assert kpss_lags(100) == 4
        assert kpss_lags(2000) == 8

    def test_constant_is_zero(self):
        assert kpss_level_statistic(np.ones(50)) == 0.0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_against_statsmodels(self, seed):
        tsa = pytest.importorskip("statsmodels.tsa.stattools")
        x = np.cumsum(np.random.default_rng(seed).normal(size=500)) * 0.1
        lags = kpss_lags(x.size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # p-value interpolation notices
            ref = tsa.kpss(x, regression="c", nlags=lags)[0]
        assert kpss_level_statistic(x, lags) == pytest.approx(ref, rel=1e-10)


class TestLma:
    def test_hand_example(self):
        h = [1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3]
        match = lma_match(h, tau=1, m=2)
        assert match.prediction == 4
        assert match.neighbor == 1  # 0-based start of (2, 3)
        assert match.distance == 0.0

    def test_periodic_exact(self):
        h = np.tile([0.3, -1.2, 5.5, 2.0, 0.1], 40)[:-1]
        assert lma_step(h, 1, 2) == 0.1

    def test_min_separation_zero_reproduces_successor(self):
        rng = np.random.default_rng(9)
        h = rng.normal(size=200)
        # append a copy of an earlier 3-sample stretch so the query recurs exactly
        h = np.concatenate([h, h[50:53]])
        assert lma_step(h, 1, 3, min_separation=0) == h[53]

    def test_matches_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            h = rng.normal(size=int(rng.integers(30, 80)))
            tau, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            span = (m - 1) * tau
            vecs = delay_vectors(h, tau, m)
            q = len(h) - 1 - span
            eligible = range(0, q - tau + 1)
            expect = brute_nearest(vecs.tolist(), vecs[q].tolist(), eligible)
            match = lma_match(h, tau, m)
            assert match.neighbor == expect
            assert match.prediction == h[expect + span + 1]

    def test_fallback_without_candidates(self):
        match = lma_match([1.0, 2.0, 3.0], tau=1, m=2, min_separation=5)
        assert match.fallback and match.prediction == 3.0

    def test_too_short(self):
        with pytest.raises(InsufficientData):
            lma_match([1.0, 2.0], tau=2, m=2)

    def test_logistic_accuracy(self):
        x = generate(GeneratorSpec("logistic", 10_000, seed=0)).values
        r = run(x, "lma")
        assert float(np.mean(np.abs(r.predictions - r.truths))) < 0.01
        assert "delay_params" in r.diagnostics

    def test_refit_interval_hides_new_vectors(self):
        x = generate(GeneratorSpec("logistic", 3000, seed=1)).values
        cfg = {"tau": 1, "m": 2}
        every = run(x, "lma", method_config=cfg)
        never = run(x, "lma", method_config=cfg, refit_interval=10**6)
        n = every.n
        limit = n - 1 - 1  # vectors of span 1 fully inside the training prefix
        assert all(s["neighbor"] is None or s["neighbor"] < limit for s in never.diagnostics["steps"])
        assert every.predictions[0] == never.predictions[0]
