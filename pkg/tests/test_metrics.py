import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_mase
from predictability.errors import InvalidArgument, UndefinedScale
from predictability.metrics import MaseScore, mase_from_arrays, trial_stats


class TestMaseExamples:
    def test_perfect(self):
        assert mase_from_arrays([0, 1, 0, 1], [3, 4], [3, 4]).value == 0.0

    def test_hand_example(self):
        score = mase_from_arrays([0, 1, 0, 1], [1, 0], [0, 1])
        assert score.numerator == 2.0
        assert score.denominator_scale == 1.0
        assert score.value == 1.0
        assert (score.n, score.k) == (4, 2)

    def test_half(self):
        assert mase_from_arrays([0, 1, 0, 1], [0.5, 0.5], [0, 1]).value == 0.5

    def test_constant_training_raises(self):
        with pytest.raises(UndefinedScale):
            mase_from_arrays([2, 2, 2], [1], [2])

    @pytest.mark.parametrize("train,p,c", [([1], [1], [1]), ([0, 1], [], []), ([0, 1], [1, 2], [1])])
    def test_bad_shapes(self, train, p, c):
        with pytest.raises(InvalidArgument):
            mase_from_arrays(train, p, c)


def test_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n, k = rng.integers(2, 40), rng.integers(1, 10)
        train = rng.normal(size=n)
        p, c = rng.normal(size=k), rng.normal(size=k)
        assert mase_from_arrays(train, p, c).value == pytest.approx(brute_mase(train, p, c), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(
    alpha=st.floats(1e-3, 1e3).flatmap(lambda a: st.sampled_from([a, -a])),
    beta=st.floats(-1e3, 1e3),
    seed=st.integers(0, 2**32 - 1),
)
def test_affine_invariance(alpha, beta, seed):
    rng = np.random.default_rng(seed)
    train, p, c = rng.normal(size=20), rng.normal(size=5), rng.normal(size=5)
    base = mase_from_arrays(train, p, c).value
    moved = mase_from_arrays(alpha * train + beta, alpha * p + beta, alpha * c + beta).value
    assert moved == pytest.approx(base, rel=1e-9)


class TestTrialStats:
    @pytest.mark.parametrize(
        "scores,expected",
        [((1, 1, 1), (1.0, 0.0)), ((0, 2), (1.0, math.sqrt(2))), ((0.5,), (0.5, 0.0))],
    )
    def test_examples(self, scores, expected):
        mean, std = trial_stats(scores)
        assert mean == pytest.approx(expected[0])
        assert std == pytest.approx(expected[1])

    def test_accepts_scores(self):
        scores = [MaseScore(v, v, 1.0, 10, 1) for v in (0.0, 2.0)]
        assert trial_stats(scores) == pytest.approx((1.0, math.sqrt(2)))

    def test_empty(self):
        with pytest.raises(InvalidArgument):
            trial_stats([])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 100), min_size=2, max_size=30))
    def test_brute_force(self, values):
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
        got = trial_stats(values)
        assert got[0] == pytest.approx(mean, abs=1e-9)
        assert got[1] == pytest.approx(math.sqrt(var), abs=1e-9)
