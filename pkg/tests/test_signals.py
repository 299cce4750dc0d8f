import math

import numpy as np
import pytest

from predictability.errors import InvalidArgument
from predictability.signals import (
    KINDS,
    GeneratorSpec,
    generate,
    logistic_orbit,
    lorenz_rk4,
)


class TestExamples:
    def test_sine_closed_form(self):
        s = generate(GeneratorSpec("sine", 400, params={"amplitude": 1, "period": 100}))
        i = np.arange(400)
        np.testing.assert_array_equal(s.values, np.sin(2 * np.pi * i / 100))

    def test_logistic_iterates(self):
        orbit = logistic_orbit(4.0, 0.2, 3)
        np.testing.assert_allclose(orbit, [0.64, 0.9216, 0.28901376], rtol=0, atol=1e-15)

    def test_zero_step_walk_is_constant(self):
        s = generate(GeneratorSpec("gaussian_random_walk", 50, seed=3, params={"step_scale": 0}))
        assert np.all(s.values == s.values[0])


@pytest.mark.parametrize("kind", KINDS)
def test_seed_determinism(kind):
    a = generate(GeneratorSpec(kind, 1500, seed=11))
    b = generate(GeneratorSpec(kind, 1500, seed=11))
    assert a.values.tobytes() == b.values.tobytes()
    assert len(a) == 1500


@pytest.mark.parametrize("kind", ["logistic", "henon", "lorenz_x", "iid_gaussian", "ar1"])
def test_seeds_differ(kind):
    a = generate(GeneratorSpec(kind, 200, seed=1))
    b = generate(GeneratorSpec(kind, 200, seed=2))
    assert not np.array_equal(a.values, b.values)


def test_logistic_stays_in_unit_interval():
    s = generate(GeneratorSpec("logistic", 100_000, seed=5))
    assert s.values.min() >= 0.0 and s.values.max() <= 1.0


@pytest.mark.slow
def test_lorenz_bounded_long_run():
    x = lorenz_rk4(10.0, 28.0, 8.0 / 3.0, 0.01, (1.0, 1.0, 1.0), 1_000_000)
    assert np.max(np.abs(x[:, 0])) < 100.0


def test_square_wave_levels():
    s = generate(GeneratorSpec("square_wave", 10))
    np.testing.assert_array_equal(s.values, [0, 1] * 5)


def test_ar1_sample_autocorrelation():
    x = generate(GeneratorSpec("ar1", 20_000, seed=0)).values
    x = x - x.mean()
    rho = float(x[1:] @ x[:-1] / (x @ x))
    assert rho == pytest.approx(0.8, abs=0.02)


class TestValidation:
    @pytest.mark.parametrize("r", [0.0, -1.0, 4.0001])
    def test_logistic_r_domain(self, r):
        with pytest.raises(InvalidArgument):
            GeneratorSpec("logistic", 2000, params={"r": r})

    def test_unknown_kind(self):
        with pytest.raises(InvalidArgument):
            GeneratorSpec("brownian", 10)

    def test_unknown_param(self):
        with pytest.raises(InvalidArgument):
            GeneratorSpec("sine", 10, params={"r": 3.0})

    def test_non_finite_param(self):
        with pytest.raises(InvalidArgument):
            GeneratorSpec("sine", 10, params={"period": math.inf})

    def test_chaotic_transient_floor(self):
        with pytest.raises(InvalidArgument):
            GeneratorSpec("henon", 10, transient_discard=10)

    def test_too_short(self):
        with pytest.raises(InvalidArgument):
            GeneratorSpec("sine", 1)
