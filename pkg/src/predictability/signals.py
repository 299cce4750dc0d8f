"""Seeded synthetic signal generators.

All randomness comes from NumPy's ``PCG64`` bit generator seeded with the
spec's 64-bit seed, so a given :class:`GeneratorSpec` always produces the
same values. Chaotic systems run for ``transient_discard`` samples before
recording starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

import numpy as np

from .errors import InvalidArgument
from .series import TimeSeries

CHAOTIC_KINDS = ("logistic", "henon", "lorenz_x")
KINDS = CHAOTIC_KINDS + (
    "sine",
    "square_wave",
    "iid_uniform",
    "iid_gaussian",
    "gaussian_random_walk",
    "ar1",
)

DEFAULT_PARAMS: Dict[str, Dict[str, float]] = {
    "logistic": {"r": 4.0},
    "henon": {"a": 1.4, "b": 0.3},
    "lorenz_x": {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0, "dt": 0.01},
    "sine": {"amplitude": 1.0, "period": 100.0, "phase": 0.0, "noise": 0.0},
    "square_wave": {"low": 0.0, "high": 1.0, "period": 2.0, "noise": 0.0},
    "iid_uniform": {"low": 0.0, "high": 1.0},
    "iid_gaussian": {"mean": 0.0, "std": 1.0},
    "gaussian_random_walk": {"step_scale": 1.0, "start": 0.0},
    "ar1": {"coefficient": 0.8, "noise_std": 1.0},
}

MIN_CHAOTIC_TRANSIENT = 1000


def rng_for(seed: int) -> np.random.Generator:
    """The package's single PRNG: PCG64 with the given seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    length: int
    seed: int = 0
    params: Mapping[str, float] = field(default_factory=dict)
    transient_discard: int = -1  # -1: 1000 for chaotic kinds, 0 otherwise

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown generator kind {self.kind!r}; choose from {KINDS}")
        if int(self.length) != self.length or self.length < 2:
            raise InvalidArgument(f"length must be an integer >= 2, got {self.length!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgument("seed must fit in an unsigned 64-bit integer")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise InvalidArgument(f"unknown parameter(s) for {self.kind}: {sorted(unknown)}")
        merged = {**DEFAULT_PARAMS[self.kind], **{k: float(v) for k, v in self.params.items()}}
        if not all(math.isfinite(v) for v in merged.values()):
            raise InvalidArgument("generator parameters must be finite")
        discard = self.transient_discard
        if discard < 0:
            discard = MIN_CHAOTIC_TRANSIENT if self.kind in CHAOTIC_KINDS else 0
        if self.kind in CHAOTIC_KINDS and discard < MIN_CHAOTIC_TRANSIENT:
            raise InvalidArgument(
                f"{self.kind} must discard at least {MIN_CHAOTIC_TRANSIENT} transient samples"
            )
        object.__setattr__(self, "params", merged)
        object.__setattr__(self, "transient_discard", int(discard))
        _validate(self.kind, merged)


def _validate(kind: str, p: Dict[str, float]) -> None:
    if kind == "logistic" and not 0.0 < p["r"] <= 4.0:
        raise InvalidArgument(f"logistic r must lie in (0, 4], got {p['r']}")
    if kind == "lorenz_x" and p["dt"] <= 0.0:
        raise InvalidArgument("Lorenz step dt must be positive")
    if kind in ("sine", "square_wave") and p["period"] <= 0.0:
        raise InvalidArgument("period must be positive")
    if kind in ("sine", "square_wave") and p["noise"] < 0.0:
        raise InvalidArgument("noise amplitude must be nonnegative")
    if kind == "square_wave" and p["period"] < 2.0:
        raise InvalidArgument("square-wave period must be at least 2 samples")
    if kind == "iid_uniform" and not p["low"] < p["high"]:
        raise InvalidArgument("uniform bounds need low < high")
    if kind == "iid_gaussian" and p["std"] < 0.0:
        raise InvalidArgument("std must be nonnegative")
    if kind == "gaussian_random_walk" and p["step_scale"] < 0.0:
        raise InvalidArgument("step_scale must be nonnegative")
    if kind == "ar1":
        if not abs(p["coefficient"]) < 1.0:
            raise InvalidArgument("AR(1) coefficient must satisfy |c| < 1")
        if p["noise_std"] < 0.0:
            raise InvalidArgument("noise_std must be nonnegative")


def logistic_orbit(r: float, x0: float, n: int) -> np.ndarray:
    """The first ``n`` iterates of ``x -> r x (1 - x)`` after ``x0``."""
    out = np.empty(n)
    x = float(x0)
    for i in range(n):
        x = r * x * (1.0 - x)
        out[i] = x
    return out


def henon_orbit(a: float, b: float, x0: float, y0: float, n: int) -> np.ndarray:
    out = np.empty(n)
    x, y = float(x0), float(y0)
    for i in range(n):
        x, y = 1.0 - a * x * x + y, b * x
        out[i] = x
    return out


def lorenz_rk4(sigma: float, rho: float, beta: float, dt: float, state, n: int) -> np.ndarray:
    """Fixed-step RK4 integration of the Lorenz system; returns ``n`` states after ``state``."""
    x, y, z = (float(v) for v in state)
    out = np.empty((n, 3))
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for i in range(n):
        k1x = sigma * (y - x)
        k1y = x * (rho - z) - y
        k1z = x * y - beta * z
        ax, ay, az = x + h2 * k1x, y + h2 * k1y, z + h2 * k1z
        k2x = sigma * (ay - ax)
        k2y = ax * (rho - az) - ay
        k2z = ax * ay - beta * az
        ax, ay, az = x + h2 * k2x, y + h2 * k2y, z + h2 * k2z
        k3x = sigma * (ay - ax)
        k3y = ax * (rho - az) - ay
        k3z = ax * ay - beta * az
        ax, ay, az = x + dt * k3x, y + dt * k3y, z + dt * k3z
        k4x = sigma * (ay - ax)
        k4y = ax * (rho - az) - ay
        k4z = ax * ay - beta * az
        x += h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z += h6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = z
    return out


def generate(spec: GeneratorSpec) -> TimeSeries:
    """Produce the series described by ``spec``."""
    p = spec.params
    n = spec.length
    skip = spec.transient_discard
    rng = rng_for(spec.seed)
    kind = spec.kind

    if kind == "logistic":
        # keep away from the measure-zero preimages of 0 and 1
        x0 = rng.uniform(0.05, 0.95)
        values = logistic_orbit(p["r"], x0, skip + n)[skip:]
    elif kind == "henon":
        x0, y0 = rng.uniform(-0.1, 0.1, size=2)
        values = henon_orbit(p["a"], p["b"], x0, y0, skip + n)[skip:]
    elif kind == "lorenz_x":
        start = np.array([1.0, 1.0, 1.0]) + rng.uniform(-1.0, 1.0, size=3)
        values = lorenz_rk4(p["sigma"], p["rho"], p["beta"], p["dt"], start, skip + n)[skip:, 0]
    elif kind == "sine":
        i = np.arange(skip, skip + n, dtype=np.float64)
        values = p["amplitude"] * np.sin(2.0 * np.pi * i / p["period"] + p["phase"])
        if p["noise"] > 0.0:
            values = values + p["noise"] * rng.standard_normal(n)
    elif kind == "square_wave":
        i = np.arange(skip, skip + n, dtype=np.float64)
        high = np.floor(2.0 * i / p["period"]) % 2 == 1
        values = np.where(high, p["high"], p["low"])
        if p["noise"] > 0.0:
            values = values + p["noise"] * rng.standard_normal(n)
    elif kind == "iid_uniform":
        values = rng.uniform(p["low"], p["high"], size=skip + n)[skip:]
    elif kind == "iid_gaussian":
        values = p["mean"] + p["std"] * rng.standard_normal(skip + n)[skip:]
    elif kind == "gaussian_random_walk":
        steps = p["step_scale"] * rng.standard_normal(skip + n)
        steps[0] = 0.0
        values = (p["start"] + np.cumsum(steps))[skip:]
    else:  # ar1, started from its stationary distribution
        c, s = p["coefficient"], p["noise_std"]
        eps = s * rng.standard_normal(skip + n)
        out = np.empty(skip + n)
        x = eps[0] / math.sqrt(1.0 - c * c)
        out[0] = x
        for t in range(1, skip + n):
            x = c * x + eps[t]
            out[t] = x
        values = out[skip:]

    return TimeSeries(values, name=f"{kind}-seed{spec.seed}")
