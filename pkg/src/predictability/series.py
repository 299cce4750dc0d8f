"""The scalar time series container used throughout the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An immutable sequence of finite real observations.

    Parameters
    ----------
    values : array_like
        Observations ``x_1 .. x_N``. Must be finite and of length >= 2.
    name : str, optional
        Free-form label carried into reports.
    sample_index_origin : int
        Index assigned to the first observation (1 by default).
    """

    values: np.ndarray
    name: Optional[str] = None
    sample_index_origin: int = 1

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if arr.size < 2:
            raise InvalidArgument(f"a time series needs at least 2 values, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InvalidArgument(f"non-finite value at position {bad}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.name == other.name
            and self.sample_index_origin == other.sample_index_origin
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @classmethod
    def of(cls, data: "TimeSeries | Sequence[float] | np.ndarray", name=None) -> "TimeSeries":
        """Return ``data`` unchanged if already a series, else wrap it."""
        if isinstance(data, TimeSeries):
            return data
        return cls(data, name=name)
