"""Time-series container, differencing/integration, and split utilities.

All arithmetic is 64-bit floating point. Dates are opaque ordered labels;
alignment everywhere in the toolkit is by index, never by calendar math,
so gaps (weekends, holidays) are irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "TimeSeries",
    "DifferencedSeries",
    "asarray_1d",
    "difference",
    "integrate",
    "train_test_split",
    "prefix_subsets",
]


def _validated_values(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise ValueError(f"series values must be one-dimensional, got shape {arr.shape}")
    if arr.size < 1:
        raise ValueError("series must contain at least one observation")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series values must all be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Immutable ordered sequence of real observations with optional dates."""

    values: np.ndarray
    dates: tuple | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _validated_values(self.values))
        if self.dates is not None:
            dates = tuple(self.dates)
            if len(dates) != len(self.values):
                raise ValueError(
                    f"dates length {len(dates)} does not match values length {len(self.values)}"
                )
            for a, b in zip(dates, dates[1:]):
                if not a < b:
                    raise ValueError(f"dates must be strictly increasing, got {a!r} before {b!r}")
            object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return len(self.values)

    def slice(self, start: int, stop: int) -> "TimeSeries":
        """Contiguous sub-series [start, stop), dates carried along."""
        dates = self.dates[start:stop] if self.dates is not None else None
        return TimeSeries(self.values[start:stop], dates=dates, label=self.label)

    def appended(self, value: float) -> "TimeSeries":
        """New series with one observation appended. Dates are dropped:
        extension is used for index-aligned rolling histories only."""
        return TimeSeries(np.append(self.values, float(value)), label=self.label)


def asarray_1d(x) -> np.ndarray:
    """Coerce a TimeSeries, array, or sequence to a 1-D float64 array."""
    if isinstance(x, TimeSeries):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a one-dimensional sequence, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DifferencedSeries:
    """d-th forward differences plus the d leading originals needed to invert."""

    values: np.ndarray
    order_d: int
    anchors: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        anch = np.array(self.anchors, dtype=np.float64, copy=True)
        if self.order_d < 0:
            raise ValueError("order_d must be non-negative")
        if len(anch) != self.order_d:
            raise ValueError(
                f"anchors length {len(anch)} must equal order_d {self.order_d}"
            )
        vals.setflags(write=False)
        anch.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "anchors", anch)

    def __len__(self) -> int:
        return len(self.values)


def difference(series: TimeSeries, d: int) -> DifferencedSeries:
    """Apply d rounds of first differencing, keeping the consumed head values.

    d = 0 returns an identity copy with empty anchors.
    """
    if d < 0:
        raise ValueError("difference order d must be non-negative")
    if d >= len(series):
        raise ValueError(f"difference order d={d} must be < series length {len(series)}")
    values = np.diff(series.values, n=d) if d > 0 else np.array(series.values)
    return DifferencedSeries(values=values, order_d=d, anchors=series.values[:d])


def integrate(diff: DifferencedSeries) -> TimeSeries:
    """Invert :func:`difference` exactly (up to float associativity)."""
    d = diff.order_d
    if len(diff.values) + d < 1:
        raise ValueError("cannot integrate to an empty series")
    vals = np.asarray(diff.values, dtype=np.float64)
    for k in range(d, 0, -1):
        head = np.diff(diff.anchors, n=k - 1)[0]
        vals = np.concatenate(([head], head + np.cumsum(vals)))
    return TimeSeries(vals)


def train_test_split(series: TimeSeries, train_fraction: float) -> tuple[TimeSeries, TimeSeries]:
    """Chronological split: first floor(n * fraction) points train, rest test.

    Degenerate requests are rejected: each side must amount to at least one
    full sample's worth of the series before rounding.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(series)
    n_train = math.floor(n * train_fraction)
    if n_train < 1 or n * (1.0 - train_fraction) < 1.0:
        raise ValueError(
            f"split of {n} points at fraction {train_fraction} is degenerate"
        )
    return series.slice(0, n_train), series.slice(n_train, n)


def prefix_subsets(test: TimeSeries, lengths: Sequence[int]) -> list[TimeSeries]:
    """Nested prefixes of the test set, e.g. the first 7, 14, and 21 points."""
    if len(lengths) == 0:
        raise ValueError("at least one subset length is required")
    prev = 0
    for length in lengths:
        if length <= prev:
            raise ValueError(f"subset lengths must be strictly increasing, got {list(lengths)}")
        if length > len(test):
            raise ValueError(f"subset length {length} exceeds test length {len(test)}")
        prev = length
    return [test.slice(0, length) for length in lengths]
