"""Shared domain types, trace alignment, and agreement metrics.

Every type here is an immutable value object backed by read-only numpy
arrays; operations are pure functions.  Times are seconds, frequencies Hz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "GridConfig",
    "Event",
    "EventStream",
    "EnfTrace",
    "PolaritySequence",
    "align_traces",
    "pearson_cc",
    "mae",
]


def _frozen(values, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridConfig:
    """Mains-grid parameters.  Grid-powered lights flicker at twice the
    nominal frequency, so a 50 Hz grid produces 100 Hz illumination."""

    nominal_hz: float = 50.0

    def __post_init__(self):
        if float(self.nominal_hz) not in (50.0, 60.0):
            raise ValueError("nominal_hz must be 50 or 60")

    @property
    def flicker_hz(self) -> float:
        return 2.0 * float(self.nominal_hz)


@dataclass(frozen=True)
class Event:
    """One signed brightness-change firing at a single pixel."""

    t: float
    x: int
    y: int
    polarity: int


@dataclass(frozen=True, eq=False)
class EventStream:
    """Time-ordered signed pixel firings, stored as parallel arrays.

    Invariants: ``t`` is non-decreasing (ties keep insertion order),
    coordinates lie inside the sensor, polarity is -1 or +1.
    """

    sensor_width: int
    sensor_height: int
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if self.sensor_width < 1 or self.sensor_height < 1:
            raise ValueError("sensor dimensions must be positive")
        t = _frozen(self.t, np.float64)
        x = _frozen(self.x, np.int32)
        y = _frozen(self.y, np.int32)
        p = _frozen(self.p, np.int8)
        if not (t.ndim == x.ndim == y.ndim == p.ndim == 1):
            raise ValueError("event columns must be one-dimensional")
        if not (len(t) == len(x) == len(y) == len(p)):
            raise ValueError("event columns must have equal length")
        if len(t) and np.any(np.diff(t) < 0):
            raise ValueError("event timestamps must be non-decreasing")
        if len(t) and (x.min() < 0 or x.max() >= self.sensor_width
                       or y.min() < 0 or y.max() >= self.sensor_height):
            raise ValueError("event coordinates outside sensor bounds")
        if len(t) and not np.all(np.abs(p) == 1):
            raise ValueError("polarity must be -1 or +1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_events(cls, width: int, height: int,
                    events: Sequence[Event]) -> "EventStream":
        return cls(width, height,
                   [e.t for e in events], [e.x for e in events],
                   [e.y for e in events], [e.polarity for e in events])

    @classmethod
    def from_arrays(cls, width, height, t, x, y, p, sort=False):
        if sort:
            order = np.argsort(np.asarray(t, dtype=np.float64), kind="stable")
            t = np.asarray(t, dtype=np.float64)[order]
            x = np.asarray(x)[order]
            y = np.asarray(y)[order]
            p = np.asarray(p)[order]
        return cls(width, height, t, x, y, p)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> Event:
        return Event(float(self.t[i]), int(self.x[i]),
                     int(self.y[i]), int(self.p[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (self.sensor_width == other.sensor_width
                and self.sensor_height == other.sensor_height
                and np.array_equal(self.t, other.t)
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.p, other.p))

    @property
    def t_start(self) -> float:
        if not len(self):
            raise ValueError("empty stream has no time support")
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        if not len(self):
            raise ValueError("empty stream has no time support")
        return float(self.t[-1])

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


class _UniformSeries:
    """Mixin-ish helpers shared by uniformly sampled series types."""

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(len(self.values))

    @property
    def t_end(self) -> float:
        return self.t0 + self.step * (len(self.values) - 1)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class EnfTrace(_UniformSeries):
    """Uniformly sampled instantaneous-frequency estimate.

    ``values[n]`` is the frequency at time ``t0 + n*step``.
    """

    t0: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        v = _frozen(self.values, np.float64)
        if v.ndim != 1 or len(v) < 1:
            raise ValueError("values must be a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("trace values must be finite")
        object.__setattr__(self, "values", v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnfTrace):
            return NotImplemented
        return (self.t0 == other.t0 and self.step == other.step
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class PolaritySequence(_UniformSeries):
    """Uniformly sampled majority-vote polarity, values in {-1, 0, +1}."""

    t0: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        v = _frozen(self.values, np.int8)
        if v.ndim != 1 or len(v) < 1:
            raise ValueError("values must be a non-empty 1-d array")
        if not np.all(np.abs(v.astype(np.int32)) <= 1):
            raise ValueError("polarity votes must be -1, 0, or +1")
        object.__setattr__(self, "values", v)

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.step

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolaritySequence):
            return NotImplemented
        return (self.t0 == other.t0 and self.step == other.step
                and np.array_equal(self.values, other.values))


def align_traces(a: EnfTrace, b: EnfTrace) -> tuple[EnfTrace, EnfTrace]:
    """Resample two traces onto their shared support at the coarser step.

    Both outputs share t0, step, and length; values are linearly
    interpolated.  Aligning already-aligned traces returns them unchanged.
    Raises ValueError("disjoint traces") when the supports do not overlap.
    """
    if (a.t0 == b.t0 and a.step == b.step and len(a) == len(b)):
        return a, b
    start = max(a.t0, b.t0)
    end = min(a.t_end, b.t_end)
    if end < start:
        raise ValueError("disjoint traces")
    step = max(a.step, b.step)
    n = int(np.floor((end - start) / step + 1e-12)) + 1
    times = start + step * np.arange(n)
    va = np.interp(times, a.times, a.values)
    vb = np.interp(times, b.times, b.values)
    return EnfTrace(start, step, va), EnfTrace(start, step, vb)


def _paired_values(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Accept two EnfTrace (must be aligned) or two equal-length arrays."""
    if isinstance(a, EnfTrace) or isinstance(b, EnfTrace):
        if not (isinstance(a, EnfTrace) and isinstance(b, EnfTrace)):
            raise TypeError("mixing a trace with a bare array")
        if len(a) != len(b):
            raise ValueError("length mismatch: traces must be aligned first")
        if abs(a.t0 - b.t0) > 1e-9 or abs(a.step - b.step) > 1e-12:
            raise ValueError("traces not aligned: run align_traces first")
        return a.values, b.values
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise ValueError("inputs must be 1-d arrays of equal length")
    return va, vb


def pearson_cc(a, b) -> float:
    """Pearson correlation coefficient of two aligned traces (signed).

    Also accepts two bare equal-length arrays.  Raises
    ValueError("zero variance") when either input is constant; a
    correlation against a flat trace is undefined, not zero.
    """
    va, vb = _paired_values(a, b)
    if len(va) < 2:
        raise ValueError("need at least two samples for a correlation")
    da = va - va.mean()
    db = vb - vb.mean()
    na = np.sqrt(np.dot(da, da))
    nb = np.sqrt(np.dot(db, db))
    if na == 0.0 or nb == 0.0:
        raise ValueError("zero variance")
    return float(np.dot(da, db) / (na * nb))


def mae(a, b) -> float:
    """Mean absolute error between two aligned traces, in Hz."""
    va, vb = _paired_values(a, b)
    return float(np.mean(np.abs(va - vb)))
