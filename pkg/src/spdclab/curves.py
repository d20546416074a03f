"""Unit-tagged containers for sampled curves, surfaces and count histograms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import GridError

#: unit tags used on sampled data; rates are 1/s, amplitudes 1/s,
#: triple rates 1/s^3
UNIT_DIMENSIONLESS = "dimensionless"
UNIT_PER_S = "per_s"
UNIT_PER_S3 = "per_s3"

_REL_STEP_TOL = 1e-9


def _check_uniform(delays: np.ndarray) -> float:
    if delays.ndim != 1 or delays.size < 2:
        raise GridError("grid needs at least two points")
    steps = np.diff(delays)
    if np.any(steps <= 0):
        raise GridError("grid must be strictly increasing")
    step = float(steps[0])
    if np.any(np.abs(steps - step) > _REL_STEP_TOL * max(step, 1e-300)):
        raise GridError("grid must be uniform")
    return step


@dataclass
class CorrelationCurve:
    """A sampled one-dimensional delay curve on a uniform grid."""

    delays: np.ndarray
    values: np.ndarray
    unit: str = UNIT_DIMENSIONLESS

    def __post_init__(self) -> None:
        self.delays = np.asarray(self.delays, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.delays.shape:
            raise GridError("values and delays must have matching shapes")
        _check_uniform(self.delays)
        if not np.all(np.isfinite(self.values)):
            raise GridError("curve values must be finite")

    @property
    def step(self) -> float:
        return float(self.delays[1] - self.delays[0])

    def value_at(self, delay: float) -> float:
        """Value at a grid point; raises if ``delay`` is off-grid."""
        idx = (delay - self.delays[0]) / self.step
        i = int(round(idx))
        if i < 0 or i >= self.delays.size or abs(idx - i) > 1e-6:
            raise GridError(f"delay {delay} is not on the curve grid")
        return float(self.values[i])


@dataclass
class CorrelationSurface:
    """A sampled two-dimensional correlation surface on a square uniform grid.

    Axes are the two detection delays relative to the conditioning event.
    """

    t1: np.ndarray
    t2: np.ndarray
    values: np.ndarray
    unit: str = UNIT_PER_S3

    def __post_init__(self) -> None:
        self.t1 = np.asarray(self.t1, dtype=float)
        self.t2 = np.asarray(self.t2, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        s1 = _check_uniform(self.t1)
        s2 = _check_uniform(self.t2)
        if abs(s1 - s2) > _REL_STEP_TOL * s1:
            raise GridError("surface axes must share one grid step")
        if self.values.shape != (self.t1.size, self.t2.size):
            raise GridError("values shape must be (len(t1), len(t2))")

    @property
    def step(self) -> float:
        return float(self.t1[1] - self.t1[0])

    def value_at(self, a: float, b: float) -> float:
        i = int(round((a - self.t1[0]) / self.step))
        j = int(round((b - self.t2[0]) / self.step))
        if not (0 <= i < self.t1.size and 0 <= j < self.t2.size):
            raise GridError(f"point ({a}, {b}) is outside the surface grid")
        return float(self.values[i, j])


@dataclass
class Histogram:
    """Raw coincidence counts per delay bin plus the metadata to rate them."""

    delays: np.ndarray
    counts: np.ndarray
    duration: float
    coincidence_halfwidth: float

    def __post_init__(self) -> None:
        self.delays = np.asarray(self.delays, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != self.delays.shape:
            raise GridError("counts and delays must have matching shapes")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.duration <= 0:
            raise ValueError("duration must be positive")

    @property
    def rates(self) -> np.ndarray:
        """Counts per second of observation time."""
        return self.counts / self.duration


@dataclass
class EstimatorCurve:
    """Normalized correlation estimate with Poisson-propagated errors."""

    delays: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    unit: str = UNIT_DIMENSIONLESS

    def __post_init__(self) -> None:
        self.delays = np.asarray(self.delays, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if not (self.values.shape == self.delays.shape == self.stderr.shape):
            raise GridError("delays, values and stderr must have equal shapes")

    def value_at(self, delay: float) -> float:
        i = int(np.argmin(np.abs(self.delays - delay)))
        return float(self.values[i])

    def stderr_at(self, delay: float) -> float:
        i = int(np.argmin(np.abs(self.delays - delay)))
        return float(self.stderr[i])
