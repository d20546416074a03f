"""Coincidence counting on sorted timestamp streams and ratio estimators.

Counting conventions:

* a pair (t_a, t_b) falls in the delay-tau window when
  |t_a - t_b - tau| <= tau_c in integer ticks; the window measure is
  2 tau_c and exact boundary ticks count as inside.
* every partner inside a window is counted, not just the first, which is
  what makes windowed counts proportional to correlation-function
  integrals.
* a triple (t_i, t_s1, t_s2) counts at delay tau when
  |t_s1 - t_i| <= tau_c and |t_s2 - t_i - tau| <= tau_c.

The counters collect all pairwise time differences that can ever land in a
window with one vectorized merge pass over the sorted streams (cost scales
with stream length plus window occupancy), then answer every requested
delay by binary search on the sorted differences.  Counting a stream in
consecutive chunks gives bit-identical results, which is the sharding
contract for parallel or out-of-core operation.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .curves import Histogram, EstimatorCurve
from .events import EventStream
from .params import TICKS_PER_SECOND

__all__ = [
    "RateEstimate",
    "singles_rate",
    "pair_histogram",
    "triple_histogram",
    "estimate_g2bar_si",
    "estimate_gbar2_c",
]


class RateEstimate(NamedTuple):
    value: float
    stderr: float


def _ticks(seconds: float) -> int:
    return int(round(seconds * TICKS_PER_SECOND))


def _check_sorted(stream: EventStream) -> None:
    ts = stream.timestamps
    if ts.size and np.any(np.diff(ts) <= 0):
        raise ValueError(f"stream {stream.channel} is not strictly sorted")


def singles_rate(stream: EventStream) -> RateEstimate:
    """Singles rate of one channel with its Poisson standard error."""
    if stream.duration <= 0:
        raise ValueError("stream duration must be positive")
    t = stream.duration_s
    n = len(stream)
    return RateEstimate(n / t, np.sqrt(n) / t)


def _ragged_ranges(starts: np.ndarray, stops: np.ndarray) -> np.ndarray:
    """Concatenate arange(start, stop) for every pair, vectorized."""
    lens = stops - starts
    keep = lens > 0
    starts, lens = starts[keep], lens[keep]
    if starts.size == 0:
        return np.empty(0, dtype=np.int64)
    ends = np.cumsum(lens)
    steps = np.ones(int(ends[-1]), dtype=np.int64)
    steps[0] = starts[0]
    steps[ends[:-1]] = starts[1:] - (starts[:-1] + lens[:-1] - 1)
    return np.cumsum(steps)


def _window_bounds(
    grid: np.ndarray, tauc: int, one_sided: bool
) -> tuple[np.ndarray, np.ndarray]:
    # inclusive lower, exclusive upper, in ticks
    if one_sided:
        return grid, grid + 2 * tauc
    return grid - tauc, grid + tauc + 1


def _collect_diffs(
    ta: np.ndarray,
    tb: np.ndarray,
    lo: int,
    hi: int,
    weights: np.ndarray | None,
    chunk_size: int | None,
):
    """All differences ta_i - tb_j within [lo, hi), sorted, with weights.

    Chunking over ``ta`` is the sharding mechanism: each reference event is
    owned by exactly one chunk, so chunked and unchunked counts agree
    exactly.
    """
    if chunk_size is None:
        chunk_size = ta.size or 1
    diff_parts: list[np.ndarray] = []
    weight_parts: list[np.ndarray] = []
    for start in range(0, ta.size, chunk_size):
        chunk = ta[start : start + chunk_size]
        j0 = np.searchsorted(tb, chunk - hi + 1, side="left")
        j1 = np.searchsorted(tb, chunk - lo, side="right")
        counts = j1 - j0
        idx = _ragged_ranges(j0, j1)
        diff_parts.append(np.repeat(chunk, counts) - tb[idx])
        if weights is not None:
            weight_parts.append(np.repeat(weights[start : start + chunk_size], counts))
    diffs = np.concatenate(diff_parts) if diff_parts else np.empty(0, np.int64)
    order = np.argsort(diffs, kind="stable")
    diffs = diffs[order]
    if weights is None:
        return diffs, None
    w = np.concatenate(weight_parts)[order] if weight_parts else np.empty(0, np.int64)
    return diffs, w


def _windowed_counts(
    diffs: np.ndarray,
    weights: np.ndarray | None,
    lows: np.ndarray,
    highs: np.ndarray,
) -> np.ndarray:
    i0 = np.searchsorted(diffs, lows, side="left")
    i1 = np.searchsorted(diffs, highs, side="left")
    if weights is None:
        return (i1 - i0).astype(np.int64)
    prefix = np.concatenate(([0], np.cumsum(weights)))
    return (prefix[i1] - prefix[i0]).astype(np.int64)


def _common_duration(*streams: EventStream) -> float:
    durations = {s.duration for s in streams}
    if len(durations) != 1:
        raise ValueError("streams must share one observation duration")
    return streams[0].duration_s


def pair_histogram(
    a: EventStream,
    b: EventStream,
    delays,
    tauc: float,
    *,
    one_sided: bool = False,
    chunk_size: int | None = None,
) -> Histogram:
    """Count pairs with t_a - t_b in the window around every grid delay.

    ``one_sided=True`` switches to the alternative convention
    t_a - t_b - tau in [0, 2 tau_c); the default window is centered.
    """
    _check_sorted(a)
    _check_sorted(b)
    if tauc <= 0:
        raise ValueError("tauc must be positive")
    duration = _common_duration(a, b)
    delays = np.asarray(delays, dtype=float)
    grid = np.rint(delays * TICKS_PER_SECOND).astype(np.int64)
    lows, highs = _window_bounds(grid, _ticks(tauc), one_sided)
    diffs, _ = _collect_diffs(
        a.timestamps, b.timestamps, int(lows.min()), int(highs.max()),
        None, chunk_size,
    )
    counts = _windowed_counts(diffs, None, lows, highs)
    return Histogram(delays, counts, duration, tauc)


def triple_histogram(
    i: EventStream,
    s1: EventStream,
    s2: EventStream,
    delays,
    tauc: float,
    *,
    chunk_size: int | None = None,
) -> Histogram:
    """Count (idler, signal1, signal2) triples per grid delay.

    Each idler contributes (partners in the signal1 gate) times (partners in
    the delay-tau signal2 window); the product form is realized as a
    weighted difference histogram between idler and signal2 with the
    signal1 gate occupancy as weight, which keeps one merge pass per stream.
    """
    _check_sorted(i)
    _check_sorted(s1)
    _check_sorted(s2)
    if tauc <= 0:
        raise ValueError("tauc must be positive")
    duration = _common_duration(i, s1, s2)
    tc = _ticks(tauc)
    ti = i.timestamps
    n1 = (
        np.searchsorted(s1.timestamps, ti + tc, side="right")
        - np.searchsorted(s1.timestamps, ti - tc, side="left")
    ).astype(np.int64)
    gated = n1 > 0
    ti, n1 = ti[gated], n1[gated]
    delays = np.asarray(delays, dtype=float)
    grid = np.rint(delays * TICKS_PER_SECOND).astype(np.int64)
    lows, highs = _window_bounds(grid, tc, one_sided=False)
    # idlers are the chunked reference so each one carries its gate weight
    diffs, weights = _collect_diffs(
        ti, s2.timestamps, int(1 - highs.max()), int(1 - lows.min()),
        n1, chunk_size,
    )
    # diffs are ti - ts2; window asks for ts2 - ti, so mirror the bounds
    counts = _windowed_counts(-diffs[::-1], weights[::-1], lows, highs)
    return Histogram(delays, counts, duration, tauc)


def estimate_g2bar_si(
    pairs: Histogram, a_rate: RateEstimate | float, b_rate: RateEstimate | float
) -> EstimatorCurve:
    """Normalize a pair histogram to the accidental level.

    value(tau) = pair_rate(tau) / (a_rate * b_rate * 2 tau_c); uncorrelated
    streams give 1.  Errors are Poisson on the pair counts and on the
    singles counts, combined in quadrature.
    """
    ra = a_rate.value if isinstance(a_rate, RateEstimate) else float(a_rate)
    rb = b_rate.value if isinstance(b_rate, RateEstimate) else float(b_rate)
    if ra <= 0 or rb <= 0:
        raise ValueError("singles rates must be positive")
    t = pairs.duration
    denom = ra * rb * 2.0 * pairs.coincidence_halfwidth
    values = pairs.rates / denom
    n = pairs.counts.astype(float)
    rel = np.sqrt(
        np.divide(1.0, n, out=np.zeros_like(n), where=n > 0)
        + 1.0 / (ra * t)
        + 1.0 / (rb * t)
    )
    return EstimatorCurve(pairs.delays, values, values * rel)


def estimate_gbar2_c(
    triples: Histogram,
    pairs0: float,
    pairs: Histogram,
    idler_rate: RateEstimate | float,
) -> EstimatorCurve:
    """Efficiency-independent conditioned-coherence estimator.

    value(tau) = triple_rate(tau) * idler_rate / (pairs0 * pair_rate(tau))
    where ``pairs0`` is the heralding pair rate at zero delay (signal1 gate)
    and ``pairs`` the signal2-idler histogram of the same run.  Substituting
    the measured idler singles rate for the unknown source rate cancels
    every detection efficiency in expectation.  Bins with an empty
    denominator are flagged as NaN.
    """
    ri = idler_rate.value if isinstance(idler_rate, RateEstimate) else float(idler_rate)
    if ri <= 0 or pairs0 <= 0:
        raise ValueError("idler rate and zero-delay pair rate must be positive")
    if triples.counts.shape != pairs.counts.shape:
        raise ValueError("triple and pair histograms must share one grid")
    t = triples.duration
    n3 = triples.counts.astype(float)
    n2 = pairs.counts.astype(float)
    good = n2 > 0
    values = np.full(n3.shape, np.nan)
    stderr = np.full(n3.shape, np.nan)
    values[good] = triples.rates[good] * ri / (pairs0 * pairs.rates[good])
    rel_good = np.sqrt(
        np.divide(1.0, n3[good], out=np.zeros_like(n3[good]), where=n3[good] > 0)
        + 1.0 / n2[good]
        + 1.0 / (ri * t)
        + 1.0 / (pairs0 * t)
    )
    stderr[good] = values[good] * rel_good
    return EstimatorCurve(triples.delays, values, stderr)
