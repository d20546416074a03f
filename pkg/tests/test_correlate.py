import numpy as np
import pytest

from spdclab import (
    DetectorChain,
    EventStream,
    SourceParams,
    apply_detector_chain,
    estimate_g2bar_si,
    estimate_gbar2_c,
    gen_poisson_pairs,
    pair_histogram,
    singles_rate,
    triple_histogram,
)

from _oracles import brute_pair_counts, brute_triple_counts


def stream(channel, seconds, duration=1e-3):
    ticks = np.rint(np.asarray(seconds) * 1e15).astype(np.int64)
    return EventStream(channel, np.sort(ticks), int(round(duration * 1e15)))


def poisson_stream(channel, rate, duration, seed):
    rng = np.random.default_rng(seed)
    n = rng.poisson(rate * duration)
    ticks = np.unique(rng.integers(0, int(duration * 1e15), n))
    return EventStream(channel, ticks, int(duration * 1e15))


class TestSinglesRate:
    def test_definition(self):
        s = poisson_stream("idler", 1e7, 1e-3, 1)
        est = singles_rate(s)
        assert est.value == pytest.approx(len(s) / 1e-3, rel=1e-12)
        assert est.stderr == pytest.approx(np.sqrt(len(s)) / 1e-3, rel=1e-12)

    def test_empty_stream(self):
        s = EventStream("idler", np.empty(0, np.int64), 10**12)
        assert singles_rate(s).value == 0.0

    def test_simulated_idler_rate(self):
        src = SourceParams(2e7, 1e-9)
        pairs = gen_poisson_pairs(src, 2e-3, seed=3)
        idler, _, _ = apply_detector_chain(pairs, DetectorChain(), seed=3)
        est = singles_rate(idler)
        assert abs(est.value - 2e7) < 3.5 * np.sqrt(2e7 / 2e-3)


class TestPairHistogram:
    def test_hand_example(self):
        a = stream("signal1", [7e-9])
        b = stream("idler", [5e-9])
        h = pair_histogram(a, b, np.array([0.0, 2e-9]), 1e-9)
        assert list(h.counts) == [0, 1]

    def test_boundary_tick_counts_as_inside(self):
        a = stream("signal1", [6e-9])
        b = stream("idler", [5e-9])
        h = pair_histogram(a, b, np.array([0.0]), 1e-9)
        assert h.counts[0] == 1

    def test_one_sided_window(self):
        a = stream("signal1", [6e-9])
        b = stream("idler", [5e-9])
        h = pair_histogram(a, b, np.array([0.0, 2e-9]), 1e-9, one_sided=True)
        assert list(h.counts) == [1, 0]

    def test_accidental_level(self):
        # independent 1e6/s streams: each bin near r1 r2 2 tau_c T
        duration = 1.0
        a = poisson_stream("signal1", 1e6, duration, 21)
        b = poisson_stream("idler", 1e6, duration, 22)
        delays = np.arange(-5, 6) * 100e-9
        h = pair_histogram(a, b, delays, 5e-9)
        expected = 1e12 * 2 * 5e-9 * duration
        assert np.all(np.abs(h.counts - expected) < 5 * np.sqrt(expected))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(30)
        for seed in range(4):
            a = poisson_stream("signal1", 2e6, 5e-4, 100 + seed)
            b = poisson_stream("idler", 2e6, 5e-4, 200 + seed)
            delays = np.arange(-4, 5) * 40e-9
            tauc = rng.choice([5e-9, 17e-9, 50e-9])
            h = pair_histogram(a, b, delays, tauc)
            ref = brute_pair_counts(a.timestamps, b.timestamps, delays, tauc)
            assert np.array_equal(h.counts, ref)

    def test_one_sided_matches_brute_force(self):
        a = poisson_stream("signal1", 2e6, 5e-4, 300)
        b = poisson_stream("idler", 2e6, 5e-4, 301)
        delays = np.arange(-4, 5) * 40e-9
        h = pair_histogram(a, b, delays, 20e-9, one_sided=True)
        ref = brute_pair_counts(
            a.timestamps, b.timestamps, delays, 20e-9, one_sided=True
        )
        assert np.array_equal(h.counts, ref)

    def test_sharded_counts_identical(self):
        a = poisson_stream("signal1", 5e6, 1e-3, 31)
        b = poisson_stream("idler", 5e6, 1e-3, 32)
        delays = np.arange(-10, 11) * 20e-9
        base = pair_histogram(a, b, delays, 10e-9)
        for chunk in (1, 17, 1000, 10**7):
            h = pair_histogram(a, b, delays, 10e-9, chunk_size=chunk)
            assert np.array_equal(h.counts, base.counts)

    def test_rejects_unsorted(self):
        a = poisson_stream("signal1", 1e6, 1e-4, 33)
        a.timestamps[:2] = a.timestamps[:2][::-1]
        b = poisson_stream("idler", 1e6, 1e-4, 34)
        with pytest.raises(ValueError):
            pair_histogram(a, b, np.array([0.0]), 1e-9)

    def test_rejects_mismatched_duration(self):
        a = poisson_stream("signal1", 1e6, 1e-4, 35)
        b = poisson_stream("idler", 1e6, 2e-4, 36)
        with pytest.raises(ValueError):
            pair_histogram(a, b, np.array([0.0]), 1e-9)


class TestTripleHistogram:
    def test_hand_example(self):
        i = stream("idler", [100e-9])
        s1 = stream("signal1", [100.5e-9])
        s2 = stream("signal2", [130e-9])
        h = triple_histogram(i, s1, s2, np.array([0.0, 30e-9]), 1e-9)
        assert list(h.counts) == [0, 1]

    def test_accidental_triple_level(self):
        duration = 0.5
        r = 1e6
        i = poisson_stream("idler", r, duration, 41)
        s1 = poisson_stream("signal1", r, duration, 42)
        s2 = poisson_stream("signal2", r, duration, 43)
        tauc = 50e-9
        delays = np.arange(3, 7) * 300e-9  # far from zero delay
        h = triple_histogram(i, s1, s2, delays, tauc)
        expected = r**3 * (2 * tauc) ** 2 * duration
        assert np.all(np.abs(h.counts - expected) < 5 * np.sqrt(expected))

    def test_matches_brute_force(self):
        for seed in range(3):
            i = poisson_stream("idler", 2e6, 3e-4, 50 + seed)
            s1 = poisson_stream("signal1", 2e6, 3e-4, 60 + seed)
            s2 = poisson_stream("signal2", 2e6, 3e-4, 70 + seed)
            delays = np.arange(-3, 4) * 60e-9
            h = triple_histogram(i, s1, s2, delays, 25e-9)
            ref = brute_triple_counts(
                i.timestamps, s1.timestamps, s2.timestamps, delays, 25e-9
            )
            assert np.array_equal(h.counts, ref)

    def test_sharded_counts_identical(self):
        i = poisson_stream("idler", 3e6, 1e-3, 80)
        s1 = poisson_stream("signal1", 3e6, 1e-3, 81)
        s2 = poisson_stream("signal2", 3e6, 1e-3, 82)
        delays = np.arange(-5, 6) * 50e-9
        base = triple_histogram(i, s1, s2, delays, 20e-9)
        for chunk in (1, 23, 4096):
            h = triple_histogram(i, s1, s2, delays, 20e-9, chunk_size=chunk)
            assert np.array_equal(h.counts, base.counts)


class TestEstimators:
    def test_accidentals_normalize_to_one(self):
        duration = 1.0
        a = poisson_stream("signal1", 1e6, duration, 90)
        b = poisson_stream("idler", 1e6, duration, 91)
        delays = np.arange(-5, 6) * 100e-9
        h = pair_histogram(a, b, delays, 20e-9)
        est = estimate_g2bar_si(h, singles_rate(a), singles_rate(b))
        z = (est.values - 1.0) / est.stderr
        assert np.all(np.abs(z) < 4)

    def test_desk_plateau(self):
        src = SourceParams(2e7, 1e-9)
        chain = DetectorChain(jitter_width=1e-9)
        pairs = gen_poisson_pairs(src, 0.05, seed=92)
        idler, s1, s2 = apply_detector_chain(pairs, chain, seed=92)
        delays = np.arange(-12, 13) * 1e-9
        h = pair_histogram(s1, idler, delays, 5e-9)
        est = estimate_g2bar_si(h, singles_rate(s1), singles_rate(idler))
        plateau = est.value_at(0.0)
        assert abs(plateau - 6.0) < 3 * est.stderr_at(0.0)
        far = est.value_at(12e-9)
        assert abs(far - 1.0) < 3 * est.stderr_at(12e-9)

    def test_gbar2c_long_delay_unity_and_flagging(self):
        src = SourceParams(2e7, 1e-9)
        chain = DetectorChain(jitter_width=1e-9)
        pairs = gen_poisson_pairs(src, 0.05, seed=93)
        idler, s1, s2 = apply_detector_chain(pairs, chain, seed=93)
        delays = np.arange(-20, 21) * 1e-9
        tauc = 5e-9
        tri = triple_histogram(idler, s1, s2, delays, tauc)
        pair2 = pair_histogram(s2, idler, delays, tauc)
        zero = pair_histogram(s1, idler, np.array([0.0]), tauc)
        est = estimate_gbar2_c(
            tri, float(zero.rates[0]), pair2, singles_rate(idler)
        )
        short = est.value_at(0.0)
        assert short == pytest.approx(11.0 / 36.0, rel=0.05)
        far = est.value_at(20e-9)
        assert abs(far - 1.0) < 4 * est.stderr_at(20e-9)

    def test_efficiency_invariance(self):
        src = SourceParams(2e7, 1e-9)
        duration = 0.05
        values = {}
        for eta in (1.0, 0.5):
            chain = DetectorChain(
                idler_efficiency=eta, signal_efficiency=eta, jitter_width=1e-9
            )
            pairs = gen_poisson_pairs(src, duration, seed=94)
            idler, s1, s2 = apply_detector_chain(pairs, chain, seed=94)
            delays = np.array([0.0])
            h = pair_histogram(s1, idler, delays, 5e-9)
            est = estimate_g2bar_si(h, singles_rate(s1), singles_rate(idler))
            values[eta] = (est.values[0], est.stderr[0])
        v1, e1 = values[1.0]
        v2, e2 = values[0.5]
        assert abs(v1 - v2) < 3 * np.hypot(e1, e2)

    def test_zero_rate_rejected(self):
        h = pair_histogram(
            poisson_stream("signal1", 1e6, 1e-4, 95),
            poisson_stream("idler", 1e6, 1e-4, 96),
            np.array([0.0]),
            1e-9,
        )
        with pytest.raises(ValueError):
            estimate_g2bar_si(h, 0.0, 1e6)

    def test_empty_denominator_bins_flagged(self):
        i = stream("idler", [100e-9])
        s1 = stream("signal1", [100e-9])
        s2 = stream("signal2", [500e-9])
        delays = np.array([0.0, 400e-9])
        tri = triple_histogram(i, s1, s2, delays, 1e-9)
        pair2 = pair_histogram(s2, i, delays, 1e-9)
        est = estimate_gbar2_c(tri, 1e3, pair2, 1e3)
        assert np.isnan(est.values[0])  # no signal2 partner at zero delay
        assert np.isfinite(est.values[1])
