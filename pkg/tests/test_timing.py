import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetem import timing
from qnetem.errors import EmulatorError


def rng(seed=0):
    return np.random.default_rng(seed)


def poisson_stream(rate_hz, duration_s, seed, span_start=0):
    g = rng(seed)
    n = g.poisson(rate_hz * duration_s)
    span = int(duration_s * 1e12)
    return np.sort(g.integers(span_start, span_start + span, n)).astype(np.int64)


class TestCorrelate:
    def test_hand_worked_example(self):
        a = [0, 10_000, 20_000]
        b = [100, 9_000, 20_300]
        res = timing.correlate(a, b, window_ps=1000)
        assert res.count == 2
        assert res.times_a.tolist() == [0, 20_000]
        assert res.times_b.tolist() == [100, 20_300]

    def test_offset_shifts_window(self):
        base = np.arange(0, 1_000_000, 10_000, dtype=np.int64)
        shifted = base + 700
        assert timing.correlate(base, shifted, 1000, offset_ps=-700).count == base.shape[0]
        assert timing.correlate(base, shifted, 1000, offset_ps=0).count == 0

    def test_one_to_one(self):
        a = [0]
        b = [-400, 400]
        res = timing.correlate(a, b, 1000)
        assert res.count == 1

    def test_matched_pairs_within_window(self):
        g = rng(5)
        a = np.sort(g.integers(0, 10_000_000, 2000))
        b = np.sort(g.integers(0, 10_000_000, 2000))
        res = timing.correlate(a, b, 2000, offset_ps=137)
        assert np.all(np.abs(res.times_a - (res.times_b + 137)) <= 1000)
        assert np.unique(res.pairs[:, 0]).shape[0] == res.count
        assert np.unique(res.pairs[:, 1]).shape[0] == res.count

    def test_window_monotonicity(self):
        g = rng(6)
        a = np.sort(g.integers(0, 1_000_000, 500))
        b = np.sort(g.integers(0, 1_000_000, 500))
        counts = [timing.correlate(a, b, w).count for w in (100, 1000, 10_000, 100_000)]
        assert all(c1 <= c2 for c1, c2 in zip(counts, counts[1:]))

    def test_empty_streams(self):
        assert timing.correlate([], [], 1000).count == 0
        assert timing.correlate([1, 2], [], 1000).count == 0

    @settings(max_examples=200, deadline=None)
    @given(
        a=st.lists(st.integers(0, 100_000), max_size=60),
        b=st.lists(st.integers(0, 100_000), max_size=60),
        window=st.integers(1, 5000),
        offset=st.integers(-2000, 2000),
    )
    def test_count_symmetric_under_swap(self, a, b, window, offset):
        fwd = timing.correlate(a, b, window, offset).count
        rev = timing.correlate(b, a, window, -offset).count
        assert fwd == rev

    def test_accepts_tag_records(self):
        from qnetem import tags
        arr = tags.make_tags([10, 20, 30], [0, 0, 0])
        res = timing.correlate(arr, [12, 29], 10)
        assert res.count == 2


class TestDelayHistogram:
    def test_sum_equals_inspan_pairs_bruteforce(self):
        g = rng(7)
        a = np.sort(g.integers(0, 100_000, 40)).astype(np.int64)
        b = np.sort(g.integers(0, 100_000, 50)).astype(np.int64)
        rng_ps, bin_ps = 8000, 500
        centers, counts = timing.delay_histogram(a, b, rng_ps, bin_ps)
        deltas = (b[None, :] - a[:, None]).ravel()
        want = int(np.sum((deltas >= -rng_ps) & (deltas < rng_ps)))
        assert int(counts.sum()) == want
        assert centers.shape[0] == 2 * rng_ps // bin_ps
        assert centers[0] == -rng_ps + bin_ps / 2

    def test_peak_at_true_delay(self):
        base = poisson_stream(5e4, 0.01, seed=8)
        b = base + 12_345
        centers, counts = timing.delay_histogram(base, b, 50_000, 1000)
        assert abs(float(centers[counts.argmax()]) - 12_345) <= 500

    def test_uniform_for_independent_streams(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        a = poisson_stream(1e4, 5.0, seed=9)
        b = poisson_stream(1e4, 5.0, seed=10)
        _, counts = timing.delay_histogram(a, b, 1_000_000, 20_000)
        expected = counts.sum() / counts.shape[0]
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        p = scipy_stats.chi2.sf(chi2, counts.shape[0] - 1)
        assert p > 0.001

    def test_rejects_bad_binning(self):
        with pytest.raises(ValueError):
            timing.delay_histogram([1], [2], 1000, 300)
        with pytest.raises(ValueError):
            timing.delay_histogram([1], [2], 0, 100)


class TestEstimateOffset:
    def _streams(self, true_offset_ps, seed, n_shared=400):
        g = rng(seed)
        base = np.sort(g.integers(0, int(1e12), n_shared)).astype(np.int64)
        jit_a = g.normal(0, 50, n_shared).astype(np.int64)
        jit_b = g.normal(0, 50, n_shared).astype(np.int64)
        extras_a = g.integers(0, int(1e12), 2000).astype(np.int64)
        extras_b = g.integers(0, int(1e12), 2000).astype(np.int64)
        a = np.sort(np.concatenate([base + jit_a, extras_a]))
        b = np.sort(np.concatenate([base + jit_b + true_offset_ps, extras_b]))
        return a, b

    def test_recovers_injected_offsets(self):
        for k, true in enumerate([0, 250_000, -1_750_000, 1_999_999, -3_003]):
            a, b = self._streams(true, seed=20 + k)
            est = timing.estimate_offset(a, b, search_range_ps=3_000_000, coarse_bin_ps=10_000)
            assert abs(est - true) <= 500, f"offset {true}: estimate {est}"

    def test_no_peak_for_independent_streams(self):
        a = poisson_stream(2e4, 1.0, seed=30)
        b = poisson_stream(2e4, 1.0, seed=31)
        with pytest.raises(EmulatorError) as e:
            timing.estimate_offset(a, b, 2_000_000, 10_000)
        assert e.value.code == "E_NO_PEAK"

    def test_estimate_feeds_correlate(self):
        a, b = self._streams(777_000, seed=40)
        est = timing.estimate_offset(a, b, 3_000_000, 10_000)
        matched = timing.correlate(a, b, 1000, offset_ps=-int(est)).count
        assert matched >= 350  # most of the 400 shared events


class TestClockModel:
    def test_affine_transform(self):
        clk = timing.ClockModel(offset_ps=500, drift_ppm=5.0)
        out = clk.apply([1_000_000, 2_000_000])
        assert out.tolist() == [1_000_505, 2_000_510]

    def test_identity_default(self):
        clk = timing.ClockModel()
        t = np.array([1, 2, 3], dtype=np.int64)
        assert np.array_equal(clk.apply(t), t)


class TestAccumulateCounts:
    def test_partition_preserves_totals(self):
        g = rng(50)
        streams = {
            0: np.sort(g.integers(0, 10_000_000, 900)),
            1: np.sort(g.integers(0, 10_000_000, 1100)),
        }
        records = timing.accumulate_counts(streams, 1_000_000, end_ps=10_000_000)
        assert len(records) == 10
        assert sum(r.singles[0] for r in records) == 900
        assert sum(r.singles[1] for r in records) == 1100
        for r in records:
            assert r.interval_len_ps == 1_000_000

    def test_coincidences_bounded_by_singles(self):
        base = poisson_stream(1e5, 0.01, seed=51)
        streams = {0: base, 1: base + 200}
        records = timing.accumulate_counts(
            streams, 1_000_000_000, pairs=[(0, 1)], window_ps=1000
        )
        for r in records:
            c = r.coincidences[(0, 1)]
            assert c <= min(r.singles[0], r.singles[1])
        total = sum(r.coincidences[(0, 1)] for r in records)
        assert total >= 0.95 * base.shape[0]  # 200 ps shift inside 1 ns window

    def test_empty_interval_records_zero(self):
        records = timing.accumulate_counts({0: np.array([5])}, 10, start_ps=0, end_ps=30)
        assert [r.singles[0] for r in records] == [1, 0, 0]
