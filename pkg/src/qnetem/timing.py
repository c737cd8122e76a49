"""Coincidence timing: tag correlation, delay histograms, offset recovery.

Tag streams are int64 picosecond arrays (or tag record arrays from
:mod:`qnetem.tags`). Coincidence matching is greedy earliest-first and
one-to-one: walk both sorted streams with two pointers and pair tags
whose offset-corrected separation fits inside the window. Offset
recovery histograms all cross-stream delays over a search range, takes
the peak bin, and refines it with one finer pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import E_NO_PEAK, EmulatorError

DEFAULT_WINDOW_PS = 1000


def _as_times(stream) -> np.ndarray:
    arr = np.asarray(stream)
    if arr.dtype.names and "time_ps" in arr.dtype.names:
        arr = arr["time_ps"]
    return np.sort(arr.astype(np.int64))


@dataclass(frozen=True)
class CoincidenceResult:
    pairs: np.ndarray  # (k, 2) indices into the sorted input streams
    times_a: np.ndarray  # matched tag times, arm A
    times_b: np.ndarray

    @property
    def count(self) -> int:
        return int(self.pairs.shape[0])


@dataclass(frozen=True)
class ClockModel:
    """Affine local clock: t' = t * (1 + ppm * 1e-6) + offset_ps."""

    offset_ps: int = 0
    drift_ppm: float = 0.0

    def apply(self, times_ps) -> np.ndarray:
        t = np.asarray(times_ps, dtype=np.int64)
        scaled = np.rint(t.astype(np.float64) * (1.0 + self.drift_ppm * 1e-6))
        return scaled.astype(np.int64) + self.offset_ps


@dataclass(frozen=True)
class CountRecord:
    """Singles and coincidences accumulated over one interval."""

    interval_start_ps: int
    interval_len_ps: int
    singles: dict[int, int] = field(default_factory=dict)
    coincidences: dict[tuple[int, int], int] = field(default_factory=dict)


def correlate(
    stream_a, stream_b, window_ps: int = DEFAULT_WINDOW_PS, offset_ps: int = 0
) -> CoincidenceResult:
    """Greedy earliest-first one-to-one coincidence matching.

    Tags ``ta`` and ``tb`` match when |ta - (tb + offset_ps)| <= window/2;
    each tag joins at most one pair. Runs in O(n + m) over the sorted
    streams. Swapping the streams and negating the offset yields the same
    number of matches.
    """
    a = _as_times(stream_a)
    b = _as_times(stream_b) + np.int64(offset_ps)
    half = window_ps // 2
    i = j = 0
    pairs = []
    n, m = a.shape[0], b.shape[0]
    while i < n and j < m:
        d = a[i] - b[j]
        if d > half:
            j += 1
        elif d < -half:
            i += 1
        else:
            pairs.append((i, j))
            i += 1
            j += 1
    idx = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return CoincidenceResult(idx, a[idx[:, 0]], b[idx[:, 1]] - np.int64(offset_ps))


def delay_histogram(
    stream_a,
    stream_b,
    range_ps: int,
    bin_ps: int,
    center_ps: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of cross-stream delays (tb - ta) around ``center_ps``.

    Covers the half-open span [center - range, center + range) with equal
    ``bin_ps`` bins; ``range_ps`` must be a positive multiple of
    ``bin_ps``. Returns (bin_centers, counts); the counts sum to the
    number of in-span cross pairs.
    """
    if range_ps <= 0 or bin_ps <= 0 or range_ps % bin_ps != 0:
        raise ValueError("range_ps must be a positive multiple of bin_ps")
    a = _as_times(stream_a)
    b = _as_times(stream_b)
    n_bins = 2 * range_ps // bin_ps
    edges = center_ps - range_ps + np.arange(n_bins + 1, dtype=np.int64) * bin_ps
    counts = np.zeros(n_bins, dtype=np.int64)
    if a.shape[0] and b.shape[0]:
        lo = np.searchsorted(b, a + (center_ps - range_ps), side="left")
        hi = np.searchsorted(b, a + (center_ps + range_ps), side="left")
        spans = hi - lo
        total = int(spans.sum())
        if total:
            deltas = np.empty(total, dtype=np.int64)
            pos = 0
            for ai, (l, h) in enumerate(zip(lo.tolist(), hi.tolist())):
                if h > l:
                    deltas[pos : pos + h - l] = b[l:h] - a[ai]
                    pos += h - l
            idx = (deltas - (center_ps - range_ps)) // bin_ps
            np.add.at(counts, idx, 1)
    centers = edges[:-1] + bin_ps / 2.0
    return centers, counts


def estimate_offset(
    stream_a,
    stream_b,
    search_range_ps: int,
    coarse_bin_ps: int,
    window_ps: int = DEFAULT_WINDOW_PS,
) -> float:
    """Recover the clock offset between two streams sharing coincidences.

    Runs a coarse delay histogram over +/- ``search_range_ps``, requires
    the peak bin to stand at least five times above the median bin
    (E_NO_PEAK otherwise), then refines with one finer pass at bin width
    ``window_ps // 4`` around the coarse peak. Returns the refined peak
    center: the delay tb - ta at which the streams coincide.
    """
    centers, counts = delay_histogram(stream_a, stream_b, search_range_ps, coarse_bin_ps)
    peak = int(counts.max()) if counts.shape[0] else 0
    floor = max(float(np.median(counts)), 1.0)
    if peak < 5 * floor:
        raise EmulatorError(E_NO_PEAK, f"peak {peak} below 5x median floor {floor:.1f}")
    coarse = int(round(float(centers[int(counts.argmax())])))

    fine_bin = max(window_ps // 4, 1)
    fine_range = coarse_bin_ps
    if fine_range % fine_bin != 0:
        fine_range = (fine_range // fine_bin + 1) * fine_bin
    f_centers, f_counts = delay_histogram(
        stream_a, stream_b, fine_range, fine_bin, center_ps=coarse
    )
    if not f_counts.any():
        raise EmulatorError(E_NO_PEAK, "fine pass found no delays near the coarse peak")
    return float(f_centers[int(f_counts.argmax())])


def accumulate_counts(
    streams: dict[int, np.ndarray],
    interval_len_ps: int,
    pairs: Sequence[tuple[int, int]] = (),
    window_ps: int = DEFAULT_WINDOW_PS,
    start_ps: int = 0,
    end_ps: Optional[int] = None,
    offsets_ps: Optional[dict[tuple[int, int], int]] = None,
) -> list[CountRecord]:
    """Partition tag streams into intervals of singles and coincidences.

    ``streams`` maps channel id to tag times; ``pairs`` lists the channel
    pairs to correlate inside each interval (optionally with per-pair
    offsets). Every tag lands in exactly one interval's singles count.
    """
    times = {ch: _as_times(s) for ch, s in streams.items()}
    if end_ps is None:
        highs = [int(t[-1]) for t in times.values() if t.shape[0]]
        end_ps = (max(highs) + 1) if highs else start_ps + interval_len_ps
    records: list[CountRecord] = []
    offsets_ps = offsets_ps or {}
    cursor = start_ps
    while cursor < end_ps:
        hi = cursor + interval_len_ps
        singles = {}
        window_slices = {}
        for ch, t in times.items():
            l, h = np.searchsorted(t, [cursor, hi])
            singles[ch] = int(h - l)
            window_slices[ch] = t[l:h]
        coincidences = {}
        for ch_a, ch_b in pairs:
            res = correlate(
                window_slices.get(ch_a, np.empty(0, dtype=np.int64)),
                window_slices.get(ch_b, np.empty(0, dtype=np.int64)),
                window_ps,
                offsets_ps.get((ch_a, ch_b), 0),
            )
            coincidences[(ch_a, ch_b)] = res.count
        records.append(CountRecord(cursor, interval_len_ps, singles, coincidences))
        cursor = hi
    return records
