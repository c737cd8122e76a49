"""Entanglement-based key distribution and trusted-relay stitching.

A session measures both arms of a delivered pair stream in randomly
chosen bases, locates coincidences by timestamp, and post-processes the
outcome record into a shared secret: basis sifting, sampled error
estimation, interactive parity reconciliation, and seeded universal
hashing. Hub-to-hub keys extend reach by XOR relaying through trusted
hubs.

Bit convention: the delivered state is anti-correlated in both analyzer
bases (rectilinear at 0 degrees on each side, diagonal at +45 on A and
-45 on B), so B flips its sifted bits to agree with A.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import tags as tagmod
from . import optics, timing
from .errors import (
    E_ABORT_QBER,
    E_EMPTY,
    E_LENGTH,
    E_NO_PEAK,
    E_TIMEOUT,
    EmulatorError,
)

# Analyzer angle per basis index, for each side.
ANALYZERS_A = (0.0, math.pi / 4)
ANALYZERS_B = (0.0, -math.pi / 4)

# Above this error rate the asymptotic key rate is negative; give up.
QBER_ABORT = 0.11


def binary_entropy(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return float(-q * math.log2(q) - (1 - q) * math.log2(1 - q))


def final_length(n_ec: int, q: float) -> int:
    """Post-amplification key length for n_ec reconciled bits at error q."""
    return max(0, math.floor(n_ec * (1.0 - 2.0 * binary_entropy(q))))


@dataclass(frozen=True)
class Bbm92Session:
    """Per-coincidence outcome record of one measurement session."""

    bases_a: np.ndarray
    bits_a: np.ndarray
    bases_b: np.ndarray
    bits_b: np.ndarray
    times_a: np.ndarray
    times_b: np.ndarray
    offset_ps: float
    n_emitted: int
    n_matched: int

    def __len__(self) -> int:
        return int(self.bases_a.shape[0])


def run_bbm92(
    stream: optics.PairStream,
    det_a: optics.DetectorModel,
    det_b: optics.DetectorModel,
    duration_s: float,
    n_target: int,
    rng: np.random.Generator,
    *,
    window_ps: int = timing.DEFAULT_WINDOW_PS,
    offset_ps: Optional[float] = None,
    analyzers_a: Sequence[float] = ANALYZERS_A,
    analyzers_b: Sequence[float] = ANALYZERS_B,
    search_range_ps: int = 5_000_000,
    coarse_bin_ps: int = 10_000,
) -> Bbm92Session:
    """Measure a delivered pair stream in random bases and pair up clicks.

    Each side draws an independent uniform basis per event and routes the
    outcome to detector channel 2*basis + bit. Coincidences are found by
    the timing correlator after self-calibrating the inter-arm delay
    (skipped when offset_ps is given). Raises E_TIMEOUT when fewer than
    n_target coincidences survive.
    """
    n = len(stream)
    bases_a = rng.integers(0, 2, n).astype(np.uint8)
    bases_b = rng.integers(0, 2, n).astype(np.uint8)
    bits_a = np.zeros(n, dtype=np.uint8)
    bits_b = np.zeros(n, dtype=np.uint8)
    for ba in (0, 1):
        for bb in (0, 1):
            mask = (bases_a == ba) & (bases_b == bb)
            if not mask.any():
                continue
            res = optics.measure(stream.take(mask), analyzers_a[ba], analyzers_b[bb], rng)
            bits_a[mask] = res.bits_a
            bits_b[mask] = res.bits_b

    def side_tags(times, alive, bases, bits, node):
        sel = np.asarray(alive, dtype=bool)
        channels = (2 * bases + bits)[sel]
        return tagmod.make_tags(np.asarray(times)[sel], channels, node=node)

    arr_a = side_tags(stream.time_a_ps, stream.alive_a, bases_a, bits_a, node=0)
    arr_b = side_tags(stream.time_b_ps, stream.alive_b, bases_b, bits_b, node=1)
    det_tags_a = optics.detect(arr_a, det_a, duration_s, rng, node=0)
    det_tags_b = optics.detect(arr_b, det_b, duration_s, rng, node=1)

    if offset_ps is None:
        try:
            offset_ps = timing.estimate_offset(
                det_tags_a, det_tags_b, search_range_ps, coarse_bin_ps, window_ps=window_ps
            )
        except EmulatorError as e:
            if e.code == E_NO_PEAK:
                raise EmulatorError(E_TIMEOUT, "no coincidence peak; link blocked or rate too low")
            raise
    cor = timing.correlate(det_tags_a, det_tags_b, window_ps, offset_ps=-int(round(offset_ps)))
    if cor.count < n_target:
        raise EmulatorError(E_TIMEOUT, f"{cor.count} coincidences, target {n_target}")

    idx = slice(0, n_target)
    ch_a = det_tags_a["channel"][cor.pairs[idx, 0]]
    ch_b = det_tags_b["channel"][cor.pairs[idx, 1]]
    return Bbm92Session(
        bases_a=(ch_a >> 1).astype(np.uint8),
        bits_a=(ch_a & 1).astype(np.uint8),
        bases_b=(ch_b >> 1).astype(np.uint8),
        bits_b=(ch_b & 1).astype(np.uint8),
        times_a=cor.times_a[idx].copy(),
        times_b=cor.times_b[idx].copy(),
        offset_ps=float(offset_ps),
        n_emitted=n,
        n_matched=cor.count,
    )


@dataclass(frozen=True)
class SiftResult:
    """Key material kept where both sides measured in the same basis."""

    key_a: np.ndarray
    key_b: np.ndarray
    mask: np.ndarray

    def __len__(self) -> int:
        return int(self.key_a.shape[0])


def sift(bases_a, bases_b, bits_a, bits_b) -> SiftResult:
    """Keep matching-basis outcomes; B's bits are flipped to align keys."""
    bases_a = np.asarray(bases_a)
    bases_b = np.asarray(bases_b)
    if bases_a.shape != bases_b.shape:
        raise ValueError("basis sequences must have matching length")
    mask = bases_a == bases_b
    key_a = np.asarray(bits_a)[mask].astype(np.uint8)
    key_b = (1 - np.asarray(bits_b)[mask]).astype(np.uint8)
    return SiftResult(key_a=key_a, key_b=key_b, mask=mask)


@dataclass(frozen=True)
class QberEstimate:
    qber: float
    disclosed: np.ndarray
    key_a: np.ndarray
    key_b: np.ndarray


def estimate_qber(key_a, key_b, sample_fraction: float, rng) -> QberEstimate:
    """Disclose a random sample to estimate the error rate.

    Disclosed positions are removed from the returned key material.
    """
    if not 0.0 < sample_fraction < 1.0:
        raise ValueError("sample_fraction must be in (0, 1)")
    key_a = np.asarray(key_a)
    key_b = np.asarray(key_b)
    n = key_a.shape[0]
    if n == 0:
        raise EmulatorError(E_EMPTY, "no sifted bits to sample")
    k = max(1, int(round(sample_fraction * n)))
    disclosed = np.sort(rng.choice(n, size=k, replace=False))
    q = float(np.count_nonzero(key_a[disclosed] != key_b[disclosed])) / k
    keep = np.ones(n, dtype=bool)
    keep[disclosed] = False
    return QberEstimate(qber=q, disclosed=disclosed, key_a=key_a[keep], key_b=key_b[keep])


def _binary_fix(key_a, key_b, block) -> int:
    """Locate and flip one error inside a parity-mismatched block."""
    disclosed = 0
    while block.shape[0] > 1:
        half = block[: block.shape[0] // 2]
        disclosed += 1
        if int(key_a[half].sum() & 1) != int(key_b[half].sum() & 1):
            block = half
        else:
            block = block[block.shape[0] // 2 :]
    key_b[block[0]] ^= 1
    return disclosed


def reconcile(key_a, key_b, q: float, rng) -> tuple[np.ndarray, int]:
    """Interactive parity bisection until B's key matches A's.

    Runs shuffled passes; every parity-mismatched block gives up one
    error to binary search. Returns the corrected B key and the number
    of parity bits disclosed along the way.
    """
    key_a = np.asarray(key_a, dtype=np.uint8)
    key_b = np.asarray(key_b, dtype=np.uint8).copy()
    n = key_a.shape[0]
    if n == 0:
        return key_b, 0
    block = n if q <= 0 else max(2, int(round(0.73 / q)))
    # keep at least two blocks per pass so reshuffling can split an
    # even number of residual errors into odd-parity blocks
    cap = max(1, n // 2)
    disclosed = 0
    for _ in range(1000):
        if np.array_equal(key_a, key_b):
            return key_b, disclosed
        order = rng.permutation(n)
        for start in range(0, n, block):
            blk = order[start : start + block]
            disclosed += 1
            if int(key_a[blk].sum() & 1) != int(key_b[blk].sum() & 1):
                disclosed += _binary_fix(key_a, key_b, blk)
        block = min(cap, block * 2)
    raise EmulatorError(E_ABORT_QBER, "reconciliation failed to converge")


def toeplitz_hash(key, m: int, seed_bits) -> np.ndarray:
    """Compress a bit string with a Toeplitz matrix built from seed_bits.

    seed_bits supplies the m + n - 1 diagonal entries. The product is a
    full convolution slice, which keeps the cost linear in n*m without
    materializing the matrix.
    """
    key = np.asarray(key, dtype=np.int64)
    n = key.shape[0]
    d = np.asarray(seed_bits, dtype=np.int64)
    if d.shape[0] != m + n - 1:
        raise ValueError("seed must provide m + n - 1 bits")
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    conv = np.convolve(d, key)
    return (conv[n - 1 : n - 1 + m] & 1).astype(np.uint8)


@dataclass(frozen=True)
class DistillResult:
    key_a: np.ndarray
    key_b: np.ndarray
    length: int
    disclosed_parities: int


def distill(key_a, key_b, q: float, rng) -> DistillResult:
    """Reconcile and compress sifted keys into the final shared secret.

    The output length is floor(n * (1 - 2*h2(q))) for n reconciled bits.
    Raises E_ABORT_QBER at or above the 0.11 error rate where the rate
    formula goes negative.
    """
    if q >= QBER_ABORT:
        raise EmulatorError(E_ABORT_QBER, f"error rate {q:.4f} at or above {QBER_ABORT}")
    key_a = np.asarray(key_a, dtype=np.uint8)
    key_b_fixed, disclosed = reconcile(key_a, key_b, q, rng)
    n = key_a.shape[0]
    m = final_length(n, q)
    seed = rng.integers(0, 2, m + n - 1) if m > 0 else np.zeros(0, dtype=np.int64)
    out_a = toeplitz_hash(key_a, m, seed)
    out_b = toeplitz_hash(key_b_fixed, m, seed)
    return DistillResult(key_a=out_a, key_b=out_b, length=m, disclosed_parities=disclosed)


def relay_key(key_ae, chain: Sequence, key_be) -> tuple[np.ndarray, list[np.ndarray]]:
    """Extend key_ae to the far endpoint through a chain of trusted hubs.

    Each hub publishes the XOR of its two adjacent keys; the far end
    telescopes the published messages against key_be and recovers
    key_ae. Returns (derived end-to-end key, published messages).
    """
    key_ae = np.asarray(key_ae, dtype=np.uint8)
    key_be = np.asarray(key_be, dtype=np.uint8)
    links = [key_ae] + [np.asarray(k, dtype=np.uint8) for k in chain] + [key_be]
    for k in links[1:]:
        if k.shape != key_ae.shape:
            raise EmulatorError(E_LENGTH, "relay keys must share one length")
    messages = [links[i] ^ links[i + 1] for i in range(len(links) - 1)]
    derived = key_be.copy()
    for msg in reversed(messages):
        derived ^= msg
    return derived, messages


def key_digest(key) -> str:
    bits = np.asarray(key, dtype=np.uint8)
    return hashlib.sha256(np.packbits(bits).tobytes()).hexdigest()


def transcript(
    session: Bbm92Session,
    sifted: SiftResult,
    estimate: QberEstimate,
    result: Optional[DistillResult] = None,
) -> dict:
    """JSON-ready session record: bases, sift mask, disclosures, digest.

    The final key itself never appears, only its digest.
    """

    def bitstring(arr):
        return "".join(str(int(v)) for v in np.asarray(arr).ravel())

    doc = {
        "format": "qkd-transcript.v1",
        "n_emitted": session.n_emitted,
        "n_coincidences": len(session),
        "offset_ps": session.offset_ps,
        "bases_a": bitstring(session.bases_a),
        "bases_b": bitstring(session.bases_b),
        "sift_mask": bitstring(sifted.mask.astype(np.uint8)),
        "n_sifted": len(sifted),
        "disclosed_indices": [int(i) for i in estimate.disclosed],
        "qber": estimate.qber,
        "final_length": None,
        "disclosed_parities": None,
        "key_digest": None,
    }
    if result is not None:
        doc["final_length"] = result.length
        doc["disclosed_parities"] = result.disclosed_parities
        doc["key_digest"] = key_digest(result.key_a)
    return doc


def transcript_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)
