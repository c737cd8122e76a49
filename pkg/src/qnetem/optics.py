"""Photon-pair optics: sources, prepare modules, channels, detectors.

The Monte Carlo here works at the pair level. A continuous-wave type-II
downconversion source emits orthogonally polarized pairs at Poisson
times; a prepare module either post-selects them into the entangled
state (|HV> + |VH>)/sqrt(2) on a beamsplitter (success probability 1/2,
the two split-port cases of four) or splits them deterministically into
a herald and an |H> signal photon. Channels thin photons by their dB
loss, rotate polarization, and add latency at 5 ns per meter. Analyzers
sample joint outcomes from the Born rule, and detectors apply quantum
efficiency, Gaussian timing jitter, dark counts, and a non-paralyzable
dead time.

Every operation is a pure function over an explicit numpy Generator:
same seed, same photons.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import jones, tags
from .topology import OpticalPath, PathSegment

PS_PER_SECOND = 1_000_000_000_000
PS_PER_M = 5000.0  # group delay at 5 ns/m

ENTANGLED = "entangled"
HERALDED = "heralded"

# Two-qubit amplitude vectors over (HH, HV, VH, VV).
STATE_HV = np.array([0, 1, 0, 0], dtype=complex)
STATE_PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class BiphotonSource:
    """CW type-II downconversion source; emits |HV> pairs at Poisson times."""

    source_id: str
    pair_rate_hz: float
    wavelength_nm: float = 1570.0
    bandwidth_nm: float = 2.0

    def __post_init__(self):
        if self.pair_rate_hz <= 0:
            raise ValueError("pair_rate_hz must be positive")


@dataclass(frozen=True)
class ChannelModel:
    """One fiber lane: attenuation, a polarization rotation, drift rate."""

    loss_db: float = 0.0
    rotation: np.ndarray = field(default_factory=lambda: jones.IDENTITY.copy())
    drift_rate: float = 0.0  # radians per sqrt(second) on the Poincare sphere


@dataclass(frozen=True)
class DetectorModel:
    """Detector bank model (nanowire-style): shared per-channel parameters."""

    efficiency: float = 0.8
    dark_rate_hz: float = 0.0
    jitter_ps: float = 0.0
    dead_ps: int = 0
    channel_count: int = 8

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.dark_rate_hz < 0 or self.jitter_ps < 0 or self.dead_ps < 0:
            raise ValueError("dark rate, jitter, dead time must be non-negative")


@dataclass
class PairStream:
    """Batch of photon pairs with per-arm arrival times and alive flags."""

    emit_ps: np.ndarray  # int64 emission times
    time_a_ps: np.ndarray  # int64 arm-A arrival times
    time_b_ps: np.ndarray
    states: np.ndarray  # (n, 4) complex amplitudes over (HH, HV, VH, VV)
    alive_a: np.ndarray  # bool
    alive_b: np.ndarray
    mode: str = "raw"
    herald_arm: Optional[str] = None

    def __len__(self) -> int:
        return int(self.emit_ps.shape[0])

    def take(self, index) -> "PairStream":
        """Sub-stream selected by a boolean mask or index array."""
        return PairStream(
            emit_ps=self.emit_ps[index],
            time_a_ps=self.time_a_ps[index],
            time_b_ps=self.time_b_ps[index],
            states=self.states[index],
            alive_a=self.alive_a[index],
            alive_b=self.alive_b[index],
            mode=self.mode,
            herald_arm=self.herald_arm,
        )


@dataclass(frozen=True)
class MeasureResult:
    """Joint analyzer outcomes; bits are meaningful where the arm is alive."""

    bits_a: np.ndarray
    bits_b: np.ndarray
    alive_a: np.ndarray
    alive_b: np.ndarray


@dataclass(frozen=True)
class RateConfig:
    """Closed-form link budget for one source feeding two arms."""

    pair_rate_hz: float
    mode: str
    loss_a_db: float = 0.0
    efficiency_a: float = 1.0
    dark_a_hz: float = 0.0
    loss_b_db: float = 0.0
    efficiency_b: float = 1.0
    dark_b_hz: float = 0.0


@dataclass(frozen=True)
class Rates:
    singles_a_hz: float
    singles_b_hz: float
    coincidences_hz: float
    accidentals_hz: float


def transmittance(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


def make_link(loss_db: float = 0.0, length_m: float = 0.0, rotation=None) -> OpticalPath:
    """Single-segment path for driving the optics without a full topology."""
    seg = PathSegment("fiber", "link", 0, loss_db, length_m)
    rot = jones.IDENTITY if rotation is None else np.asarray(rotation, dtype=complex)
    return OpticalPath("a", "b", (seg,), rot)


# ---------------------------------------------------------------------------
# Monte Carlo pipeline
# ---------------------------------------------------------------------------


def generate_pairs(
    source: BiphotonSource, duration_s: float, rng: np.random.Generator
) -> PairStream:
    """Emit raw |HV> pairs at homogeneous Poisson times over ``duration_s``."""
    n = int(rng.poisson(source.pair_rate_hz * duration_s))
    span = duration_s * PS_PER_SECOND
    times = np.sort(rng.random(n) * span).astype(np.int64)
    states = np.tile(STATE_HV, (n, 1))
    alive = np.ones(n, dtype=bool)
    return PairStream(times, times.copy(), times.copy(), states, alive, alive.copy())


def prepare(stream: PairStream, mode: str, rng: np.random.Generator) -> PairStream:
    """Run pairs through a prepare module.

    ``entangled`` post-selects the beamsplitter split cases (probability
    1/2 each pair) and rewrites survivors to (|HV> + |VH>)/sqrt(2);
    ``heralded`` keeps every pair, arm A carrying the |H> signal and arm B
    the herald.
    """
    if mode == ENTANGLED:
        keep = rng.random(len(stream)) < 0.5
        n = int(keep.sum())
        return PairStream(
            emit_ps=stream.emit_ps[keep],
            time_a_ps=stream.time_a_ps[keep],
            time_b_ps=stream.time_b_ps[keep],
            states=np.tile(STATE_PSI_PLUS, (n, 1)),
            alive_a=stream.alive_a[keep].copy(),
            alive_b=stream.alive_b[keep].copy(),
            mode=ENTANGLED,
        )
    if mode == HERALDED:
        return PairStream(
            emit_ps=stream.emit_ps.copy(),
            time_a_ps=stream.time_a_ps.copy(),
            time_b_ps=stream.time_b_ps.copy(),
            states=np.tile(STATE_HV, (len(stream), 1)),
            alive_a=stream.alive_a.copy(),
            alive_b=stream.alive_b.copy(),
            mode=HERALDED,
            herald_arm="b",
        )
    raise ValueError(f"unknown prepare mode {mode!r}")


def propagate(
    stream: PairStream,
    path: OpticalPath,
    arm: str,
    rng: np.random.Generator,
    ps_per_m: float = PS_PER_M,
) -> PairStream:
    """Send one arm through an optical path.

    Photons survive with probability 10^(-loss/10); the path's net
    rotation acts on that arm of every pair state; arrival times advance
    by the path latency.
    """
    if arm not in ("a", "b"):
        raise ValueError("arm must be 'a' or 'b'")
    n = len(stream)
    survive = rng.random(n) < transmittance(path.total_loss_db)
    latency = np.int64(round(path.total_length_m * ps_per_m))
    states = jones.apply_arm(stream.states, path.net_rotation, arm)
    new = replace(
        stream,
        emit_ps=stream.emit_ps.copy(),
        states=states,
        alive_a=stream.alive_a.copy(),
        alive_b=stream.alive_b.copy(),
        time_a_ps=stream.time_a_ps.copy(),
        time_b_ps=stream.time_b_ps.copy(),
    )
    if arm == "a":
        new.alive_a &= survive
        new.time_a_ps += latency
    else:
        new.alive_b &= survive
        new.time_b_ps += latency
    return new


def measure(
    stream: PairStream, theta_a: float, theta_b: float, rng: np.random.Generator
) -> MeasureResult:
    """Sample joint analyzer outcomes at fixed angles from the Born rule.

    Outcome bit 0 is the analyzer's transmitted port (angle theta), bit 1
    the orthogonal port. Pairs with a lost arm still get a sampled joint
    outcome; sampling the joint distribution and ignoring the dead arm is
    exactly marginal sampling for the surviving one.
    """
    probs = jones.joint_probabilities(stream.states, theta_a, theta_b)
    probs = probs / probs.sum(axis=1, keepdims=True)
    u = rng.random(len(stream))
    cum = np.cumsum(probs, axis=1)
    outcome = (u[:, None] >= cum).sum(axis=1)
    bits_a = (outcome >> 1).astype(np.int8)
    bits_b = (outcome & 1).astype(np.int8)
    return MeasureResult(bits_a, bits_b, stream.alive_a.copy(), stream.alive_b.copy())


def arm_arrivals(
    stream: PairStream,
    arm: str,
    channel: int = 0,
    node: int = 0,
    bits: Optional[np.ndarray] = None,
    channel_pair: Optional[tuple[int, int]] = None,
) -> np.ndarray:
    """Ideal arrival tags for one arm's surviving photons.

    With ``bits`` and ``channel_pair`` given, outcome 0 routes to the
    first channel and outcome 1 to the second (the two analyzer ports);
    otherwise everything lands on ``channel``.
    """
    alive = stream.alive_a if arm == "a" else stream.alive_b
    times = (stream.time_a_ps if arm == "a" else stream.time_b_ps)[alive]
    if bits is not None:
        if channel_pair is None:
            raise ValueError("channel_pair required when routing by outcome")
        ch = np.where(bits[alive] == 0, channel_pair[0], channel_pair[1])
    else:
        ch = np.full(times.shape[0], channel)
    return tags.make_tags(times, ch, node=node, origin=tags.ORIGIN_PHOTON)


def detect(
    arrivals: np.ndarray,
    det: DetectorModel,
    duration_s: float,
    rng: np.random.Generator,
    node: int = 0,
) -> np.ndarray:
    """Turn ideal arrivals into detector clicks.

    Applies efficiency thinning, Gaussian jitter rounded half-to-even to
    integer picoseconds, Poisson dark counts spread uniformly over the
    observation span, and a per-channel non-paralyzable dead time. The
    result is one merged tag array sorted by time.
    """
    arrivals = np.asarray(arrivals, dtype=tags.TAG_DTYPE)
    keep = rng.random(arrivals.shape[0]) < det.efficiency
    kept = arrivals[keep].copy()
    if det.jitter_ps > 0 and kept.shape[0]:
        jitter = rng.normal(0.0, det.jitter_ps, kept.shape[0])
        shifted = np.rint(kept["time_ps"].astype(np.float64) + jitter)
        kept["time_ps"] = np.maximum(shifted, 0.0).astype(np.uint64)

    span_ps = duration_s * PS_PER_SECOND
    n_dark = int(rng.poisson(det.dark_rate_hz * duration_s * det.channel_count))
    if n_dark:
        dark_times = np.rint(rng.random(n_dark) * span_ps).astype(np.uint64)
        dark_ch = rng.integers(0, det.channel_count, n_dark).astype(np.uint8)
        dark = tags.make_tags(dark_times, dark_ch, node=node, origin=tags.ORIGIN_DARK)
        merged = np.concatenate([kept, dark])
    else:
        merged = kept
    merged = tags.sort_tags(merged)
    if det.dead_ps <= 0 or merged.shape[0] == 0:
        return merged

    keep_mask = np.zeros(merged.shape[0], dtype=bool)
    last_by_channel: dict[int, int] = {}
    times = merged["time_ps"].astype(np.int64).tolist()
    chans = merged["channel"].tolist()
    dead = int(det.dead_ps)
    for i, (t, c) in enumerate(zip(times, chans)):
        last = last_by_channel.get(c)
        if last is None or t - last >= dead:
            keep_mask[i] = True
            last_by_channel[c] = t
    return merged[keep_mask]


def expected_rates(cfg: RateConfig, window_ps: float = 1000.0) -> Rates:
    """Analytic singles, coincidence, and accidental rates for a link.

    The entangled prepare mode post-selects half the pairs away, so the
    effective pair rate into both arms is halved; heralded mode keeps
    every pair. Accidentals follow the usual S_a * S_b * window product.
    """
    eff_rate = cfg.pair_rate_hz * (0.5 if cfg.mode == ENTANGLED else 1.0)
    t_a = transmittance(cfg.loss_a_db) * cfg.efficiency_a
    t_b = transmittance(cfg.loss_b_db) * cfg.efficiency_b
    singles_a = eff_rate * t_a + cfg.dark_a_hz
    singles_b = eff_rate * t_b + cfg.dark_b_hz
    coinc = eff_rate * t_a * t_b
    acc = singles_a * singles_b * (window_ps / PS_PER_SECOND)
    return Rates(singles_a, singles_b, coinc, acc)
