"""Automatic polarization control.

Fiber birefringence slowly rotates the polarization state of transiting
photons, which shows up as wrong-outcome coincidences at the analyzers.
Each controlled channel carries a four-stage compensator (alternating
Z and X retarders); the first three stages form a ZXZ Euler sandwich, so
the stack can realize any residual rotation, and the fourth gives the
feedback loop a redundant axis to escape shallow valleys.

The loop never sees the underlying Jones matrix. It only sees an error
signal, the fraction of coincidences landing in the wrong outcome, and
walks the stage angles by coordinate descent until the signal falls
below target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jones
from .errors import E_STARVED, EmulatorError

# Analyzer settings (theta_a, theta_b) for the two measurement bases.
# The entangled state is anti-correlated under both of these pairs.
BASIS_RECT = (0.0, 0.0)
BASIS_DIAG = (math.pi / 4, -math.pi / 4)
BASES_BOTH = (BASIS_RECT, BASIS_DIAG)

# Below this many coincidences the error fraction is too noisy to act on.
MIN_COINCIDENCES = 20

MIN_STEP = 1e-4
MAX_STEP = 0.5

_PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)


def apply_drift(rotation, rate, dt_s, rng):
    """Advance a channel rotation by one random-walk drift step.

    The step is a rotation about a uniformly random axis with angle
    magnitude drawn from |N(0, rate*sqrt(dt_s))|, so variance grows
    linearly in elapsed time as expected for a diffusive process.
    """
    if rate < 0 or dt_s < 0:
        raise ValueError("rate and dt_s must be non-negative")
    if rate == 0 or dt_s == 0:
        return np.array(rotation, dtype=complex)
    angle = abs(rng.normal(0.0, rate * math.sqrt(dt_s)))
    axis = jones.random_axis(rng)
    return jones.axis_angle_unitary(axis, angle) @ np.asarray(rotation, dtype=complex)


def correction_unitary(angles):
    """Jones matrix of the compensator stack for the given stage angles.

    Stage i applies retarder_z for even i and retarder_x for odd i, in
    index order along the light path.
    """
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (4,):
        raise ValueError("expected four stage angles")
    u = jones.IDENTITY
    for i, a in enumerate(angles):
        stage = jones.retarder_z(a) if i % 2 == 0 else jones.retarder_x(a)
        u = stage @ u
    return u


def euler_zxz(u):
    """Split a 2x2 unitary into Rz(alpha) Rx(beta) Rz(gamma) up to phase."""
    u = np.asarray(u, dtype=complex)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    s = u / np.sqrt(det)
    beta = 2.0 * math.atan2(abs(s[1, 0]), abs(s[0, 0]))
    if abs(s[1, 0]) < 1e-12:
        return 2.0 * float(np.angle(s[1, 1])), beta, 0.0
    if abs(s[0, 0]) < 1e-12:
        return 2.0 * (float(np.angle(s[1, 0])) + math.pi / 2), beta, 0.0
    half_sum = float(np.angle(s[1, 1]))
    half_diff = float(np.angle(s[1, 0])) + math.pi / 2
    return half_sum + half_diff, beta, half_sum - half_diff


def inverse_angles(rotation):
    """Stage angles whose compensator cancels the given channel rotation."""
    target = np.asarray(rotation, dtype=complex).conj().T
    alpha, beta, gamma = euler_zxz(target)
    return np.array([gamma, beta, alpha, 0.0])


def error_signal(bits_a, bits_b):
    """Wrong-outcome fraction of a batch of coincidence outcomes.

    Correct outcomes are anti-correlated, so a coincidence counts as
    wrong when both analyzers report the same bit.
    """
    bits_a = np.asarray(bits_a)
    bits_b = np.asarray(bits_b)
    if bits_a.shape != bits_b.shape:
        raise ValueError("bit arrays must have matching shape")
    n = bits_a.shape[0]
    if n < MIN_COINCIDENCES:
        raise EmulatorError(E_STARVED, f"only {n} coincidences, need {MIN_COINCIDENCES}")
    return float(np.count_nonzero(bits_a == bits_b)) / n


def born_error(rotation, angles, bases=BASES_BOTH):
    """Exact wrong-outcome probability for a residual arm rotation.

    The compensator acts after the channel on the same arm, so the
    residual rotation is correction @ rotation. Averaged over bases.
    """
    residual = correction_unitary(angles) @ np.asarray(rotation, dtype=complex)
    state = jones.apply_arm(_PSI_PLUS, residual, "a")
    total = 0.0
    for theta_a, theta_b in bases:
        p = jones.joint_probabilities(state, theta_a, theta_b)
        total += float(p[0] + p[3])
    return total / len(bases)


def noiseless_probe(rotation, bases=BASES_BOTH):
    """Probe returning the exact error for candidate stage angles."""

    def probe(angles):
        return born_error(rotation, angles, bases)

    return probe


def sampled_probe(rotation, n_pairs, rng, bases=BASES_BOTH):
    """Probe with shot noise: n_pairs coincidences split across bases.

    Drawing the wrong-outcome count from a binomial with the exact Born
    probability is equivalent to tallying that many simulated pair
    measurements, at a fraction of the cost.
    """
    if n_pairs < MIN_COINCIDENCES:
        raise EmulatorError(E_STARVED, f"only {n_pairs} pairs per probe, need {MIN_COINCIDENCES}")

    def probe(angles):
        residual = correction_unitary(angles) @ np.asarray(rotation, dtype=complex)
        state = jones.apply_arm(_PSI_PLUS, residual, "a")
        per_basis = n_pairs // len(bases)
        wrong = 0
        for theta_a, theta_b in bases:
            p = jones.joint_probabilities(state, theta_a, theta_b)
            wrong += rng.binomial(per_basis, min(1.0, float(p[0] + p[3])))
        return wrong / (per_basis * len(bases))

    return probe


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of a stabilization run."""

    angles: np.ndarray
    error: float
    evaluations: int
    converged: bool


def stabilize(probe, initial_angles=None, target=0.02, max_evals=500, step=0.25):
    """Drive the compensator until the probed error falls below target.

    Coordinate descent: every sweep tries each stage at +step and -step
    and keeps the best of the three candidates. A sweep with no
    improvement halves the step; collapsing below MIN_STEP re-expands to
    MAX_STEP so a noisy or misconverged run can escape. Each probe call
    counts as one evaluation, including the initial one.
    """
    angles = np.zeros(4) if initial_angles is None else np.array(initial_angles, dtype=float)
    if angles.shape != (4,):
        raise ValueError("expected four stage angles")

    best = float(probe(angles))
    evals = 1
    if best <= target:
        return AlignmentResult(angles, best, evals, True)

    while evals < max_evals:
        improved = False
        for i in range(4):
            for sign in (1.0, -1.0):
                if evals >= max_evals:
                    break
                trial = angles.copy()
                trial[i] += sign * step
                err = float(probe(trial))
                evals += 1
                if err < best:
                    best, angles, improved = err, trial, True
                if best <= target:
                    return AlignmentResult(angles, best, evals, True)
        if not improved:
            step *= 0.5
            if step < MIN_STEP:
                step = MAX_STEP
    return AlignmentResult(angles, best, evals, best <= target)
