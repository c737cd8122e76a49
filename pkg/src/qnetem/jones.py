"""Jones-calculus helpers: 2x2 polarization unitaries and two-qubit states.

Conventions used throughout the emulator:

- Jones vectors are over the (H, V) basis.
- Two-qubit amplitudes are ordered (HH, HV, VH, VV); the first letter is
  arm A, the second arm B.
- ``rotation(theta)`` is the real rotation taking H toward V by ``theta``
  (a half-wave-plate-free fiber rotation); ``retarder_z`` / ``retarder_x``
  are the two fixed-axis variable retarders a lithium-niobate stage
  implements (phase axes S1 and S2 on the Poincare sphere).
"""

from __future__ import annotations

import numpy as np

IDENTITY = np.eye(2, dtype=complex)

# Basis order for two-qubit amplitude vectors.
BASIS_LABELS = ("HH", "HV", "VH", "VV")


def rotation(theta: float) -> np.ndarray:
    """Real rotation of the polarization plane by ``theta`` radians."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def retarder_z(phi: float) -> np.ndarray:
    """Variable retarder with fast axis along H/V: exp(-i*phi*sigma_z/2)."""
    return np.array([[np.exp(-1j * phi / 2), 0], [0, np.exp(1j * phi / 2)]])


def retarder_x(phi: float) -> np.ndarray:
    """Variable retarder with fast axis along +/-45 deg: exp(-i*phi*sigma_x/2)."""
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def axis_angle_unitary(axis: np.ndarray, angle: float) -> np.ndarray:
    """SU(2) rotation by ``angle`` about a unit Poincare-sphere ``axis``."""
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    n_dot_sigma = ax[0] * sx + ax[1] * sy + ax[2] * sz
    return np.cos(angle / 2) * IDENTITY - 1j * np.sin(angle / 2) * n_dot_sigma


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol))


def distance_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance min over global phase of ||e^{i phi} a - b||."""
    overlap = np.trace(b.conj().T @ a)
    na = float(np.sum(np.abs(a) ** 2))
    nb = float(np.sum(np.abs(b) ** 2))
    # ||e^{i phi} a - b||^2 minimized at e^{i phi} = conj(overlap)/|overlap|
    val = na + nb - 2.0 * abs(overlap)
    return float(np.sqrt(max(val, 0.0)))


def haar_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    # Fix the phase ambiguity of QR so the distribution is Haar.
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_axis(rng: np.random.Generator) -> np.ndarray:
    """Uniform point on the unit sphere."""
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def analyzer_vectors(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Projection vectors of a polarization analyzer at angle ``theta``.

    Outcome bit 0 is the transmitted (theta) port, bit 1 the orthogonal
    (theta + 90 deg) port.
    """
    c, s = np.cos(theta), np.sin(theta)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


def apply_arm(state: np.ndarray, u: np.ndarray, arm: str) -> np.ndarray:
    """Apply a single-qubit unitary to one arm of two-qubit amplitudes.

    ``state`` may be a single 4-vector or an (n, 4) batch.
    """
    if arm not in ("a", "b"):
        raise ValueError("arm must be 'a' or 'b'")
    op = np.kron(u, IDENTITY) if arm == "a" else np.kron(IDENTITY, u)
    return np.asarray(state) @ op.T


def joint_probabilities(state: np.ndarray, theta_a: float, theta_b: float) -> np.ndarray:
    """Born probabilities for joint analyzer outcomes on a two-qubit state.

    Returns probabilities ordered (00, 01, 10, 11) where the first bit is
    arm A's outcome at analyzer ``theta_a`` and the second arm B's at
    ``theta_b``. Accepts a single 4-vector or an (n, 4) batch; the batch
    form returns (n, 4).
    """
    a0, a1 = analyzer_vectors(theta_a)
    b0, b1 = analyzer_vectors(theta_b)
    projections = np.stack(
        [np.kron(a0, b0), np.kron(a0, b1), np.kron(a1, b0), np.kron(a1, b1)]
    )
    amps = np.asarray(state) @ projections.conj().T
    return np.abs(amps) ** 2


def normalize(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return state / np.linalg.norm(state)
