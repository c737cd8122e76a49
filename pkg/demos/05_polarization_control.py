"""
Automatic polarization control
==============================

Fiber birefringence rotates polarization unpredictably, and it drifts.
The compensator is four wave-plate stages driven by coordinate descent
on a probed error signal: the fraction of same-outcome coincidences
across the rectilinear and diagonal bases, which vanishes exactly when
the channel rotation is undone. This script misaligns a channel, lets
the loop pull it back, then tracks a slow drift.
"""

import numpy as np

from qnetem import apc, jones

rng = np.random.default_rng(50)

# A random channel rotation: visibility is gone before correction.
rotation = jones.haar_unitary(rng)
print(f"initial error signal: {apc.born_error(rotation, np.zeros(4)):.3f} "
      "(0 is aligned, 0.5 is scrambled)")

# Noiseless probe first: the loop reads the exact Born error.
result = apc.stabilize(apc.noiseless_probe(rotation), target=0.02, max_evals=500)
print(f"noiseless loop: error {result.error:.4f} after {result.evaluations} "
      f"evaluations (converged={result.converged})")

# Real loops probe with finite statistics. At 1000 coincidences per
# probe the error signal carries shot noise of a few parts in a
# thousand, and the loop still settles.
probe = apc.sampled_probe(rotation, 1000, rng)
noisy = apc.stabilize(probe, target=0.02, max_evals=500)
print(f"shot-limited loop: probed {noisy.error:.4f}, "
      f"true residual {apc.born_error(rotation, noisy.angles):.4f}, "
      f"{noisy.evaluations} evaluations")

# Drift: the channel rotation random-walks on the Poincare sphere. Every
# control period the loop re-stabilizes from its last angles; warm
# starts keep the correction cheap.
print("\ntracking a drifting channel (0.3 rad/sqrt(s), 2 s steps):")
angles = noisy.angles
current = rotation
for step in range(1, 7):
    current = apc.apply_drift(current, rate=0.3, dt_s=2.0, rng=rng)
    before = apc.born_error(current, angles)
    result = apc.stabilize(
        apc.sampled_probe(current, 1000, rng),
        initial_angles=angles,
        target=0.02,
        max_evals=150,
        step=0.1,
    )
    angles = result.angles
    after = apc.born_error(current, angles)
    print(f"  t={2 * step:2d} s: drifted to {before:.4f}, "
          f"re-locked at {after:.4f} in {result.evaluations} evaluations")
