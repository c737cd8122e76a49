"""
Photon-pair link budgets: Monte Carlo vs closed form
====================================================

A downconversion source feeds two fiber arms ending in nanowire
detectors. The Monte Carlo tracks every photon pair; the closed-form
budget predicts singles, coincidence, and accidental rates from loss,
efficiency, and dark counts. This script runs both across a loss sweep
and prints them side by side.
"""

import numpy as np

from qnetem import optics, tags, timing

rng = np.random.default_rng(30)
duration = 0.1
window_ps = 1000

print(f"{'loss_b':>7} {'singles A':>12} {'singles B':>12} "
      f"{'coincidences':>14} {'accidentals':>12}")

for loss_b_db in (0.0, 2.0, 4.0, 6.0, 8.0, 10.0):
    cfg = optics.RateConfig(
        pair_rate_hz=2e6,
        mode=optics.ENTANGLED,
        loss_a_db=1.0,
        efficiency_a=0.8,
        dark_a_hz=100.0,
        loss_b_db=loss_b_db,
        efficiency_b=0.8,
        dark_b_hz=100.0,
    )

    # Monte Carlo: emit, post-select the entangled state, thin each arm
    # by its channel, detect with efficiency and darks.
    src = optics.BiphotonSource("s", cfg.pair_rate_hz)
    stream = optics.prepare(optics.generate_pairs(src, duration, rng), cfg.mode, rng)
    stream = optics.propagate(stream, optics.make_link(cfg.loss_a_db), "a", rng)
    stream = optics.propagate(stream, optics.make_link(cfg.loss_b_db), "b", rng)
    det_a = optics.DetectorModel(cfg.efficiency_a, cfg.dark_a_hz, 0.0, 0, 1)
    det_b = optics.DetectorModel(cfg.efficiency_b, cfg.dark_b_hz, 0.0, 0, 1)
    tags_a = optics.detect(optics.arm_arrivals(stream, "a"), det_a, duration, rng)
    tags_b = optics.detect(optics.arm_arrivals(stream, "b", node=1), det_b, duration, rng, node=1)

    mc_sa = tags_a.shape[0] / duration
    mc_sb = tags_b.shape[0] / duration
    mc_cc = timing.correlate(tags_a, tags_b, window_ps).count / duration
    # park the window far off the peak to count accidentals alone
    mc_acc = timing.correlate(tags_a, tags_b, window_ps, offset_ps=50_000_000).count / duration

    exp = optics.expected_rates(cfg, window_ps=window_ps)
    print(f"{loss_b_db:6.1f}  "
          f"{mc_sa:9.0f}/{exp.singles_a_hz:<9.0f} "
          f"{mc_sb:9.0f}/{exp.singles_b_hz:<9.0f} "
          f"{mc_cc:9.0f}/{exp.coincidences_hz + exp.accidentals_hz:<9.0f} "
          f"{mc_acc:7.0f}/{exp.accidentals_hz:<7.1f}")

print("\neach cell is measured/expected; agreement is the 4-sigma check "
      "the acceptance gate runs across twenty random budgets")

# Dead time matters at high flux: a 25 us non-paralyzable dead time caps
# a channel near 40 kHz no matter the input rate.
hot = optics.DetectorModel(efficiency=1.0, dark_rate_hz=0.0, jitter_ps=0.0,
                           dead_ps=25_000_000, channel_count=1)
times = np.sort(rng.integers(0, int(0.1 * optics.PS_PER_SECOND), 100_000))
clicks = optics.detect(tags.make_tags(times, np.zeros(100_000, int)), hot, 0.1, rng)
print(f"\n1 MHz offered with 25 us dead time: {clicks.shape[0] / 0.1:.0f} Hz detected")
