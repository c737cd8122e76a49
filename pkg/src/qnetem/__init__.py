"""Desk-scale emulator of a switched photonic quantum network.

Subsystems:

- :mod:`qnetem.topology` — hubs, nodes, fiber bundles, crossbar switches,
  optical path resolution.
- :mod:`qnetem.optics` — entangled-pair sources, lossy channels, detectors,
  Monte Carlo event generation and analytic rate predictions.
- :mod:`qnetem.timing` — time-tag streams, coincidence matching, delay
  histograms, clock-offset recovery, count accumulation.
- :mod:`qnetem.apc` — polarization drift and automatic polarization control.
- :mod:`qnetem.qkd` — entanglement-based key distribution and trusted relay.
- :mod:`qnetem.qnic` — node interface: count query protocol, signal streams.
- :mod:`qnetem.line_code` — 8b/10b line code for the timing layer.
- :mod:`qnetem.compiler` / :mod:`qnetem.control` — request compilation,
  validation, scheduling, instantiation, archival, usage ledger.
- :mod:`qnetem.service` — HTTP control-plane API.
- :mod:`qnetem.cli` — command line front end.
"""

__version__ = "0.1.0"

from .errors import EmulatorError, Finding  # noqa: F401
