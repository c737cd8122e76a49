"""
From design to archive: the full service lifecycle
==================================================

Subscribers describe what they want as a design document: sources,
arms, coincidence pairs. The control center compiles it onto real
equipment, schedules a calendar window, pushes switch settings, runs
the window, and archives the evidence. This script drives one request
through every state and pokes at the books afterward.
"""

import json
import zipfile

import numpy as np

from qnetem import compiler, control, topology

t = topology.build_network(3)
center = control.ControlCenter(t, seed=6)

# A cross-hub entangled link: source at H0, one arm staying local, the
# other riding the ring to a node on H1 with polarization control.
design = {
    "format": "design.v1",
    "links": [
        {
            "source_hub": "H0",
            "mode": "entangled",
            "pair_rate_hz": 2e6,
            "arms": [
                {"endpoint": "H0-N0", "basis_deg": 0.0, "apc": False},
                {"endpoint": "H1-N0", "basis_deg": 0.0, "apc": True},
            ],
        }
    ],
    "pairs": [[0, 1]],
    "window_ps": 1000,
}

rec = center.submit(compiler.NetworkConfigRequest("demo-1", "alice", design, 0.0, 1.0))
print(f"submitted: findings={list(rec.findings)!r}")
print(f"devices claimed: {compiler.device_count(rec.config)}")

window = center.schedule("demo-1")
print(f"scheduled: {window.window_id} [{window.start_s}, {window.end_s}) s")

handle = center.instantiate("demo-1")
print(f"instantiated: {handle.handle_id} state={handle.state}")

# Switch settings are live while the window runs.
ring = center.topology.switch("H0.ring60").mapping
print(f"H0 ring crossbar rows patched: {sorted(ring)}")

# Run the window out; counts accumulate on the reporting cadence.
center.advance(1.2)
mon = center.monitor(handle.handle_id)
print(f"after the window: state={mon['state']}, records={mon['records_visible']}")
last = mon["latest_record"]
print(f"last interval pairs: {last.coincidences}")
apc_log = mon["apc_signals"]
print(f"APC channels under control: {len(apc_log)}, "
      f"last error {apc_log[-1]['error']:.4f}")

# Settings were torn down at completion.
print(f"ring crossbar now: {center.topology.switch('H0.ring60').mapping}")

# Archive: a zip of tag dumps, counts, environment log, and a manifest
# with content hashes. Fetching twice returns the same bytes.
archive = center.archive(handle.handle_id)
with zipfile.ZipFile(archive.path) as zf:
    names = sorted(zf.namelist())
    manifest = json.loads(zf.read("manifest.json"))
print(f"archive members: {names}")
print(f"manifest state: {manifest['state']}, hashes over {sorted(manifest['hashes'])}")

# Usage metering: duration times claimed devices, per subscriber.
for entry in center.ledger.entries("alice"):
    print(f"ledger: {entry.subscriber_id} {entry.fee_units:.6f} units "
          f"({entry.duration_s:.1f} s x weight {entry.weight:.0f})")

# The audit trail orders the whole lifecycle, and the built-in check
# confirms nothing went live without a validated request behind it.
print("audit:", " -> ".join(ev[0] for ev in center.audit_log))
print(f"lifecycle findings: {list(center.audit_lifecycle())!r}")
