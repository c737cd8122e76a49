"""
Building and inspecting a hub-ring network
==========================================

A deployment is a ring of equipment hubs, five subscriber nodes hanging
off each hub, and a control center reaching every hub over LAN fiber.
This script builds a few rings, walks their structure, and round-trips
one through the JSON document form.
"""

import json

from qnetem import topology as topo

# Build a three-hub metro ring with the default geometry: 1 km spokes,
# 10 km hub-to-hub spans, 0.2 dB/km fiber.
t = topo.build_network(3)

print(f"hubs:    {t.hub_ids}")
print(f"nodes:   {len(t.nodes)} ({topo.NODES_PER_HUB} per hub)")
print(f"bundles: {len(t.bundles)}")

# Every physical run between two elements carries three bundles
# (primary, secondary, LAN) totalling twelve fibers.
for bundle in list(t.bundles.values())[:3]:
    print(
        f"  {bundle.bundle_id:24s} {bundle.fiber_count} fibers, "
        f"{bundle.length_km:.1f} km, {bundle.per_fiber_loss_db:.2f} dB"
    )

# The ring is navigable in both directions and closes on itself.
walk = "H0"
hops = []
for _ in range(t.n_hubs):
    hops.append(walk)
    walk = t.next_hub(walk)
print(f"ring walk: {' -> '.join(hops)} -> {walk}")

# Each hub carries four switches: the 60x60 ring crossbar, a 20x20
# internal crossbar, and two 8x24 selects for the prepare and measure
# banks.
hub = t.hubs["H0"]
for sw in hub.switches().values():
    print(f"  {sw.switch_id:16s} {sw.rows}x{sw.cols}, {len(sw.jumpers)} jumpers")

# validate_topology returns a list of findings; an empty list means the
# build is sound (shapes, bundle complements, jumper plates all check out).
findings = topo.validate_topology(t)
print(f"validation findings: {list(findings)!r}")

# Topologies serialize to a versioned document and come back identical.
doc = topo.topology_to_dict(t)
again = topo.topology_from_dict(json.loads(json.dumps(doc)))
print(f"schema {doc['schema']}, round-trip hubs match: {again.hub_ids == t.hub_ids}")

# Rings scale from a single hub to city size without changing shape.
for n in (1, 4, 8):
    tn = topo.build_network(n)
    print(f"n={n}: {len(tn.nodes)} nodes, {len(tn.bundles)} bundles, "
          f"valid={not topo.validate_topology(tn)}")
