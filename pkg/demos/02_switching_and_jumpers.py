"""
Crossbar switching and jumper loops
===================================

The ring crossbar in each hub is a 60x60 optical switch whose column
side is partly wired with fixed jumper loops. A row-to-row light path
exists when two rows map onto the two columns of one jumper: light
enters on one row, loops through the jumper, and leaves on the other.
This script patches a switch by hand and reads back the connectivity.
"""

import numpy as np

from qnetem import topology as topo

t = topo.build_network(2)
sw = t.hubs["H0"].ring_switch
print(f"{sw.switch_id}: {sw.rows}x{sw.cols}, jumper plate {sw.jumpers[:4]} ...")

# Row assignments on this switch follow a fixed plan: rows 0-19 are the
# node spokes (5 nodes x 4 lanes), rows 20-27 face the neighbor hubs,
# rows 40+ come from the hub's own equipment.
r_node0 = topo.ring_row_node(0, lane=0)
r_node3 = topo.ring_row_node(3, lane=0)
print(f"node 0 lane 0 enters row {r_node0}; node 3 lane 0 enters row {r_node3}")

# Patch both rows onto the two ends of the first jumper: that is a
# physical light path from node 0 to node 3 through the hub.
j, j2 = sw.jumpers[0]
topo.set_crossbar(sw, [(r_node0, j), (r_node3, j2)])
links = topo.effective_connectivity(sw)
print(f"effective row links: {sorted(links)}")

# The same question answered by brute force over the port graph gives
# the same answer; the emulator's own resolver is checked against this
# kind of traversal in the acceptance tests.
mapping = dict(sw.mapping)
adj: dict[tuple, set] = {}
for r, c in mapping.items():
    adj.setdefault(("r", r), set()).add(("c", c))
    adj.setdefault(("c", c), set()).add(("r", r))
for a, b in sw.jumpers:
    adj.setdefault(("c", a), set()).add(("c", b))
    adj.setdefault(("c", b), set()).add(("c", a))
reachable = {("r", r_node0)}
frontier = [("r", r_node0)]
while frontier:
    cur = frontier.pop()
    for nxt in adj.get(cur, ()):
        if nxt not in reachable:
            reachable.add(nxt)
            frontier.append(nxt)
rows_reached = sorted(p[1] for p in reachable if p[0] == "r")
print(f"rows reachable from row {r_node0} by traversal: {rows_reached}")

# set_crossbar refuses illegal states outright: out-of-range ports,
# fan-out (one row to two cols), fan-in (two rows to one col).
for bad in ([(0, 99)], [(5, 10), (5, 11)], [(5, 10), (6, 10)]):
    try:
        topo.set_crossbar(sw, bad)
        print(f"  {bad}: accepted (unexpected)")
    except Exception as exc:
        print(f"  {bad}: rejected ({exc})")

# Randomized sanity pass: patch random injective states, confirm every
# reported link really sits on a jumper.
rng = np.random.default_rng(2)
for _ in range(200):
    k = int(rng.integers(0, 20))
    rows = rng.permutation(60)[:k]
    cols = rng.permutation(60)[:k]
    state = {int(r): int(c) for r, c in zip(rows, cols)}
    for r1, r2 in topo.effective_connectivity(sw, state):
        pair = {state[r1], state[r2]}
        assert any(pair == {a, b} for a, b in sw.jumpers)
print("200 random states: every link sits on a jumper")
