"""Network structure: hubs, nodes, fiber bundles, crossbar switches, paths.

The physical plant is a ring of equipment hubs, each serving five client
nodes over spoke fiber bundles. Every inter-element link carries twelve
fibers split across three bundles: a primary qubit bundle (four qubit
lanes plus one timing fiber), an identical secondary bundle, and a
two-fiber LAN bundle. A control center reaches every element over LAN.

Each hub contains four biphoton source slots, three prepare modules,
three measure modules feeding an eight-channel detector, two 8x24 select
switches, a 20x20 internal switch, and a 60x60 ring switch whose left
side carries fixed jumper loops used to interconnect right-side ports
(add/drop and node-to-node transit).

Topology structure is immutable after build; crossbar mappings are the
only mutable runtime state. All optical routing reduces to a walk over a
port graph in which every port has at most two incident edges, so a
configured path is unique when it exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from . import jones
from .errors import (
    E_FANIN,
    E_FANOUT,
    E_LANE,
    E_NO_PATH,
    E_PORT_RANGE,
    E_UNKNOWN_ELEMENT,
    EmulatorError,
    Finding,
    FindingList,
)

# ---------------------------------------------------------------------------
# Constants: bundle composition, switch shapes, port allocations
# ---------------------------------------------------------------------------

PRIMARY = "primary"
SECONDARY = "secondary"
LAN = "lan"

QUBIT_LANES = 4
NODES_PER_HUB = 5
SOURCES_PER_HUB = 4
PREPARE_MODULES = 3
MEASURE_MODULES = 3
DETECTOR_CHANNELS = 8
APC_CHANNELS = 4
PEER_LINK_CAPACITY = 18  # SFP timing/control links per hub

RING_SWITCH = "ring60"
INTERNAL_SWITCH = "internal20"
PREPARE_SELECT = "prepare_select"
MEASURE_SELECT = "measure_select"

# 60x60 ring switch, left side (cols): lanes 0-3 outbound from the hub,
# 4-7 inbound to the hub, 8-59 reserved for jumper loops.
RING_COL_OUT = tuple(range(0, 4))
RING_COL_IN = tuple(range(4, 8))
RING_JUMPER_FIELD = tuple(range(8, 60))
DEFAULT_JUMPERS = tuple((c, c + 1) for c in range(8, 60, 2))

# 20x20 internal switch: rows 0-7 prepared-qubit lanes, rows 8-11 inbound
# external lanes; cols 0-7 measure lanes, cols 8-11 outbound external lanes.
I20_ROW_PREPARED = tuple(range(0, 8))
I20_ROW_EXT_IN = tuple(range(8, 12))
I20_COL_MEASURE = tuple(range(0, 8))
I20_COL_EXT_OUT = tuple(range(8, 12))

DEFAULT_SPOKE_KM = 1.0
DEFAULT_RING_KM = 10.0
DEFAULT_LOSS_DB_PER_KM = 0.2

_ARM_NAMES = ("a", "b")


def ring_row_node(node_index: int, lane: int, bundle: str = PRIMARY) -> int:
    """Ring-switch row serving a node's qubit lane."""
    base = 0 if bundle == PRIMARY else 28
    return base + QUBIT_LANES * node_index + lane


def ring_row_next_hub(lane: int, bundle: str = PRIMARY) -> int:
    """Ring-switch row on the bundle toward the next hub in the ring."""
    return (20 if bundle == PRIMARY else 48) + lane


def ring_row_prev_hub(lane: int, bundle: str = PRIMARY) -> int:
    """Ring-switch row on the bundle arriving from the previous hub."""
    return (24 if bundle == PRIMARY else 52) + lane


def measure_unit_channels(unit: int) -> tuple[int, int]:
    """Detector channels (transmitted, reflected) fed by a measure unit."""
    return 2 * unit, 2 * unit + 1


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiberBundle:
    """A fixed group of fibers routed together between two elements."""

    bundle_id: str
    kind: str  # primary | secondary | lan
    element_a: str
    element_b: str
    qubit_lanes: int
    timing_fibers: int
    lan_fibers: int
    length_km: float
    per_fiber_loss_db: float

    @property
    def fiber_count(self) -> int:
        return self.qubit_lanes + self.timing_fibers + self.lan_fibers

    @property
    def length_m(self) -> float:
        return self.length_km * 1000.0


@dataclass
class CrossbarSwitch:
    """Optical crossbar: a partial injective map from row ports to col ports.

    ``jumpers`` are col-port pairs physically looped together at build
    time; they let one row-to-col connection continue to a second col and
    back out a second row.
    """

    switch_id: str
    rows: int
    cols: int
    jumpers: tuple[tuple[int, int], ...] = ()
    mapping: dict[int, int] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols


@dataclass(frozen=True)
class QuantumNode:
    node_id: str
    hub_id: str
    index: int  # 0..4 within the hub


@dataclass(frozen=True)
class EquipmentHub:
    hub_id: str
    node_ids: tuple[str, ...]
    ring_switch: CrossbarSwitch
    internal_switch: CrossbarSwitch
    prepare_select: CrossbarSwitch
    measure_select: CrossbarSwitch
    source_count: int = SOURCES_PER_HUB
    prepare_modules: int = PREPARE_MODULES
    measure_modules: int = MEASURE_MODULES
    detector_channels: int = DETECTOR_CHANNELS
    apc_channels: int = APC_CHANNELS
    peer_link_capacity: int = PEER_LINK_CAPACITY

    def switches(self) -> dict[str, CrossbarSwitch]:
        return {
            self.ring_switch.switch_id: self.ring_switch,
            self.internal_switch.switch_id: self.internal_switch,
            self.prepare_select.switch_id: self.prepare_select,
            self.measure_select.switch_id: self.measure_select,
        }


@dataclass(frozen=True)
class PathSegment:
    """One contiguous piece of an optical path.

    ``kind`` is "hub" for a traversal inside one hub (select switches,
    prepare/measure plumbing, internal and ring crossbars coalesced) or
    "fiber" for one fiber lane of a bundle.
    """

    kind: str
    element: str  # hub id or bundle id
    lane: Optional[int]
    loss_db: float
    length_m: float


@dataclass(frozen=True)
class OpticalPath:
    endpoint_a: str
    endpoint_b: str
    segments: tuple[PathSegment, ...]
    net_rotation: np.ndarray

    @property
    def total_loss_db(self) -> float:
        return float(sum(s.loss_db for s in self.segments))

    @property
    def total_length_m(self) -> float:
        return float(sum(s.length_m for s in self.segments))

    def __post_init__(self):
        for prev, nxt in zip(self.segments, self.segments[1:]):
            if prev.kind == nxt.kind == "fiber":
                raise ValueError("fiber segments must be joined by an element")


class NetworkTopology:
    """Built network: hubs around a ring, five nodes per hub, one control center."""

    def __init__(
        self,
        hubs: dict[str, EquipmentHub],
        nodes: dict[str, QuantumNode],
        bundles: dict[str, FiberBundle],
        control_center: str = "CC",
        params: Optional[dict] = None,
    ):
        self.hubs = hubs
        self.nodes = nodes
        self.bundles = bundles
        self.control_center = control_center
        self.params = dict(params or {})
        self._switches = {}
        for hub in hubs.values():
            self._switches.update(hub.switches())

    @property
    def hub_ids(self) -> list[str]:
        return sorted(self.hubs, key=lambda h: int(h[1:]))

    @property
    def n_hubs(self) -> int:
        return len(self.hubs)

    def switches(self) -> dict[str, CrossbarSwitch]:
        return dict(self._switches)

    def switch(self, switch_id: str) -> CrossbarSwitch:
        try:
            return self._switches[switch_id]
        except KeyError:
            raise EmulatorError(E_UNKNOWN_ELEMENT, f"no switch {switch_id!r}")

    def next_hub(self, hub_id: str) -> str:
        ids = self.hub_ids
        return ids[(ids.index(hub_id) + 1) % len(ids)]

    def prev_hub(self, hub_id: str) -> str:
        ids = self.hub_ids
        return ids[(ids.index(hub_id) - 1) % len(ids)]

    def bundle_between(self, a: str, b: str, kind: str) -> Optional[FiberBundle]:
        for bundle in self.bundles.values():
            if bundle.kind != kind:
                continue
            if {bundle.element_a, bundle.element_b} == {a, b} or (
                a == b and bundle.element_a == bundle.element_b == a
            ):
                return bundle
        return None

    def spoke_bundle(self, node_id: str, kind: str = PRIMARY) -> FiberBundle:
        node = self.nodes[node_id]
        bundle = self.bundle_between(node.hub_id, node_id, kind)
        if bundle is None:
            raise EmulatorError(E_UNKNOWN_ELEMENT, f"no {kind} spoke for {node_id}")
        return bundle

    def ring_bundle(self, hub_id: str, kind: str = PRIMARY) -> FiberBundle:
        """Bundle from ``hub_id`` toward the next hub in ring order."""
        bundle = self.bundles.get(f"{hub_id}~{self.next_hub(hub_id)}:{kind}:ring")
        if bundle is None:
            raise EmulatorError(E_UNKNOWN_ELEMENT, f"no ring bundle from {hub_id}")
        return bundle


# ---------------------------------------------------------------------------
# Build
# ---------------------------------------------------------------------------


def build_network(
    n_hubs: int,
    spoke_km: float = DEFAULT_SPOKE_KM,
    ring_km: float = DEFAULT_RING_KM,
    loss_db_per_km: float = DEFAULT_LOSS_DB_PER_KM,
    jumpers: tuple[tuple[int, int], ...] = DEFAULT_JUMPERS,
) -> NetworkTopology:
    """Build a ring of ``n_hubs`` hubs with five nodes each.

    Every hub-node and hub-hub link gets the full three-bundle, twelve
    fiber complement; the control center attaches to each hub over LAN.
    Per-fiber loss defaults to ``loss_db_per_km`` times the run length.
    """
    if n_hubs < 1:
        raise ValueError("n_hubs must be >= 1")
    hubs: dict[str, EquipmentHub] = {}
    nodes: dict[str, QuantumNode] = {}
    bundles: dict[str, FiberBundle] = {}

    def add_bundle(a: str, b: str, kind: str, length_km: float, tag: str = "") -> None:
        suffix = f":{tag}" if tag else ""
        bundle_id = f"{a}~{b}:{kind}{suffix}"
        qubit = QUBIT_LANES if kind in (PRIMARY, SECONDARY) else 0
        timing = 1 if kind in (PRIMARY, SECONDARY) else 0
        lan = 2 if kind == LAN else 0
        bundles[bundle_id] = FiberBundle(
            bundle_id=bundle_id,
            kind=kind,
            element_a=a,
            element_b=b,
            qubit_lanes=qubit,
            timing_fibers=timing,
            lan_fibers=lan,
            length_km=length_km,
            per_fiber_loss_db=loss_db_per_km * length_km,
        )

    for h in range(n_hubs):
        hub_id = f"H{h}"
        node_ids = tuple(f"{hub_id}-N{k}" for k in range(NODES_PER_HUB))
        hubs[hub_id] = EquipmentHub(
            hub_id=hub_id,
            node_ids=node_ids,
            ring_switch=CrossbarSwitch(f"{hub_id}.{RING_SWITCH}", 60, 60, jumpers),
            internal_switch=CrossbarSwitch(f"{hub_id}.{INTERNAL_SWITCH}", 20, 20),
            prepare_select=CrossbarSwitch(f"{hub_id}.{PREPARE_SELECT}", 8, 24),
            measure_select=CrossbarSwitch(f"{hub_id}.{MEASURE_SELECT}", 8, 24),
        )
        for k, node_id in enumerate(node_ids):
            nodes[node_id] = QuantumNode(node_id, hub_id, k)
            for kind in (PRIMARY, SECONDARY, LAN):
                add_bundle(hub_id, node_id, kind, spoke_km)

    for h in range(n_hubs):
        hub_id, nxt = f"H{h}", f"H{(h + 1) % n_hubs}"
        for kind in (PRIMARY, SECONDARY, LAN):
            add_bundle(hub_id, nxt, kind, ring_km, tag="ring")

    for h in range(n_hubs):
        add_bundle("CC", f"H{h}", LAN, ring_km)

    return NetworkTopology(
        hubs,
        nodes,
        bundles,
        params={
            "spoke_km": spoke_km,
            "ring_km": ring_km,
            "loss_db_per_km": loss_db_per_km,
            "jumpers": tuple(tuple(j) for j in jumpers),
        },
    )


def add_hub(t: NetworkTopology) -> NetworkTopology:
    """Return a new topology with one more hub spliced into the ring.

    Existing element identities are preserved; the new hub takes the next
    free index and the ring closes through it. Five new client slots come
    with it.
    """
    p = t.params
    return build_network(
        t.n_hubs + 1,
        spoke_km=p.get("spoke_km", DEFAULT_SPOKE_KM),
        ring_km=p.get("ring_km", DEFAULT_RING_KM),
        loss_db_per_km=p.get("loss_db_per_km", DEFAULT_LOSS_DB_PER_KM),
        jumpers=tuple(p.get("jumpers", DEFAULT_JUMPERS)),
    )


# ---------------------------------------------------------------------------
# Crossbar operations
# ---------------------------------------------------------------------------


def set_crossbar(switch: CrossbarSwitch, mapping: Iterable[tuple[int, int]]) -> None:
    """Replace a switch's row-to-col mapping after validating it.

    Raises on out-of-range ports, duplicate rows (fan-out) or duplicate
    cols (fan-in); the existing mapping is untouched on failure.
    """
    pairs = [(int(r), int(c)) for r, c in mapping]
    rows_seen: set[int] = set()
    cols_seen: set[int] = set()
    for r, c in pairs:
        if not (0 <= r < switch.rows and 0 <= c < switch.cols):
            raise EmulatorError(
                E_PORT_RANGE, f"{switch.switch_id}: port ({r},{c}) outside {switch.shape}"
            )
        if r in rows_seen:
            raise EmulatorError(E_FANOUT, f"{switch.switch_id}: row {r} mapped twice")
        if c in cols_seen:
            raise EmulatorError(E_FANIN, f"{switch.switch_id}: col {c} mapped twice")
        rows_seen.add(r)
        cols_seen.add(c)
    switch.mapping = dict(pairs)


def effective_connectivity(
    switch: CrossbarSwitch, mapping: Optional[Mapping[int, int]] = None
) -> set[tuple[int, int]]:
    """End-to-end row-port links realized through jumper loops.

    A pair (i, i') with i < i' is linked when row i maps to col j, (j, j')
    is a jumper, and row i' maps to col j'. The relation is symmetric and
    irreflexive by construction.
    """
    m = switch.mapping if mapping is None else dict(mapping)
    col_to_row = {c: r for r, c in m.items()}
    links: set[tuple[int, int]] = set()
    for j, j2 in switch.jumpers:
        for left, right in ((j, j2), (j2, j)):
            r1 = col_to_row.get(left)
            r2 = col_to_row.get(right)
            if r1 is not None and r2 is not None and r1 != r2:
                links.add((min(r1, r2), max(r1, r2)))
    return links


# ---------------------------------------------------------------------------
# Port graph and path resolution
# ---------------------------------------------------------------------------

# Port refs are tuples:
#   ("switch", switch_id, "row"|"col", index)
#   ("source", hub_id, source_index, arm)      arm 0/1
#   ("prepare", hub_id, module, unit, "in"|"out", arm)
#   ("measure", hub_id, module, unit)          measure unit input (terminal)
#   ("node", node_id, bundle_kind, lane)       client port (terminal)


@dataclass(frozen=True)
class _Edge:
    kind: str  # "hub" | "fiber"
    element: str  # hub id or bundle id
    lane: Optional[int]
    loss_db: float
    length_m: float
    other: tuple


def _hub_static_edges(t: NetworkTopology, hub: EquipmentHub) -> list[tuple[tuple, _Edge]]:
    h = hub.hub_id
    psel = hub.prepare_select.switch_id
    msel = hub.measure_select.switch_id
    i20 = hub.internal_switch.switch_id
    ring = hub.ring_switch.switch_id
    edges: list[tuple[tuple, _Edge]] = []

    def join(p: tuple, q: tuple) -> None:
        edges.append((p, _Edge("hub", h, None, 0.0, 0.0, q)))
        edges.append((q, _Edge("hub", h, None, 0.0, 0.0, p)))

    for s in range(hub.source_count):
        for o in range(2):
            join(("source", h, s, o), ("switch", psel, "row", 2 * s + o))
    # Unit index is global (one per source slot): unit u of any module drives
    # internal-switch rows 2u and 2u+1, so two modules must not share a unit.
    for m in range(hub.prepare_modules):
        for u in range(SOURCES_PER_HUB):
            for o in range(2):
                join(("switch", psel, "col", 8 * m + 2 * u + o), ("prepare", h, m, u, "in", o))
                join(("prepare", h, m, u, "in", o), ("prepare", h, m, u, "out", o))
                join(("prepare", h, m, u, "out", o), ("switch", i20, "row", 2 * u + o))
    for lane in I20_COL_MEASURE:
        join(("switch", i20, "col", lane), ("switch", msel, "row", lane))
    for m in range(hub.measure_modules):
        for u in range(SOURCES_PER_HUB):
            join(("switch", msel, "col", 8 * m + u), ("measure", h, m, u))
    for k in range(4):
        join(("switch", i20, "col", 8 + k), ("switch", ring, "col", k))
        join(("switch", ring, "col", 4 + k), ("switch", i20, "row", 8 + k))
    return edges


def _fiber_edges(t: NetworkTopology) -> list[tuple[tuple, _Edge]]:
    edges: list[tuple[tuple, _Edge]] = []

    def join(p: tuple, q: tuple, bundle: FiberBundle, lane: int) -> None:
        e = _Edge("fiber", bundle.bundle_id, lane, bundle.per_fiber_loss_db, bundle.length_m, q)
        edges.append((p, e))
        edges.append((q, _Edge("fiber", bundle.bundle_id, lane, bundle.per_fiber_loss_db, bundle.length_m, p)))

    for node in t.nodes.values():
        hub = t.hubs[node.hub_id]
        ring = hub.ring_switch.switch_id
        for kind in (PRIMARY, SECONDARY):
            bundle = t.bundle_between(node.hub_id, node.node_id, kind)
            for lane in range(bundle.qubit_lanes):
                join(
                    ("switch", ring, "row", ring_row_node(node.index, lane, kind)),
                    ("node", node.node_id, kind, lane),
                    bundle,
                    lane,
                )
    for hub_id in t.hub_ids:
        nxt = t.next_hub(hub_id)
        ring_a = t.hubs[hub_id].ring_switch.switch_id
        ring_b = t.hubs[nxt].ring_switch.switch_id
        for kind in (PRIMARY, SECONDARY):
            bundle = t.bundles.get(f"{hub_id}~{nxt}:{kind}:ring")
            if bundle is None:
                continue
            for lane in range(bundle.qubit_lanes):
                join(
                    ("switch", ring_a, "row", ring_row_next_hub(lane, kind)),
                    ("switch", ring_b, "row", ring_row_prev_hub(lane, kind)),
                    bundle,
                    lane,
                )
    return edges


def _dynamic_edges(
    t: NetworkTopology, config: Optional[Mapping[str, Mapping[int, int]]]
) -> list[tuple[tuple, _Edge]]:
    edges: list[tuple[tuple, _Edge]] = []
    for sid, sw in t.switches().items():
        hub_id = sid.split(".")[0]
        mapping = sw.mapping if config is None or sid not in config else config[sid]
        for r, c in mapping.items():
            p = ("switch", sid, "row", int(r))
            q = ("switch", sid, "col", int(c))
            edges.append((p, _Edge("hub", hub_id, None, 0.0, 0.0, q)))
            edges.append((q, _Edge("hub", hub_id, None, 0.0, 0.0, p)))
        for j, j2 in sw.jumpers:
            p = ("switch", sid, "col", j)
            q = ("switch", sid, "col", j2)
            edges.append((p, _Edge("hub", hub_id, None, 0.0, 0.0, q)))
            edges.append((q, _Edge("hub", hub_id, None, 0.0, 0.0, p)))
    return edges


def build_port_graph(
    t: NetworkTopology, config: Optional[Mapping[str, Mapping[int, int]]] = None
) -> dict[tuple, list[_Edge]]:
    """Adjacency of the full optical port graph under a switch configuration."""
    adj: dict[tuple, list[_Edge]] = {}
    all_edges: list[tuple[tuple, _Edge]] = []
    for hub in t.hubs.values():
        all_edges.extend(_hub_static_edges(t, hub))
    all_edges.extend(_fiber_edges(t))
    all_edges.extend(_dynamic_edges(t, config))
    for port, edge in all_edges:
        adj.setdefault(port, []).append(edge)
    return adj


def parse_endpoint(
    t: NetworkTopology, spec: str, qubit_lane: int, bundle: str
) -> tuple:
    """Translate an endpoint descriptor into a port ref.

    Accepted forms: a node id ("H0-N2"), a source arm ("H0.src1.a"),
    a measure unit ("H1.m0.u2"), or a hub measure wildcard ("H1.measure").
    """
    if spec in t.nodes:
        return ("node", spec, bundle, qubit_lane)
    parts = spec.split(".")
    if len(parts) >= 2 and parts[0] in t.hubs:
        hub_id = parts[0]
        if len(parts) == 3 and parts[1].startswith("src"):
            s = int(parts[1][3:])
            if parts[2] not in _ARM_NAMES:
                raise EmulatorError(E_UNKNOWN_ELEMENT, f"bad arm in {spec!r}")
            if not 0 <= s < t.hubs[hub_id].source_count:
                raise EmulatorError(E_UNKNOWN_ELEMENT, f"no source {s} on {hub_id}")
            return ("source", hub_id, s, _ARM_NAMES.index(parts[2]))
        if len(parts) == 3 and parts[1].startswith("m") and parts[2].startswith("u"):
            return ("measure", hub_id, int(parts[1][1:]), int(parts[2][1:]))
        if len(parts) == 2 and parts[1] == "measure":
            return ("measure_any", hub_id)
    raise EmulatorError(E_UNKNOWN_ELEMENT, f"unknown endpoint {spec!r}")


def _matches(port: tuple, target: tuple) -> bool:
    if target[0] == "measure_any":
        return port[0] == "measure" and port[1] == target[1]
    return port == target


def _effective_mapping(
    t: NetworkTopology, config: Optional[Mapping[str, Mapping[int, int]]], switch_id: str
) -> Mapping[int, int]:
    if config is not None and switch_id in config:
        return config[switch_id]
    return t.switch(switch_id).mapping


def _filter_prepare_branches(
    t: NetworkTopology,
    config: Optional[Mapping[str, Mapping[int, int]]],
    options: list[_Edge],
) -> list[_Edge]:
    # Prepare-module outputs merge onto shared internal lanes (unit u of any
    # module drives rows 2u/2u+1). Walking upstream, only a module whose
    # input is actually patched on the prepare-select switch can be lit.
    kept = []
    for e in options:
        o = e.other
        if o[0] == "prepare" and o[4] == "out":
            _, h, m, u, _, arm = o
            col = 8 * m + 2 * u + arm
            mapping = _effective_mapping(t, config, f"{h}.{PREPARE_SELECT}")
            if col in mapping.values():
                kept.append(e)
        else:
            kept.append(e)
    return kept


def resolve_path(
    t: NetworkTopology,
    config: Optional[Mapping[str, Mapping[int, int]]],
    a: str,
    b: str,
    qubit_lane: int = 0,
    bundle: str = PRIMARY,
    channels: Optional[Mapping] = None,
) -> OpticalPath:
    """Resolve the unique configured optical path from ``a`` to ``b``.

    ``config`` optionally overrides live switch mappings (switch id to a
    row-to-col dict). ``channels`` optionally supplies per-fiber-lane
    polarization rotations keyed by (bundle_id, lane); identity when
    absent. The walk follows fixed plumbing and configured crossbar
    connections; since mappings are injective every port has at most two
    incident edges and the continuation is never ambiguous.

    Returns the path with intra-hub traversals coalesced into single
    segments. Raises E_NO_PATH when the walk dead-ends, E_LANE for a bad
    lane or bundle selector.
    """
    if bundle not in (PRIMARY, SECONDARY):
        raise EmulatorError(E_LANE, f"bundle must be primary or secondary, got {bundle!r}")
    if not 0 <= qubit_lane < QUBIT_LANES:
        raise EmulatorError(E_LANE, f"qubit lane {qubit_lane} outside 0..{QUBIT_LANES - 1}")
    start = parse_endpoint(t, a, qubit_lane, bundle)
    target = parse_endpoint(t, b, qubit_lane, bundle)
    if start[0] == "measure_any":
        raise EmulatorError(E_UNKNOWN_ELEMENT, "wildcard measure endpoint only valid as destination")
    adj = build_port_graph(t, config)

    traversed: list[_Edge] = []
    current = start
    came_from: Optional[tuple] = None
    visited = {start}
    for _ in range(10_000):
        if _matches(current, target) and traversed:
            break
        options = [e for e in adj.get(current, []) if e.other != came_from]
        if len(options) > 1:
            options = _filter_prepare_branches(t, config, options)
        if not options:
            raise EmulatorError(
                E_NO_PATH, f"path from {a!r} dead-ends at {current!r} (toward {b!r})"
            )
        if len(options) > 1:
            # More than one lit continuation means the configuration patched
            # two prepare modules onto the same unit; reject it.
            raise EmulatorError(E_NO_PATH, f"ambiguous continuation at {current!r}")
        edge = options[0]
        traversed.append(edge)
        came_from = current
        current = edge.other
        if current in visited:
            raise EmulatorError(E_NO_PATH, f"path from {a!r} loops at {current!r}")
        visited.add(current)
    else:
        raise EmulatorError(E_NO_PATH, f"no path from {a!r} to {b!r}")
    if not _matches(current, target):
        raise EmulatorError(E_NO_PATH, f"walk from {a!r} ended at {current!r}, not {b!r}")

    segments: list[PathSegment] = []
    rotation = jones.IDENTITY
    pending_hub: Optional[str] = None
    pending_loss = 0.0
    for edge in traversed:
        if edge.kind == "hub":
            if pending_hub is not None and pending_hub != edge.element:
                segments.append(PathSegment("hub", pending_hub, None, pending_loss, 0.0))
                pending_loss = 0.0
            pending_hub = edge.element
            pending_loss += edge.loss_db
        else:
            if pending_hub is not None:
                segments.append(PathSegment("hub", pending_hub, None, pending_loss, 0.0))
                pending_hub, pending_loss = None, 0.0
            segments.append(
                PathSegment("fiber", edge.element, edge.lane, edge.loss_db, edge.length_m)
            )
            if channels:
                ch = channels.get((edge.element, edge.lane))
                if ch is not None:
                    u = getattr(ch, "rotation", ch)
                    rotation = np.asarray(u) @ rotation
    if pending_hub is not None:
        segments.append(PathSegment("hub", pending_hub, None, pending_loss, 0.0))

    return OpticalPath(a, b, tuple(segments), rotation)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _validate_switch(sw: CrossbarSwitch, expect_shape: tuple[int, int], out: FindingList) -> None:
    if sw.shape != expect_shape:
        out.add("E_SWITCH_SHAPE", f"{sw.switch_id} is {sw.shape}, expected {expect_shape}", sw.switch_id)
    cols_used: set[int] = set()
    for j, j2 in sw.jumpers:
        for c in (j, j2):
            if not 0 <= c < sw.cols:
                out.add(E_PORT_RANGE, f"jumper col {c} outside 0..{sw.cols - 1}", sw.switch_id)
            if c in cols_used:
                out.add("E_JUMPER_OVERLAP", f"col {c} appears in two jumpers", sw.switch_id)
            cols_used.add(c)
        if j == j2:
            out.add("E_JUMPER_OVERLAP", f"jumper ({j},{j2}) loops a col to itself", sw.switch_id)
    cols_mapped: set[int] = set()
    for r, c in sw.mapping.items():
        if not (0 <= r < sw.rows and 0 <= c < sw.cols):
            out.add(E_PORT_RANGE, f"mapping ({r},{c}) outside {sw.shape}", sw.switch_id)
        if c in cols_mapped:
            out.add(E_FANIN, f"col {c} mapped from two rows", sw.switch_id)
        cols_mapped.add(c)


def validate_topology(t: NetworkTopology) -> list[Finding]:
    """Structural health check; returns an empty list for a sound build."""
    out = FindingList()

    for hub_id, hub in t.hubs.items():
        if len(hub.node_ids) != NODES_PER_HUB:
            out.add("E_NODE_COUNT", f"{hub_id} serves {len(hub.node_ids)} nodes, expected {NODES_PER_HUB}", hub_id)
        _validate_switch(hub.ring_switch, (60, 60), out)
        _validate_switch(hub.internal_switch, (20, 20), out)
        _validate_switch(hub.prepare_select, (8, 24), out)
        _validate_switch(hub.measure_select, (8, 24), out)
        for j, j2 in hub.ring_switch.jumpers:
            for c in (j, j2):
                if c in RING_COL_OUT or c in RING_COL_IN:
                    out.add("E_JUMPER_OVERLAP", f"jumper col {c} collides with internal lanes", hub.ring_switch.switch_id)

    # Ring: following next-hub primary bundles from H0 must visit every hub once.
    ids = t.hub_ids
    seen = []
    cur = ids[0] if ids else None
    for _ in range(len(ids)):
        seen.append(cur)
        bundle = t.bundles.get(f"{cur}~{t.next_hub(cur)}:{PRIMARY}:ring")
        if bundle is None:
            out.add("E_RING_CYCLE", f"no ring bundle leaving {cur}", cur)
            break
        cur = t.next_hub(cur)
    if len(set(seen)) != len(ids):
        out.add("E_RING_CYCLE", "ring does not visit every hub exactly once")

    # Twelve fibers across the three bundles of every connected element pair.
    def check_link(a: str, b: str) -> None:
        kinds = {}
        for kind in (PRIMARY, SECONDARY, LAN):
            bundle = t.bundle_between(a, b, kind)
            if bundle is None:
                out.add("E_BUNDLE_MISSING", f"{a}<->{b} lacks {kind} bundle", f"{a}~{b}")
                return
            kinds[kind] = bundle
        total = sum(bundle.fiber_count for bundle in kinds.values())
        if total != 12:
            out.add("E_FIBER_COUNT", f"{a}<->{b} carries {total} fibers, expected 12", f"{a}~{b}")
        if kinds[PRIMARY].qubit_lanes != 4 or kinds[PRIMARY].timing_fibers != 1:
            out.add("E_BUNDLE_SPLIT", f"{a}<->{b} primary bundle is not 4 qubit + 1 timing", f"{a}~{b}")
        if kinds[SECONDARY].qubit_lanes != 4 or kinds[SECONDARY].timing_fibers != 1:
            out.add("E_BUNDLE_SPLIT", f"{a}<->{b} secondary bundle is not 4 qubit + 1 timing", f"{a}~{b}")
        if kinds[LAN].lan_fibers != 2 or kinds[LAN].qubit_lanes != 0:
            out.add("E_BUNDLE_SPLIT", f"{a}<->{b} lan bundle is not 2 control fibers", f"{a}~{b}")

    for node in t.nodes.values():
        check_link(node.hub_id, node.node_id)
    for hub_id in ids:
        if t.bundles.get(f"{hub_id}~{t.next_hub(hub_id)}:{PRIMARY}:ring") is not None:
            check_link(hub_id, t.next_hub(hub_id))

    for bundle in t.bundles.values():
        if bundle.per_fiber_loss_db < 0:
            out.add("E_LOSS", f"{bundle.bundle_id} has negative loss", bundle.bundle_id)
        if bundle.length_km <= 0:
            out.add("E_LENGTH", f"{bundle.bundle_id} has non-positive length", bundle.bundle_id)

    # Control center LAN reachability over the union of LAN bundles.
    lan_adj: dict[str, set[str]] = {}
    for bundle in t.bundles.values():
        if bundle.kind == LAN:
            lan_adj.setdefault(bundle.element_a, set()).add(bundle.element_b)
            lan_adj.setdefault(bundle.element_b, set()).add(bundle.element_a)
    reach = {t.control_center}
    frontier = [t.control_center]
    while frontier:
        cur = frontier.pop()
        for nxt in lan_adj.get(cur, ()):
            if nxt not in reach:
                reach.add(nxt)
                frontier.append(nxt)
    for element in list(t.hubs) + list(t.nodes):
        if element not in reach:
            out.add("E_LAN_REACH", f"{element} unreachable from control center over LAN", element)

    return list(out)


# ---------------------------------------------------------------------------
# Serialization (topology.v1)
# ---------------------------------------------------------------------------


def _switch_to_dict(sw: CrossbarSwitch) -> dict:
    return {
        "id": sw.switch_id,
        "rows": sw.rows,
        "cols": sw.cols,
        "jumpers": [list(j) for j in sw.jumpers],
        "mapping": sorted([r, c] for r, c in sw.mapping.items()),
    }


def _switch_from_dict(d: dict) -> CrossbarSwitch:
    return CrossbarSwitch(
        switch_id=d["id"],
        rows=int(d["rows"]),
        cols=int(d["cols"]),
        jumpers=tuple((int(a), int(b)) for a, b in d["jumpers"]),
        mapping={int(r): int(c) for r, c in d["mapping"]},
    )


def topology_to_dict(t: NetworkTopology) -> dict:
    """Serialize to the versioned ``topology.v1`` document."""
    return {
        "schema": "topology.v1",
        "control_center": t.control_center,
        "params": {k: (list(map(list, v)) if k == "jumpers" else v) for k, v in t.params.items()},
        "hubs": [
            {
                "id": hub.hub_id,
                "nodes": list(hub.node_ids),
                "switches": [
                    _switch_to_dict(hub.ring_switch),
                    _switch_to_dict(hub.internal_switch),
                    _switch_to_dict(hub.prepare_select),
                    _switch_to_dict(hub.measure_select),
                ],
            }
            for hub in (t.hubs[h] for h in t.hub_ids)
        ],
        "bundles": [
            {
                "id": b.bundle_id,
                "kind": b.kind,
                "a": b.element_a,
                "b": b.element_b,
                "qubit_lanes": b.qubit_lanes,
                "timing_fibers": b.timing_fibers,
                "lan_fibers": b.lan_fibers,
                "length_km": b.length_km,
                "per_fiber_loss_db": b.per_fiber_loss_db,
            }
            for _, b in sorted(t.bundles.items())
        ],
    }


def topology_from_dict(d: dict) -> NetworkTopology:
    if d.get("schema") != "topology.v1":
        raise EmulatorError("E_SCHEMA", f"expected topology.v1, got {d.get('schema')!r}")
    hubs: dict[str, EquipmentHub] = {}
    nodes: dict[str, QuantumNode] = {}
    for hd in d["hubs"]:
        switches = [_switch_from_dict(s) for s in hd["switches"]]
        by_role = {s.switch_id.split(".", 1)[1]: s for s in switches}
        hub = EquipmentHub(
            hub_id=hd["id"],
            node_ids=tuple(hd["nodes"]),
            ring_switch=by_role[RING_SWITCH],
            internal_switch=by_role[INTERNAL_SWITCH],
            prepare_select=by_role[PREPARE_SELECT],
            measure_select=by_role[MEASURE_SELECT],
        )
        hubs[hub.hub_id] = hub
        for k, node_id in enumerate(hub.node_ids):
            nodes[node_id] = QuantumNode(node_id, hub.hub_id, k)
    bundles = {
        bd["id"]: FiberBundle(
            bundle_id=bd["id"],
            kind=bd["kind"],
            element_a=bd["a"],
            element_b=bd["b"],
            qubit_lanes=int(bd["qubit_lanes"]),
            timing_fibers=int(bd["timing_fibers"]),
            lan_fibers=int(bd["lan_fibers"]),
            length_km=float(bd["length_km"]),
            per_fiber_loss_db=float(bd["per_fiber_loss_db"]),
        )
        for bd in d["bundles"]
    }
    params = dict(d.get("params", {}))
    if "jumpers" in params:
        params["jumpers"] = tuple(tuple(j) for j in params["jumpers"])
    return NetworkTopology(hubs, nodes, bundles, d.get("control_center", "CC"), params)
