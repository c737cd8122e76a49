"""Design-to-configuration compiler for the control plane.

A design document (format ``design.v1``) describes an experiment at the
component level: which hubs' sources to use, where each output arm should
be delivered, the analyzer basis at each delivery point, polarization
control on/off, and which deliveries to pair for coincidence counting.

``compile_request`` lowers a design onto a concrete topology, producing a
``config.v1`` document: crossbar mappings for every switch the paths
touch, source enables, prepare/measure unit selections, APC channel
assignments and timing pairs. Lane assignment is greedy first-fit over
the four-lane qubit bus (primary then secondary), with backtracking to
the opposite ring direction when the shorter way is exhausted.

``validate_config`` re-checks any config document, compiled or
hand-written, and returns findings instead of raising.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import (
    E_CAPACITY,
    E_FANIN,
    E_FANOUT,
    E_PORT_RANGE,
    E_RESOURCE,
    E_SCHEMA,
    E_UNKNOWN_ELEMENT,
    E_UNROUTABLE,
    EmulatorError,
    FindingList,
)
from . import topology as topo
from .timing import DEFAULT_WINDOW_PS

DESIGN_FORMAT = "design.v1"
CONFIG_FORMAT = "config.v1"

MODES = ("entangled", "heralded")
DEFAULT_PAIR_RATE_HZ = 1_000_000.0

_ARM_NAMES = ("a", "b")
_MEASURE_UNITS = 4  # detector channels / 2


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkConfigRequest:
    """A subscriber's ask: a design plus the window it should run in."""

    request_id: str
    subscriber_id: str
    design: Mapping
    start_s: float = 0.0
    end_s: float = 1.0
    priority: int = 0


@dataclass(frozen=True)
class CompiledConfig:
    """Per-device settings realizing one request, with provenance."""

    request_id: str
    subscriber_id: str
    document: dict

    def to_json(self) -> str:
        return json.dumps(self.document, indent=2, sort_keys=True)

    @classmethod
    def from_document(cls, doc: Mapping) -> "CompiledConfig":
        return cls(str(doc.get("request_id", "")), str(doc.get("subscriber_id", "")), dict(doc))


def config_document(config) -> dict:
    """Accept a CompiledConfig or a raw config.v1 dict."""
    if isinstance(config, CompiledConfig):
        return config.document
    return dict(config)


def normalized_settings(doc: Mapping) -> dict[str, dict[int, int]]:
    """Switch settings with integer ports (JSON round-trips stringify keys)."""
    out: dict[str, dict[int, int]] = {}
    for sid, mapping in dict(doc.get("switch_settings", {})).items():
        pairs = mapping.items() if isinstance(mapping, Mapping) else mapping
        out[str(sid)] = {int(r): int(c) for r, c in pairs}
    return out


# ---------------------------------------------------------------------------
# Design checking
# ---------------------------------------------------------------------------


def _bad(message: str) -> EmulatorError:
    return EmulatorError(E_SCHEMA, message)


def check_design(design: Mapping, t: topo.NetworkTopology) -> None:
    """Raise E_SCHEMA / E_UNKNOWN_ELEMENT if the design is malformed."""
    if not isinstance(design, Mapping):
        raise _bad("design must be an object")
    if design.get("format") != DESIGN_FORMAT:
        raise _bad(f"design format must be {DESIGN_FORMAT!r}")
    links = design.get("links", [])
    if not isinstance(links, (list, tuple)):
        raise _bad("links must be a list")
    for li, link in enumerate(links):
        where = f"links[{li}]"
        if not isinstance(link, Mapping):
            raise _bad(f"{where} must be an object")
        hub = link.get("source_hub")
        if hub not in t.hubs:
            raise EmulatorError(E_UNKNOWN_ELEMENT, f"{where}: unknown hub {hub!r}")
        if link.get("mode") not in MODES:
            raise _bad(f"{where}: mode must be one of {MODES}")
        rate = link.get("pair_rate_hz", DEFAULT_PAIR_RATE_HZ)
        if not isinstance(rate, (int, float)) or rate <= 0:
            raise _bad(f"{where}: pair_rate_hz must be positive")
        arms = link.get("arms")
        if not isinstance(arms, (list, tuple)) or len(arms) != 2:
            raise _bad(f"{where}: a source link has exactly two arms")
        for oi, arm in enumerate(arms):
            ep = arm.get("endpoint") if isinstance(arm, Mapping) else None
            if not _endpoint_ok(ep, t):
                raise EmulatorError(
                    E_UNKNOWN_ELEMENT, f"{where}.arms[{oi}]: unknown endpoint {ep!r}"
                )
            basis = arm.get("basis_deg", 0.0)
            if not isinstance(basis, (int, float)):
                raise _bad(f"{where}.arms[{oi}]: basis_deg must be a number")
    n_taps = 2 * len(links)
    pairs = design.get("pairs", [])
    if not isinstance(pairs, (list, tuple)):
        raise _bad("pairs must be a list")
    for pi, pair in enumerate(pairs):
        if len(pair) != 2 or any(not 0 <= int(x) < n_taps for x in pair):
            raise _bad(f"pairs[{pi}] must name two tap indices below {n_taps}")
        if int(pair[0]) == int(pair[1]):
            raise _bad(f"pairs[{pi}] pairs a tap with itself")
    window = design.get("window_ps", DEFAULT_WINDOW_PS)
    if not isinstance(window, int) or window <= 0:
        raise _bad("window_ps must be a positive integer")


def _endpoint_ok(ep, t: topo.NetworkTopology) -> bool:
    if not isinstance(ep, str):
        return False
    if ep in t.nodes:
        return True
    parts = ep.split(".")
    return len(parts) == 2 and parts[0] in t.hubs and parts[1] == "measure"


# ---------------------------------------------------------------------------
# Resource pools
# ---------------------------------------------------------------------------


class _Exhausted(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message


@dataclass
class _Pools:
    """Mutable free-resource bookkeeping for one compilation."""

    sources: dict = field(default_factory=dict)
    measure_units: dict = field(default_factory=dict)
    out_lanes: dict = field(default_factory=dict)
    in_lanes: dict = field(default_factory=dict)
    measure_lanes: dict = field(default_factory=dict)
    jumpers: dict = field(default_factory=dict)
    apc: dict = field(default_factory=dict)
    spoke_lanes: dict = field(default_factory=dict)
    ring_lanes: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    @classmethod
    def for_topology(cls, t: topo.NetworkTopology) -> "_Pools":
        p = cls()
        for hid, hub in t.hubs.items():
            p.sources[hid] = list(range(hub.source_count))
            p.measure_units[hid] = list(range(_MEASURE_UNITS))
            p.out_lanes[hid] = list(range(4))
            p.in_lanes[hid] = list(range(4))
            p.measure_lanes[hid] = list(topo.I20_COL_MEASURE)
            p.jumpers[hid] = list(hub.ring_switch.jumpers)
            p.apc[hid] = list(range(hub.apc_channels))
        for nid in t.nodes:
            for kind in (topo.PRIMARY, topo.SECONDARY):
                p.spoke_lanes[(nid, kind)] = list(range(4))
        for hid in t.hub_ids:
            nxt = t.next_hub(hid)
            for kind in (topo.PRIMARY, topo.SECONDARY):
                if t.bundle_between(hid, nxt, kind) is not None:
                    p.ring_lanes[(hid, kind)] = list(range(4))
        return p

    def take(self, pool: dict, key, code: str, what: str) -> int:
        free = pool.get(key, [])
        if not free:
            raise _Exhausted(code, f"no free {what} on {key}")
        return free.pop(0)

    def patch(self, switch_id: str, row: int, col: int) -> None:
        m = self.settings.setdefault(switch_id, {})
        if row in m or col in m.values():
            raise _Exhausted(E_UNROUTABLE, f"{switch_id} port collision at ({row},{col})")
        m[row] = col

    def snapshot(self) -> "_Pools":
        return copy.deepcopy(self)

    def restore(self, snap: "_Pools") -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(snap, name))


# ---------------------------------------------------------------------------
# Routing
# ---------------------------------------------------------------------------


def _parse_design_endpoint(ep: str, t: topo.NetworkTopology) -> tuple[str, Optional[str]]:
    """Return (hub_id, node_id-or-None) for a design endpoint string."""
    if ep in t.nodes:
        return t.nodes[ep].hub_id, ep
    return ep.split(".")[0], None


def _take_span_lane(pools: _Pools, span_hub: str) -> tuple[str, int]:
    """First free qubit lane on the ring span leaving ``span_hub`` clockwise."""
    for kind in (topo.PRIMARY, topo.SECONDARY):
        free = pools.ring_lanes.get((span_hub, kind), [])
        if free:
            return kind, free.pop(0)
    raise _Exhausted(E_UNROUTABLE, f"ring span from {span_hub} has no free qubit lane")


def _take_spoke_lane(pools: _Pools, node_id: str) -> tuple[str, int]:
    for kind in (topo.PRIMARY, topo.SECONDARY):
        free = pools.spoke_lanes.get((node_id, kind), [])
        if free:
            return kind, free.pop(0)
    raise _Exhausted(E_UNROUTABLE, f"spoke to {node_id} has no free qubit lane")


def _deliver_local(
    pools: _Pools, t: topo.NetworkTopology, hub_id: str, i20_row: int, node_id: Optional[str]
) -> dict:
    """Patch the tail of a route inside ``hub_id`` from internal-switch row."""
    hub = t.hubs[hub_id]
    i20 = hub.internal_switch.switch_id
    if node_id is None:
        lane = pools.take(pools.measure_lanes, hub_id, E_UNROUTABLE, "measure lane")
        unit = pools.take(pools.measure_units, hub_id, E_RESOURCE, "measure unit")
        module = unit % hub.measure_modules
        pools.patch(i20, i20_row, lane)
        pools.patch(hub.measure_select.switch_id, lane, 8 * module + unit)
        return {
            "kind": "measure",
            "resolved": f"{hub_id}.m{module}.u{unit}",
            "detector_hub": hub_id,
            "detector_channels": list(topo.measure_unit_channels(unit)),
            "spoke_bundle": topo.PRIMARY,
            "spoke_lane": 0,
        }
    node = t.nodes[node_id]
    out = pools.take(pools.out_lanes, hub_id, E_UNROUTABLE, "outbound internal lane")
    kind, lane = _take_spoke_lane(pools, node_id)
    pools.patch(i20, i20_row, 8 + out)
    pools.patch(hub.ring_switch.switch_id, topo.ring_row_node(node.index, lane, kind), out)
    return {
        "kind": "node",
        "resolved": node_id,
        "detector_hub": None,
        "detector_channels": None,
        "spoke_bundle": kind,
        "spoke_lane": lane,
    }


def _route_direction(
    pools: _Pools,
    t: topo.NetworkTopology,
    src_hub: str,
    dst_hub: str,
    i20_row: int,
    node_id: Optional[str],
    clockwise: bool,
) -> dict:
    """Patch a full route in one ring direction; raises _Exhausted on any miss."""
    hubs = t.hub_ids
    idx = {h: i for i, h in enumerate(hubs)}
    n = len(hubs)
    step = 1 if clockwise else -1
    chain = []
    h = src_hub
    while h != dst_hub:
        chain.append(h)
        h = hubs[(idx[h] + step) % n]
    chain.append(dst_hub)

    src = t.hubs[src_hub]
    out = pools.take(pools.out_lanes, src_hub, E_UNROUTABLE, "outbound internal lane")
    pools.patch(src.internal_switch.switch_id, i20_row, 8 + out)

    # Lane on each span, jumper loop at each transit hub.
    arrive_row = None
    for here, there in zip(chain, chain[1:]):
        owner = here if clockwise else there
        kind, lane = _take_span_lane(pools, owner)
        depart = (
            topo.ring_row_next_hub(lane, kind)
            if clockwise
            else topo.ring_row_prev_hub(lane, kind)
        )
        ring = t.hubs[here].ring_switch.switch_id
        if arrive_row is None:
            pools.patch(ring, depart, out)
        else:
            j, j2 = tuple(pools.jumpers[here].pop(0)) if pools.jumpers[here] else (None, None)
            if j is None:
                raise _Exhausted(E_UNROUTABLE, f"no free jumper loop on {here}")
            pools.patch(ring, arrive_row, j)
            pools.patch(ring, depart, j2)
        arrive_row = (
            topo.ring_row_prev_hub(lane, kind)
            if clockwise
            else topo.ring_row_next_hub(lane, kind)
        )

    dst = t.hubs[dst_hub]
    ext_in = pools.take(pools.in_lanes, dst_hub, E_UNROUTABLE, "inbound internal lane")
    pools.patch(dst.ring_switch.switch_id, arrive_row, 4 + ext_in)
    return _deliver_local(pools, t, dst_hub, 8 + ext_in, node_id)


def _route_arm(
    pools: _Pools,
    t: topo.NetworkTopology,
    src_hub: str,
    i20_row: int,
    endpoint: str,
) -> dict:
    dst_hub, node_id = _parse_design_endpoint(endpoint, t)
    if dst_hub == src_hub:
        return _deliver_local(pools, t, src_hub, i20_row, node_id)
    hubs = t.hub_ids
    idx = {h: i for i, h in enumerate(hubs)}
    n = len(hubs)
    d_cw = (idx[dst_hub] - idx[src_hub]) % n
    d_ccw = (idx[src_hub] - idx[dst_hub]) % n
    order = (True, False) if d_cw <= d_ccw else (False, True)
    snap = pools.snapshot()
    last: Optional[_Exhausted] = None
    for clockwise in order:
        try:
            return _route_direction(pools, t, src_hub, dst_hub, i20_row, node_id, clockwise)
        except _Exhausted as exc:
            pools.restore(snap)
            snap = pools.snapshot()
            last = exc
    assert last is not None
    raise last


# ---------------------------------------------------------------------------
# compile_request
# ---------------------------------------------------------------------------


def compile_request(req: NetworkConfigRequest, t: topo.NetworkTopology) -> CompiledConfig:
    """Lower a design onto the topology; deterministic for a given input.

    Raises E_UNROUTABLE when no lane assignment satisfies all arms, and
    E_RESOURCE when the design asks for more sources, measure units or
    APC channels than the hubs provide.
    """
    design = req.design
    check_design(design, t)
    pools = _Pools.for_topology(t)
    sources: list[dict] = []
    taps: list[dict] = []
    try:
        for li, link in enumerate(design.get("links", [])):
            hub_id = link["source_hub"]
            hub = t.hubs[hub_id]
            s = pools.take(pools.sources, hub_id, E_RESOURCE, "biphoton source")
            unit, module = s, s % hub.prepare_modules
            psel = hub.prepare_select.switch_id
            for o in range(2):
                pools.patch(psel, 2 * s + o, 8 * module + 2 * unit + o)
            sources.append(
                {
                    "hub": hub_id,
                    "index": s,
                    "mode": link["mode"],
                    "pair_rate_hz": float(link.get("pair_rate_hz", DEFAULT_PAIR_RATE_HZ)),
                    "prepare_module": module,
                    "prepare_unit": unit,
                }
            )
            for o, arm in enumerate(link["arms"]):
                placed = _route_arm(pools, t, hub_id, 2 * unit + o, arm["endpoint"])
                tap_index = len(taps)
                apc = None
                if arm.get("apc"):
                    ch = pools.take(pools.apc, hub_id, E_RESOURCE, "APC channel")
                    apc = {"hub": hub_id, "channel": ch}
                taps.append(
                    {
                        "endpoint": arm["endpoint"],
                        "resolved": placed["resolved"],
                        "kind": placed["kind"],
                        "link": li,
                        "arm": o,
                        "source_hub": hub_id,
                        "source_index": s,
                        "basis_deg": float(arm.get("basis_deg", 0.0)),
                        "channels": [2 * tap_index, 2 * tap_index + 1],
                        "spoke_bundle": placed["spoke_bundle"],
                        "spoke_lane": placed["spoke_lane"],
                        "detector_hub": placed["detector_hub"],
                        "detector_channels": placed["detector_channels"],
                        "apc": apc,
                    }
                )
    except _Exhausted as exc:
        raise EmulatorError(exc.code, exc.message) from None

    doc = {
        "format": CONFIG_FORMAT,
        "request_id": req.request_id,
        "subscriber_id": req.subscriber_id,
        "window_ps": int(design.get("window_ps", DEFAULT_WINDOW_PS)),
        "switch_settings": {sid: dict(m) for sid, m in sorted(pools.settings.items())},
        "sources": sources,
        "taps": taps,
        "pairs": [[int(a), int(b)] for a, b in design.get("pairs", [])],
        "claims": [],
    }

    # Every emitted path must re-resolve; record its measured link budget.
    claims: list[list] = []
    for i, tap in enumerate(taps):
        path = resolve_tap(doc, t, i)
        tap["loss_db"] = round(path.total_loss_db, 9)
        tap["length_m"] = round(path.total_length_m, 6)
        for seg in path.segments:
            if seg.kind == "fiber":
                claims.append([seg.element, int(seg.lane)])
    doc["claims"] = sorted(claims)
    return CompiledConfig(req.request_id, req.subscriber_id, doc)


def resolve_tap(config, t: topo.NetworkTopology, tap_index: int) -> topo.OpticalPath:
    """Re-resolve one tap's source-to-endpoint path under the config."""
    doc = config_document(config)
    tap = doc["taps"][tap_index]
    src = f"{tap['source_hub']}.src{tap['source_index']}.{_ARM_NAMES[tap['arm']]}"
    return topo.resolve_path(
        t,
        normalized_settings(doc),
        src,
        tap["resolved"],
        qubit_lane=int(tap.get("spoke_lane", 0)),
        bundle=tap.get("spoke_bundle", topo.PRIMARY),
    )


# ---------------------------------------------------------------------------
# validate_config
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = ("format", "switch_settings", "sources", "taps", "pairs", "window_ps")


def validate_config(config, t: topo.NetworkTopology, calendar=None) -> FindingList:
    """Check a config document against the topology; findings, no raising.

    Covers schema shape, switch port ranges and injectivity, capacity
    limits (sources, detector channels, APC channels per hub), tap path
    continuity by re-resolution, and claim-list consistency. An empty
    list means the config is instantiable.
    """
    out = FindingList()
    doc = config_document(config)
    if doc.get("format") != CONFIG_FORMAT:
        out.add(E_SCHEMA, f"config format must be {CONFIG_FORMAT!r}", "format")
        return out
    for key in _REQUIRED_KEYS:
        if key not in doc:
            out.add(E_SCHEMA, f"missing required key {key!r}", key)
    if out:
        return out

    _check_switch_settings(doc, t, out)
    _check_capacities(doc, t, out)
    _check_taps(doc, t, out)
    return out


def _check_switch_settings(doc, t, out: FindingList) -> None:
    known = t.switches()
    for sid, raw in dict(doc.get("switch_settings", {})).items():
        sw = known.get(str(sid))
        if sw is None:
            out.add(E_UNKNOWN_ELEMENT, f"unknown switch {sid!r}", str(sid))
            continue
        try:
            pairs = [
                (int(r), int(c))
                for r, c in (raw.items() if isinstance(raw, Mapping) else raw)
            ]
        except (TypeError, ValueError):
            out.add(E_SCHEMA, "switch settings must be row/col integer pairs", str(sid))
            continue
        rows_seen: set[int] = set()
        cols_seen: set[int] = set()
        for r, c in pairs:
            if not (0 <= r < sw.rows and 0 <= c < sw.cols):
                out.add(E_PORT_RANGE, f"port ({r},{c}) outside {sw.shape}", str(sid))
                continue
            if r in rows_seen:
                out.add(E_FANOUT, f"row {r} mapped to two cols", str(sid))
            if c in cols_seen:
                out.add(E_FANIN, f"col {c} fed by two rows", str(sid))
            rows_seen.add(r)
            cols_seen.add(c)


def _check_capacities(doc, t, out: FindingList) -> None:
    per_hub_sources: dict[str, list[int]] = {}
    for i, src in enumerate(doc.get("sources", [])):
        hub = t.hubs.get(src.get("hub"))
        if hub is None:
            out.add(E_UNKNOWN_ELEMENT, f"unknown hub {src.get('hub')!r}", f"sources[{i}]")
            continue
        idx = int(src.get("index", -1))
        if not 0 <= idx < hub.source_count:
            out.add(E_PORT_RANGE, f"no source {idx} on {hub.hub_id}", f"sources[{i}]")
        if src.get("mode") not in MODES:
            out.add(E_SCHEMA, f"bad mode {src.get('mode')!r}", f"sources[{i}]")
        used = per_hub_sources.setdefault(hub.hub_id, [])
        if idx in used:
            out.add(E_SCHEMA, f"source {idx} on {hub.hub_id} enabled twice", f"sources[{i}]")
        used.append(idx)
    for hub_id, used in per_hub_sources.items():
        cap = t.hubs[hub_id].source_count
        if len(used) > cap:
            out.add(E_CAPACITY, f"{len(used)} sources claimed on {hub_id}, only {cap}", hub_id)

    det_claims: dict[str, list[int]] = {}
    apc_claims: dict[str, list[int]] = {}
    for i, tap in enumerate(doc.get("taps", [])):
        hub_id = tap.get("detector_hub")
        for ch in tap.get("detector_channels") or []:
            det_claims.setdefault(str(hub_id), []).append(int(ch))
        apc = tap.get("apc")
        if apc:
            apc_claims.setdefault(str(apc.get("hub")), []).append(int(apc.get("channel", -1)))
    for hub_id, claims in det_claims.items():
        hub = t.hubs.get(hub_id)
        if hub is None:
            out.add(E_UNKNOWN_ELEMENT, f"unknown detector hub {hub_id!r}", hub_id)
            continue
        if len(claims) > hub.detector_channels:
            out.add(
                E_CAPACITY,
                f"{len(claims)} detector channels claimed on {hub_id}, bank has {hub.detector_channels}",
                hub_id,
            )
        elif len(set(claims)) != len(claims):
            out.add(E_CAPACITY, f"detector channel claimed twice on {hub_id}", hub_id)
        for ch in claims:
            if not 0 <= ch < hub.detector_channels:
                out.add(E_PORT_RANGE, f"detector channel {ch} outside bank", hub_id)
    for hub_id, claims in apc_claims.items():
        hub = t.hubs.get(hub_id)
        if hub is None:
            out.add(E_UNKNOWN_ELEMENT, f"unknown APC hub {hub_id!r}", hub_id)
            continue
        if len(claims) > hub.apc_channels:
            out.add(
                E_CAPACITY,
                f"{len(claims)} APC channels claimed on {hub_id}, only {hub.apc_channels}",
                hub_id,
            )
        elif len(set(claims)) != len(claims):
            out.add(E_CAPACITY, f"APC channel claimed twice on {hub_id}", hub_id)


def _check_taps(doc, t, out: FindingList) -> None:
    taps = doc.get("taps", [])
    sources = doc.get("sources", [])
    arms_by_link: dict[int, set[int]] = {}
    for tap in taps:
        try:
            li = int(tap.get("link", -1))
            arms_by_link.setdefault(li, set()).add(int(tap.get("arm", -1)))
        except (TypeError, ValueError):
            out.add(E_SCHEMA, "tap link/arm must be integers", "taps")
            return
    for li, arms in sorted(arms_by_link.items()):
        if not 0 <= li < len(sources):
            out.add(E_SCHEMA, f"tap names link {li} with no source entry", "taps")
        elif arms != {0, 1}:
            out.add(E_SCHEMA, f"link {li} must have exactly arms 0 and 1", "taps")
    if len(arms_by_link) != len(sources):
        out.add(E_SCHEMA, "every source entry needs its two taps", "taps")
    seen_channels: set[int] = set()
    resolved_claims: list[list] = []
    for i, tap in enumerate(taps):
        where = f"taps[{i}]"
        chans = [int(c) for c in tap.get("channels", [])]
        if len(chans) != 2 or seen_channels.intersection(chans):
            out.add(E_SCHEMA, "tap channels must be two ids unique across taps", where)
        seen_channels.update(chans)
        try:
            path = resolve_tap(doc, t, i)
        except EmulatorError as exc:
            out.add(exc.code, exc.message, where)
            continue
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            out.add(E_SCHEMA, f"tap is malformed ({exc!r})", where)
            continue
        for seg in path.segments:
            if seg.kind == "fiber":
                resolved_claims.append([seg.element, int(seg.lane)])
    n_taps = len(taps)
    for pi, pair in enumerate(doc.get("pairs", [])):
        ok = len(pair) == 2 and all(0 <= int(x) < n_taps for x in pair)
        if not ok or int(pair[0]) == int(pair[1]):
            out.add(E_SCHEMA, "pair must name two distinct tap indices", f"pairs[{pi}]")
    declared = sorted([str(b), int(l)] for b, l in doc.get("claims", []))
    if not out and declared != sorted(resolved_claims):
        out.add(E_SCHEMA, "claims do not match the resolved paths", "claims")


# ---------------------------------------------------------------------------
# Scheduling resources
# ---------------------------------------------------------------------------


def config_resources(config) -> frozenset:
    """Name every device, lane and port the config would occupy.

    Two configs may run in overlapping windows iff these sets are
    disjoint; the scheduler treats the names as opaque.
    """
    doc = config_document(config)
    names: set[str] = set()
    for src in doc.get("sources", []):
        names.add(f"{src['hub']}:src{src['index']}")
        names.add(f"{src['hub']}:prep{src['prepare_unit']}")
    for tap in doc.get("taps", []):
        for ch in tap.get("detector_channels") or []:
            names.add(f"{tap['detector_hub']}:det{int(ch)}")
        apc = tap.get("apc")
        if apc:
            names.add(f"{apc['hub']}:apc{apc['channel']}")
    for bundle, lane in doc.get("claims", []):
        names.add(f"{bundle}:lane{int(lane)}")
    for sid, mapping in normalized_settings(doc).items():
        for r, c in mapping.items():
            names.add(f"{sid}:r{r}")
            names.add(f"{sid}:c{c}")
    return frozenset(names)


def device_count(config) -> int:
    """Billable devices: sources, prepare units, detector and APC channels."""
    doc = config_document(config)
    n = 2 * len(doc.get("sources", []))
    for tap in doc.get("taps", []):
        n += len(tap.get("detector_channels") or [])
        if tap.get("apc"):
            n += 1
    return n


# ---------------------------------------------------------------------------
# Random valid designs (fuzzing aid)
# ---------------------------------------------------------------------------


def fuzz_design(
    t: topo.NetworkTopology, rng: np.random.Generator, max_links: int = 4
) -> dict:
    """Draw a random design that respects per-hub budgets.

    Tracks the same equipment budgets the compiler enforces (sources,
    measure units, APC channels, internal lane counts) so the result is
    compilable in practice; rare multi-hop lane contention is left to the
    caller's retry loop.
    """
    hubs = list(t.hub_ids)
    sources = {h: t.hubs[h].source_count for h in hubs}
    units = {h: _MEASURE_UNITS for h in hubs}
    out_lanes = {h: 4 for h in hubs}
    in_lanes = {h: 4 for h in hubs}
    apc = {h: t.hubs[h].apc_channels for h in hubs}
    nodes_by_hub = {h: [n for n, nd in t.nodes.items() if nd.hub_id == h] for h in hubs}

    links = []
    n_links = int(rng.integers(1, max_links + 1))
    for _ in range(n_links):
        options = [h for h in hubs if sources[h] > 0]
        if not options:
            break
        hub = options[int(rng.integers(len(options)))]
        sources[hub] -= 1
        arms = []
        for _arm in range(2):
            choices = []
            if units[hub] > 0:
                choices.append(("measure", hub))
            if out_lanes[hub] > 0:
                for target in hubs:
                    if target == hub:
                        choices.append(("node", target))
                    elif in_lanes[target] > 0:
                        if out_lanes[target] > 0:
                            choices.append(("node", target))
                        if units[target] > 0:
                            choices.append(("remote_measure", target))
            if not choices:
                choices = [("measure", hub)] if units[hub] > 0 else []
            if not choices:
                break
            kind, target = choices[int(rng.integers(len(choices)))]
            if kind == "measure":
                units[target] -= 1
                endpoint = f"{target}.measure"
            elif kind == "remote_measure":
                out_lanes[hub] -= 1
                in_lanes[target] -= 1
                units[target] -= 1
                endpoint = f"{target}.measure"
            else:
                out_lanes[hub] -= 1
                if target != hub:
                    in_lanes[target] -= 1
                out_lanes[target] -= 0 if target == hub else 1
                nodes = nodes_by_hub[target]
                endpoint = nodes[int(rng.integers(len(nodes)))]
            use_apc = bool(rng.random() < 0.25) and apc[hub] > 0
            if use_apc:
                apc[hub] -= 1
            arms.append(
                {
                    "endpoint": endpoint,
                    "basis_deg": float(rng.choice([0.0, 22.5, 45.0, -22.5, -45.0])),
                    "apc": use_apc,
                }
            )
        if len(arms) != 2:
            sources[hub] += 1
            continue
        links.append(
            {
                "source_hub": hub,
                "mode": str(rng.choice(MODES)),
                "pair_rate_hz": float(rng.choice([2e5, 1e6, 5e6])),
                "arms": arms,
            }
        )

    pairs = [[2 * i, 2 * i + 1] for i in range(len(links)) if rng.random() < 0.8]
    return {
        "format": DESIGN_FORMAT,
        "links": links,
        "pairs": pairs,
        "window_ps": int(rng.choice([500, 1000, 2000])),
    }
