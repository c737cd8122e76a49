import numpy as np
import pytest

from qnetem import topology as topo
from qnetem.errors import EmulatorError
from qnetem.jones import rotation

from oracles import crossbar_links_bruteforce


def source_to_node_config(t, hub="H0", source=0, module=0, unit=0, node_index=2):
    """Patch one entangled source's arms onto a node's lanes 0 and 1."""
    h = t.hubs[hub]
    topo.set_crossbar(h.prepare_select, [(2 * source, 8 * module + 2 * unit),
                                         (2 * source + 1, 8 * module + 2 * unit + 1)])
    topo.set_crossbar(h.internal_switch, [(2 * unit, 8), (2 * unit + 1, 9)])
    topo.set_crossbar(h.ring_switch, [(topo.ring_row_node(node_index, 0), 0),
                                      (topo.ring_row_node(node_index, 1), 1)])


class TestBuild:
    def test_counts_and_shape(self):
        t = topo.build_network(3)
        assert t.n_hubs == 3
        assert len(t.nodes) == 15
        for hub in t.hubs.values():
            assert len(hub.node_ids) == 5
            assert hub.source_count == 4
            assert hub.prepare_modules == 3 and hub.measure_modules == 3
            assert hub.detector_channels == 8 and hub.apc_channels == 4
            assert hub.peer_link_capacity == 18
            assert hub.ring_switch.shape == (60, 60)
            assert hub.internal_switch.shape == (20, 20)
            assert hub.prepare_select.shape == (8, 24)
            assert hub.measure_select.shape == (8, 24)

    def test_twelve_fibers_per_link(self):
        t = topo.build_network(2)
        pairs = [("H0", "H0-N0"), ("H1", "H1-N4"), ("H0", "H1")]
        for a, b in pairs:
            total = sum(
                t.bundle_between(a, b, kind).fiber_count
                for kind in (topo.PRIMARY, topo.SECONDARY, topo.LAN)
            )
            assert total == 12

    def test_bundle_split(self):
        t = topo.build_network(1)
        spoke = t.spoke_bundle("H0-N0", topo.PRIMARY)
        assert (spoke.qubit_lanes, spoke.timing_fibers, spoke.lan_fibers) == (4, 1, 0)
        lan = t.bundle_between("H0", "H0-N0", topo.LAN)
        assert (lan.qubit_lanes, lan.timing_fibers, lan.lan_fibers) == (0, 0, 2)

    def test_single_hub_ring_self_loop(self):
        t = topo.build_network(1)
        ring = t.ring_bundle("H0")
        assert ring.element_a == ring.element_b == "H0"
        assert not topo.validate_topology(t)

    def test_two_hub_ring_parallel_edges(self):
        t = topo.build_network(2)
        assert "H0~H1:primary:ring" in t.bundles
        assert "H1~H0:primary:ring" in t.bundles
        assert not topo.validate_topology(t)

    def test_default_loss_scale(self):
        t = topo.build_network(2, spoke_km=1.0, ring_km=10.0, loss_db_per_km=0.2)
        assert t.spoke_bundle("H0-N0").per_fiber_loss_db == pytest.approx(0.2)
        assert t.ring_bundle("H0").per_fiber_loss_db == pytest.approx(2.0)

    def test_validate_clean_for_all_sizes(self):
        for n in range(1, 9):
            t = topo.build_network(n)
            assert topo.validate_topology(t) == []
            assert len(t.nodes) == 5 * n


class TestCrossbar:
    def test_set_and_replace(self):
        sw = topo.CrossbarSwitch("s", 8, 24)
        topo.set_crossbar(sw, [(0, 3), (1, 4)])
        assert sw.mapping == {0: 3, 1: 4}
        topo.set_crossbar(sw, [(2, 5)])
        assert sw.mapping == {2: 5}

    def test_port_range(self):
        sw = topo.CrossbarSwitch("s", 8, 24)
        with pytest.raises(EmulatorError) as e:
            topo.set_crossbar(sw, [(8, 0)])
        assert e.value.code == "E_PORT_RANGE"
        with pytest.raises(EmulatorError):
            topo.set_crossbar(sw, [(0, 24)])
        with pytest.raises(EmulatorError):
            topo.set_crossbar(sw, [(-1, 0)])

    def test_fan_out_and_fan_in(self):
        sw = topo.CrossbarSwitch("s", 8, 8)
        with pytest.raises(EmulatorError) as e:
            topo.set_crossbar(sw, [(0, 1), (0, 2)])
        assert e.value.code == "E_FANOUT"
        with pytest.raises(EmulatorError) as e:
            topo.set_crossbar(sw, [(0, 1), (2, 1)])
        assert e.value.code == "E_FANIN"

    def test_failed_set_preserves_mapping(self):
        sw = topo.CrossbarSwitch("s", 8, 8)
        topo.set_crossbar(sw, [(0, 0)])
        with pytest.raises(EmulatorError):
            topo.set_crossbar(sw, [(1, 1), (1, 2)])
        assert sw.mapping == {0: 0}


class TestEffectiveConnectivity:
    def test_minimal_jumper_link(self):
        sw = topo.CrossbarSwitch("s", 4, 4, jumpers=((0, 1),))
        topo.set_crossbar(sw, [(0, 0), (1, 1)])
        assert topo.effective_connectivity(sw) == {(0, 1)}

    def test_no_mapping_no_links(self):
        sw = topo.CrossbarSwitch("s", 4, 4, jumpers=((0, 1), (2, 3)))
        assert topo.effective_connectivity(sw) == set()

    def test_half_connected_jumper(self):
        sw = topo.CrossbarSwitch("s", 4, 4, jumpers=((0, 1),))
        topo.set_crossbar(sw, [(2, 0)])
        assert topo.effective_connectivity(sw) == set()

    def test_symmetric_irreflexive(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            sw = _random_switch(rng)
            links = topo.effective_connectivity(sw)
            for i, j in links:
                assert i < j
                assert i != j

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(1234)
        for _ in range(200):
            sw = _random_switch(rng)
            got = topo.effective_connectivity(sw)
            want = crossbar_links_bruteforce(sw.rows, sw.cols, sw.mapping, sw.jumpers)
            assert got == want


def _random_switch(rng, rows=60, cols=60):
    cols_pool = list(rng.permutation(cols))
    n_jump = int(rng.integers(0, cols // 2 + 1))
    jumpers = tuple(
        (int(cols_pool[2 * i]), int(cols_pool[2 * i + 1])) for i in range(n_jump)
    )
    n_map = int(rng.integers(0, rows + 1))
    row_pool = rng.permutation(rows)[:n_map]
    col_pool = rng.permutation(cols)[:n_map]
    sw = topo.CrossbarSwitch("s", rows, cols, jumpers)
    topo.set_crossbar(sw, zip(row_pool.tolist(), col_pool.tolist()))
    return sw


class TestResolvePath:
    def test_source_to_node_two_segments(self):
        t = topo.build_network(1)
        source_to_node_config(t)
        path = topo.resolve_path(t, None, "H0.src0.a", "H0-N2", qubit_lane=0)
        assert [s.kind for s in path.segments] == ["hub", "fiber"]
        assert path.segments[0].element == "H0"
        assert path.segments[1].element == t.spoke_bundle("H0-N2").bundle_id
        assert path.total_loss_db == pytest.approx(0.2)
        assert path.total_length_m == pytest.approx(1000.0)

    def test_both_arms_resolve(self):
        t = topo.build_network(1)
        source_to_node_config(t)
        path_b = topo.resolve_path(t, None, "H0.src0.b", "H0-N2", qubit_lane=1)
        assert path_b.segments[-1].lane == 1

    def test_source_to_hub_measure(self):
        t = topo.build_network(1)
        h = t.hubs["H0"]
        topo.set_crossbar(h.prepare_select, [(0, 0), (1, 1)])
        topo.set_crossbar(h.internal_switch, [(0, 8), (1, 1)])
        topo.set_crossbar(h.measure_select, [(1, 1)])  # lane 1 -> module 0 unit 1
        path = topo.resolve_path(t, None, "H0.src0.b", "H0.m0.u1")
        assert [s.kind for s in path.segments] == ["hub"]
        assert path.total_loss_db == pytest.approx(0.0)
        wildcard = topo.resolve_path(t, None, "H0.src0.b", "H0.measure")
        assert wildcard.segments == path.segments

    def test_cross_hub_transit_via_jumper(self):
        t = topo.build_network(2)
        h0, h1 = t.hubs["H0"], t.hubs["H1"]
        topo.set_crossbar(h0.prepare_select, [(0, 0), (1, 1)])
        topo.set_crossbar(h0.internal_switch, [(0, 8)])
        topo.set_crossbar(h0.ring_switch, [(topo.ring_row_next_hub(0), 0)])
        topo.set_crossbar(
            h1.ring_switch,
            [(topo.ring_row_prev_hub(0), 8), (topo.ring_row_node(0, 0), 9)],
        )
        path = topo.resolve_path(t, None, "H0.src0.a", "H1-N0", qubit_lane=0)
        assert [s.kind for s in path.segments] == ["hub", "fiber", "hub", "fiber"]
        assert path.total_loss_db == pytest.approx(2.0 + 0.2)
        assert path.total_length_m == pytest.approx(11_000.0)

    def test_node_to_node_same_hub(self):
        t = topo.build_network(1)
        h = t.hubs["H0"]
        topo.set_crossbar(
            h.ring_switch,
            [(topo.ring_row_node(0, 0), 8), (topo.ring_row_node(1, 0), 9)],
        )
        path = topo.resolve_path(t, None, "H0-N0", "H0-N1", qubit_lane=0)
        assert [s.kind for s in path.segments] == ["fiber", "hub", "fiber"]
        assert path.total_loss_db == pytest.approx(0.4)

    def test_unconfigured_switch_no_path(self):
        t = topo.build_network(1)
        h = t.hubs["H0"]
        topo.set_crossbar(h.prepare_select, [(0, 0), (1, 1)])
        with pytest.raises(EmulatorError) as e:
            topo.resolve_path(t, None, "H0.src0.a", "H0-N2")
        assert e.value.code == "E_NO_PATH"

    def test_lane_and_bundle_checks(self):
        t = topo.build_network(1)
        with pytest.raises(EmulatorError) as e:
            topo.resolve_path(t, None, "H0.src0.a", "H0-N2", qubit_lane=4)
        assert e.value.code == "E_LANE"
        with pytest.raises(EmulatorError) as e:
            topo.resolve_path(t, None, "H0.src0.a", "H0-N2", bundle="tertiary")
        assert e.value.code == "E_LANE"

    def test_config_overrides_live_state(self):
        t = topo.build_network(1)
        source_to_node_config(t)
        config = {t.hubs["H0"].internal_switch.switch_id: {}}
        with pytest.raises(EmulatorError):
            topo.resolve_path(t, config, "H0.src0.a", "H0-N2")
        # live state untouched
        topo.resolve_path(t, None, "H0.src0.a", "H0-N2")

    def test_net_rotation_is_ordered_product(self):
        t = topo.build_network(2)
        h0, h1 = t.hubs["H0"], t.hubs["H1"]
        topo.set_crossbar(h0.prepare_select, [(0, 0), (1, 1)])
        topo.set_crossbar(h0.internal_switch, [(0, 8)])
        topo.set_crossbar(h0.ring_switch, [(topo.ring_row_next_hub(0), 0)])
        topo.set_crossbar(
            h1.ring_switch,
            [(topo.ring_row_prev_hub(0), 8), (topo.ring_row_node(0, 0), 9)],
        )
        ring_id = t.ring_bundle("H0").bundle_id
        spoke_id = t.spoke_bundle("H1-N0").bundle_id
        r1, r2 = rotation(0.3), rotation(0.5)
        channels = {(ring_id, 0): r1, (spoke_id, 0): r2}
        path = topo.resolve_path(t, None, "H0.src0.a", "H1-N0", channels=channels)
        assert np.allclose(path.net_rotation, r2 @ r1)
        assert np.allclose(path.net_rotation.conj().T @ path.net_rotation, np.eye(2), atol=1e-9)

    def test_loss_additivity_on_split_segment(self):
        seg = topo.PathSegment("fiber", "x", 0, 0.37, 1000.0)
        halves = (
            topo.PathSegment("fiber", "x", 0, 0.185, 500.0),
            topo.PathSegment("hub", "H0", None, 0.0, 0.0),
            topo.PathSegment("fiber", "x", 0, 0.185, 500.0),
        )
        whole = topo.OpticalPath("a", "b", (seg,), np.eye(2))
        split = topo.OpticalPath("a", "b", halves, np.eye(2))
        assert abs(whole.total_loss_db - split.total_loss_db) < 1e-12


class TestAddHub:
    def test_isomorphic_to_fresh_build(self):
        nx = pytest.importorskip("networkx")
        t3 = topo.build_network(3)
        t4 = topo.add_hub(t3)
        fresh = topo.build_network(4)
        assert _element_graph(nx, t4) is not None
        assert nx.is_isomorphic(
            _element_graph(nx, t4),
            _element_graph(nx, fresh),
            node_match=lambda a, b: a["kind"] == b["kind"],
            edge_match=lambda a, b: sorted(d["kinds"] for d in a.values())
            == sorted(d["kinds"] for d in b.values()),
        )
        # original untouched
        assert t3.n_hubs == 3 and len(t3.nodes) == 15

    def test_five_more_clients(self):
        t = topo.build_network(2)
        t2 = topo.add_hub(t)
        assert len(t2.nodes) == len(t.nodes) + 5
        assert topo.validate_topology(t2) == []


def _element_graph(nx, t):
    g = nx.MultiGraph()
    for hub_id in t.hubs:
        g.add_node(hub_id, kind="hub")
    for node_id in t.nodes:
        g.add_node(node_id, kind="node")
    g.add_node(t.control_center, kind="cc")
    for b in t.bundles.values():
        g.add_edge(b.element_a, b.element_b, kinds=b.kind)
    return g


class TestValidateFindings:
    def test_missing_bundle_detected(self):
        t = topo.build_network(1)
        del t.bundles["H0~H0-N0:lan"]
        codes = {f.code for f in topo.validate_topology(t)}
        assert "E_BUNDLE_MISSING" in codes

    def test_jumper_collision_with_internal_lanes(self):
        t = topo.build_network(1)
        bad = topo.CrossbarSwitch("H0.ring60", 60, 60, jumpers=((2, 9),))
        hub = t.hubs["H0"]
        object.__setattr__(hub, "ring_switch", bad)
        t._switches[bad.switch_id] = bad
        codes = {f.code for f in topo.validate_topology(t)}
        assert "E_JUMPER_OVERLAP" in codes

    def test_corrupt_mapping_detected(self):
        t = topo.build_network(1)
        sw = t.hubs["H0"].internal_switch
        sw.mapping = {0: 5, 1: 5}  # bypasses set_crossbar
        codes = {f.code for f in topo.validate_topology(t)}
        assert "E_FANIN" in codes


class TestSerialization:
    def test_round_trip(self):
        t = topo.build_network(3, spoke_km=2.0, ring_km=7.5, loss_db_per_km=0.25)
        source_to_node_config(t)
        doc = topo.topology_to_dict(t)
        assert doc["schema"] == "topology.v1"
        t2 = topo.topology_from_dict(doc)
        assert topo.topology_to_dict(t2) == doc
        # switch state preserved
        assert t2.hubs["H0"].ring_switch.mapping == t.hubs["H0"].ring_switch.mapping

    def test_rejects_wrong_schema(self):
        with pytest.raises(EmulatorError) as e:
            topo.topology_from_dict({"schema": "topology.v2"})
        assert e.value.code == "E_SCHEMA"
