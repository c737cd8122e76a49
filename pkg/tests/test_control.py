"""Control center lifecycle: schedule, instantiate, monitor, archive, meter.

Scheduler acceptance is checked against an independent brute-force pair
scan; instantiation rollback is checked bit-exact against a pre-push
snapshot of every switch; count rates are checked against the closed-form
link-budget oracle.
"""

import copy
import hashlib
import json
import zipfile

import numpy as np
import pytest

from qnetem import compiler, control, optics, tags, topology
from qnetem.compiler import NetworkConfigRequest, compile_request, config_resources
from qnetem.control import ControlCenter, find_conflicts
from qnetem.errors import (
    E_CONFLICT,
    E_DEVICE,
    E_EXPIRED,
    E_NOT_FINISHED,
    E_RESOURCE,
    E_SCHEMA,
    E_UNKNOWN_HANDLE,
    EmulatorError,
)


def design(links, pairs=None, window_ps=1000):
    return {
        "format": "design.v1",
        "links": links,
        "pairs": pairs if pairs is not None else [],
        "window_ps": window_ps,
    }


def link(hub, ep_a, ep_b, mode="entangled", rate=1e6, apc_a=False, apc_b=False):
    return {
        "source_hub": hub,
        "mode": mode,
        "pair_rate_hz": rate,
        "arms": [
            {"endpoint": ep_a, "basis_deg": 0.0, "apc": apc_a},
            {"endpoint": ep_b, "basis_deg": 0.0, "apc": apc_b},
        ],
    }


def request(rid, d, start=0.0, end=1.0, priority=0, subscriber="alice"):
    return NetworkConfigRequest(rid, subscriber, d, start, end, priority)


@pytest.fixture()
def center(tmp_path):
    t = topology.build_network(3)
    return ControlCenter(
        t,
        seed=42,
        data_dir=tmp_path,
        detector=optics.DetectorModel(
            efficiency=0.9, dark_rate_hz=50.0, jitter_ps=30.0, dead_ps=0, channel_count=2
        ),
    )


def pair_design(rate=1e6):
    return design([link("H0", "H0-N0", "H0-N1", rate=rate)], [[0, 1]])


class TestSubmit:
    def test_submit_compiles_and_validates(self, center):
        rec = center.submit(request("r1", pair_design()))
        assert rec.config.document["format"] == "config.v1"
        assert not rec.findings
        assert ("validated", "r1") in center.audit_log

    def test_duplicate_request_id(self, center):
        center.submit(request("r1", pair_design()))
        with pytest.raises(EmulatorError) as err:
            center.submit(request("r1", pair_design()))
        assert err.value.code == E_SCHEMA

    def test_backwards_window(self, center):
        with pytest.raises(EmulatorError) as err:
            center.submit(request("r1", pair_design(), start=5.0, end=5.0))
        assert err.value.code == E_SCHEMA

    def test_compile_errors_propagate(self, center):
        links = [link("H0", "H0.measure", "H0.measure") for _ in range(5)]
        with pytest.raises(EmulatorError) as err:
            center.submit(request("r1", design(links)))
        assert err.value.code == E_RESOURCE


class TestSchedule:
    def test_disjoint_hubs_same_time_both_accepted(self, center):
        center.submit(request("r1", pair_design()))
        center.submit(request("r2", design([link("H1", "H1-N0", "H1-N1")], [[0, 1]])))
        w1 = center.schedule("r1")
        w2 = center.schedule("r2")
        assert w1.window_id != w2.window_id
        assert not (w1.resources & w2.resources)

    def test_shared_source_overlap_conflicts(self, center):
        center.submit(request("r1", pair_design()))
        center.submit(request("r2", design([link("H0", "H0-N2", "H0-N3")], [[0, 1]])))
        w1 = center.schedule("r1")
        with pytest.raises(EmulatorError) as err:
            center.schedule("r2")
        assert err.value.code == E_CONFLICT
        assert w1.window_id in err.value.message
        blocked = err.value.findings
        assert blocked[0]["element"] == w1.window_id
        assert "H0:src0" in blocked[0]["message"]
        # Atomicity: the failed call left the calendar untouched.
        assert len(center.calendar()) == 1

    def test_same_resources_disjoint_times_accepted(self, center):
        center.submit(request("r1", pair_design(), start=0.0, end=10.0))
        center.submit(request("r2", pair_design(), start=10.0, end=20.0))
        center.schedule("r1")
        center.schedule("r2")
        assert len(center.calendar()) == 2

    def test_priority_order_then_fifo(self, center):
        center.submit(request("rA", pair_design(), priority=0))
        center.submit(request("rB", pair_design(), priority=5))
        center.submit(request("rC", pair_design(), priority=5))
        results = center.schedule_pending()
        assert isinstance(results["rB"], control.ScheduleWindow)
        assert isinstance(results["rC"], EmulatorError)
        assert isinstance(results["rA"], EmulatorError)
        assert [w.request_id for w in center.calendar()] == ["rB"]

    def test_schedule_twice_rejected(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        with pytest.raises(EmulatorError) as err:
            center.schedule("r1")
        assert err.value.code == E_SCHEMA

    def test_hundred_random_requests_match_brute_force(self, tmp_path):
        t = topology.build_network(4)
        center = ControlCenter(t, seed=7, data_dir=tmp_path)
        rng = np.random.default_rng(99)
        reqs = []
        i = 0
        while len(reqs) < 100:
            d = compiler.fuzz_design(t, rng, max_links=3)
            start = float(rng.integers(0, 50))
            end = start + float(rng.integers(5, 20))
            prio = int(rng.integers(0, 4))
            r = request(f"r{i:03d}", d, start, end, prio, subscriber=f"s{i % 5}")
            i += 1
            try:
                rec = center.submit(r)
            except EmulatorError:
                continue
            assert not rec.findings
            reqs.append(r)

        results = center.schedule_pending()
        accepted = {rid for rid, res in results.items() if isinstance(res, control.ScheduleWindow)}

        # Independent oracle: greedy in (priority desc, submission order),
        # conflicts via a literal quadratic scan.
        ordered = sorted(enumerate(reqs), key=lambda p: (-p[1].priority, p[0]))
        oracle_ids = set()
        taken = []
        for _, r in ordered:
            res = config_resources(center.get_request(r.request_id).config)
            clash = any(
                r.start_s < o_end and o_start < r.end_s and res & o_res
                for (o_start, o_end, o_res) in taken
            )
            if not clash:
                taken.append((r.start_s, r.end_s, res))
                oracle_ids.add(r.request_id)
        assert accepted == oracle_ids

        # Safety invariant: the final calendar is pairwise conflict-free.
        cal = center.calendar()
        for i, a in enumerate(cal):
            for b in cal[i + 1:]:
                overlap = a.start_s < b.end_s and b.start_s < a.end_s
                assert not (overlap and a.resources & b.resources)


class TestInstantiate:
    def test_counts_flow_within_one_interval(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        h = center.instantiate("r1")
        assert h.state == "Active"
        assert center.live_records(h.handle_id) == []
        center.advance(center.interval_s)
        live = center.live_records(h.handle_id)
        assert len(live) == 1
        assert sum(live[0].singles.values()) > 0

    def test_full_run_counts_and_rates(self, center):
        center.submit(request("r1", pair_design(rate=2e5)))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(1.0)
        assert h.state == "Completed"
        records = center.live_records(h.handle_id)
        assert len(records) == 10
        rec = center.get_request("r1")
        loss = rec.config.document["taps"][0]["loss_db"]
        expected = optics.expected_rates(
            optics.RateConfig(
                pair_rate_hz=2e5,
                mode="entangled",
                loss_a_db=loss,
                efficiency_a=0.9,
                dark_a_hz=100.0,
                loss_b_db=rec.config.document["taps"][1]["loss_db"],
                efficiency_b=0.9,
                dark_b_hz=100.0,
            )
        )
        total_a = sum(r.singles.get(0, 0) + r.singles.get(1, 0) for r in records)
        total_coinc = sum(r.coincidences.get((0, 1), 0) for r in records)
        assert abs(total_a - expected.singles_a_hz) < 4 * np.sqrt(expected.singles_a_hz)
        expected_cc = expected.coincidences_hz + expected.accidentals_hz
        assert abs(total_coinc - expected_cc) < 4 * np.sqrt(expected_cc)

    def test_cross_hub_coincidences_delay_compensated(self, center):
        # Arms of unequal fiber length only coincide after the counter
        # compensates the differential latency from the config's lengths.
        center.submit(request("r1", design([link("H0", "H0-N0", "H1-N0", rate=5e5)], [[0, 1]])))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(1.1)
        doc = center.get_request("r1").config.document
        assert doc["taps"][0]["length_m"] != doc["taps"][1]["length_m"]
        expected = optics.expected_rates(
            optics.RateConfig(
                pair_rate_hz=5e5,
                mode="entangled",
                loss_a_db=doc["taps"][0]["loss_db"],
                efficiency_a=0.9,
                dark_a_hz=100.0,
                loss_b_db=doc["taps"][1]["loss_db"],
                efficiency_b=0.9,
                dark_b_hz=100.0,
            )
        )
        total = sum(r.coincidences.get((0, 1), 0) for r in h.records)
        want = expected.coincidences_hz + expected.accidentals_hz
        assert abs(total - want) < 4 * np.sqrt(want)

    def test_unscheduled_rejected(self, center):
        center.submit(request("r1", pair_design()))
        with pytest.raises(EmulatorError) as err:
            center.instantiate("r1")
        assert err.value.code == E_SCHEMA

    def test_window_not_open_rejected(self, center):
        center.submit(request("r1", pair_design(), start=5.0, end=6.0))
        center.schedule("r1")
        with pytest.raises(EmulatorError) as err:
            center.instantiate("r1")
        assert err.value.code == E_CONFLICT

    def test_device_failure_rolls_back_bit_exact(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        # Smuggle an out-of-range port past validation by editing the
        # stored document after the validity check ran.
        doc = center.get_request("r1").config.document
        doc["switch_settings"]["H0.ring60"][99] = 3
        before = {
            sid: dict(sw.mapping) for sid, sw in center.topology.switches().items()
        }
        h = center.instantiate("r1")
        assert h.state == "Failed"
        assert E_DEVICE in h.failure
        after = {sid: dict(sw.mapping) for sid, sw in center.topology.switches().items()}
        assert after == before
        assert h.records == []

    def test_port_in_use_fails_without_touching_first_run(self, center):
        center.submit(request("r1", pair_design(), start=0.0, end=2.0))
        center.schedule("r1")
        h1 = center.instantiate("r1")
        center.submit(request("r2", design([link("H1", "H1-N0", "H1-N1")]), end=2.0))
        center.schedule("r2")
        doc2 = center.get_request("r2").config.document
        ring0 = center.get_request("r1").config.document["switch_settings"]["H0.ring60"]
        row = next(iter(ring0))
        doc2["switch_settings"].setdefault("H0.ring60", {})[row] = ring0[row]
        snapshot = dict(center.topology.switch("H0.ring60").mapping)
        h2 = center.instantiate("r2")
        assert h2.state == "Failed"
        assert center.topology.switch("H0.ring60").mapping == snapshot
        assert h1.state == "Active"

    def test_settings_released_on_completion(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        center.instantiate("r1")
        assert center.topology.switch("H0.internal20").mapping
        center.advance(1.5)
        for sw in center.topology.switches().values():
            assert sw.mapping == {}

    def test_reinstantiate_completed_rejected(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(2.0)
        assert h.state == "Completed"
        with pytest.raises(EmulatorError) as err:
            center.instantiate("r1")
        assert err.value.code == E_SCHEMA
        assert "Completed" in err.value.message

    def test_seed_reproducibility(self, tmp_path):
        t = topology.build_network(3)
        runs = []
        for attempt in range(2):
            c = ControlCenter(t, seed=11, data_dir=tmp_path / str(attempt))
            c.submit(request("r1", pair_design(rate=3e5)))
            c.schedule("r1")
            h = c.instantiate("r1")
            c.advance(1.0)
            runs.append(control.counts_csv(c.live_records(h.handle_id)))
            c.advance(10.0)
        assert runs[0] == runs[1]


class TestMonitor:
    def test_unknown_handle(self, center):
        with pytest.raises(EmulatorError) as err:
            center.monitor("i-9999")
        assert err.value.code == E_UNKNOWN_HANDLE

    def test_active_snapshot(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(0.35)
        snap = center.monitor(h.handle_id)
        assert snap["state"] == "Active"
        assert snap["records_visible"] == 3
        assert snap["latest_record"].interval_start_ps == 200_000_000_000
        assert all(v == "ok" for v in snap["device_health"].values())

    def test_completed_snapshot_has_final_counts(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(1.5)
        snap = center.monitor(h.handle_id)
        assert snap["state"] == "Completed"
        assert snap["records_visible"] == 10
        assert snap["latest_record"] is not None

    def test_monitor_is_read_only(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(0.2)
        a = center.monitor(h.handle_id)
        b = center.monitor(h.handle_id)
        assert a["records_visible"] == b["records_visible"]
        assert a["latest_record"] == b["latest_record"]


class TestApcLoop:
    def test_apc_series_recorded_and_converged(self, center):
        d = design([link("H0", "H0-N0", "H1-N0", apc_b=True)], [[0, 1]])
        center.submit(request("r1", d, end=0.5))
        center.schedule("r1")
        h = center.instantiate("r1")
        center.advance(0.5)
        series = h.apc_series
        assert len(series) == 5
        assert {e["channel"] for e in series} == {0}
        assert all(np.isfinite(e["error"]) for e in series)
        assert sum(e["converged"] for e in series) >= 4
        snap = center.monitor(h.handle_id)
        assert snap["apc_signals"] and snap["apc_signals"][0]["hub"] == "H0"


class TestArchive:
    def run_one(self, center, rid="r1", end=0.5, d=None):
        center.submit(request(rid, d or pair_design(rate=3e5), end=end))
        center.schedule(rid)
        h = center.instantiate(rid)
        center.advance(end + 0.1)
        return h

    def test_archive_contents_and_hashes(self, center):
        h = self.run_one(center)
        record = center.archive(h.handle_id)
        with zipfile.ZipFile(record.path) as zf:
            names = set(zf.namelist())
            assert names == {"manifest.json", "tags.bin", "counts.csv", "environment.csv"}
            manifest = json.loads(zf.read("manifest.json"))
            for member, digest in manifest["hashes"].items():
                assert hashlib.sha256(zf.read(member)).hexdigest() == digest
            tag_blob = zf.read("tags.bin")
            assert len(tag_blob) % tags.RECORD_BYTES == 0
            decoded = tags.decode_tags(tag_blob)
            assert len(decoded) == len(h.tag_data)
            counts = zf.read("counts.csv").decode().splitlines()
            assert counts[0] == "interval_start_ps,interval_len_ps,kind,key,count"
            assert len(counts) > len(h.records)
            assert manifest["config"]["request_id"] == "r1"

    def test_archive_idempotent(self, center):
        h = self.run_one(center)
        a = center.archive(h.handle_id)
        b = center.archive(h.handle_id)
        assert a == b
        assert len(center.ledger.entries()) == 1

    def test_not_finished(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        h = center.instantiate("r1")
        with pytest.raises(EmulatorError) as err:
            center.archive(h.handle_id)
        assert err.value.code == E_NOT_FINISHED

    def test_retention_expiry(self, center):
        h = self.run_one(center)
        center.archive(h.handle_id)
        assert center.retrieve_archive(h.handle_id).instantiation_id == h.handle_id
        center.advance(31 * 86_400.0)
        with pytest.raises(EmulatorError) as err:
            center.retrieve_archive(h.handle_id)
        assert err.value.code == E_EXPIRED

    def test_unknown_archive(self, center):
        with pytest.raises(EmulatorError) as err:
            center.retrieve_archive("i-0000")
        assert err.value.code == E_UNKNOWN_HANDLE

    def test_failed_run_can_be_archived(self, center):
        center.submit(request("r1", pair_design()))
        center.schedule("r1")
        doc = center.get_request("r1").config.document
        doc["switch_settings"]["H0.ring60"][99] = 3
        h = center.instantiate("r1")
        assert h.state == "Failed"
        record = center.archive(h.handle_id)
        with zipfile.ZipFile(record.path) as zf:
            manifest = json.loads(zf.read("manifest.json"))
        assert manifest["state"] == "Failed"


class TestLedger:
    def test_conservation(self, center):
        durations = {"r1": 0.4, "r2": 0.7}
        for rid, dur in durations.items():
            hub = "H0" if rid == "r1" else "H1"
            d = design([link(hub, f"{hub}-N0", f"{hub}-N1", rate=2e5)], [[0, 1]])
            center.submit(request(rid, d, start=center.now_s, end=center.now_s + dur))
            center.schedule(rid)
            h = center.instantiate(rid)
            center.advance(dur + 0.05)
            center.archive(h.handle_id)
        entries = center.ledger.entries()
        assert len(entries) == 2
        expected_total = sum(e.duration_s / 3600.0 * e.weight for e in entries)
        assert center.ledger.total() == pytest.approx(expected_total, rel=1e-12)
        for e in entries:
            rec = center.get_request("r1" if e.instantiation_id == "i-0000" else "r2")
            assert e.weight == compiler.device_count(rec.config)

    def test_flat_mode_weight_is_one(self, tmp_path):
        t = topology.build_network(3)
        c = ControlCenter(t, seed=1, data_dir=tmp_path, fee_mode="flat")
        c.submit(request("r1", pair_design(rate=2e5), end=0.3))
        c.schedule("r1")
        h = c.instantiate("r1")
        c.advance(0.5)
        c.archive(h.handle_id)
        entry = c.ledger.entries("alice")[0]
        assert entry.weight == 1.0
        assert entry.fee_units == pytest.approx(entry.duration_s / 3600.0)

    def test_subscriber_filter(self, center):
        assert center.ledger.entries("nobody") == []


class TestAudit:
    def test_lifecycle_clean(self, center):
        center.submit(request("r1", pair_design(), end=0.2))
        center.schedule("r1")
        center.instantiate("r1")
        center.advance(0.3)
        assert not center.audit_lifecycle()

    def test_forged_activation_flagged(self, center):
        center.audit_log.append(("activated", "i-bogus", "r-bogus"))
        findings = center.audit_lifecycle()
        assert len(findings) == 1
        assert findings[0].element == "i-bogus"
