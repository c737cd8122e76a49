"""Control center service plane.

One ControlCenter owns a topology and runs the full request lifecycle:
submit (compile + validate), schedule onto a resource calendar,
instantiate on the device models, monitor while active, archive when
finished, and meter usage. Time is a virtual clock advanced by the
caller, so a full day of operations runs in milliseconds and every run
is reproducible from its seed.

Concurrency: every mutation passes through one re-entrant lock (the
serialized state-transition queue); monitor and ledger reads copy
snapshots and never block data collection.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import tempfile
import threading
import zipfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import apc, compiler, optics, tags, topology as topo
from .errors import (
    E_CONFLICT,
    E_DEVICE,
    E_EXPIRED,
    E_NOT_FINISHED,
    E_SCHEMA,
    E_UNKNOWN_HANDLE,
    EmulatorError,
    FindingList,
)
from .timing import CountRecord, accumulate_counts

PENDING = "Pending"
ACTIVE = "Active"
COMPLETED = "Completed"
FAILED = "Failed"

DEFAULT_RETENTION_DAYS = 30.0
DEFAULT_INTERVAL_S = 0.1
APC_DRIFT_RATE = 0.02  # radians per sqrt(second)
APC_PROBE_PAIRS = 2000

DEFAULT_DETECTOR = optics.DetectorModel(
    efficiency=0.9, dark_rate_hz=100.0, jitter_ps=30.0, dead_ps=25_000, channel_count=2
)


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass
class RequestRecord:
    """A submitted request with its compiled config and validation result."""

    request: compiler.NetworkConfigRequest
    config: compiler.CompiledConfig
    findings: FindingList
    seq: int
    window_id: Optional[str] = None
    handle_id: Optional[str] = None


@dataclass(frozen=True)
class ScheduleWindow:
    """An accepted reservation: a config pinned to a time span and resources."""

    window_id: str
    request_id: str
    subscriber_id: str
    start_s: float
    end_s: float
    priority: int
    resources: frozenset


@dataclass
class InstantiationHandle:
    """A config running (or finished) on the emulated hardware."""

    handle_id: str
    request_id: str
    subscriber_id: str
    state: str = PENDING
    start_s: float = 0.0
    end_s: float = 0.0
    failure: str = ""
    records: list = field(default_factory=list)
    tag_data: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=tags.TAG_DTYPE))
    apc_series: list = field(default_factory=list)
    environment: list = field(default_factory=list)
    pushed_rows: dict = field(default_factory=dict)  # switch id -> [rows we added]

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class ArchiveRecord:
    """Immutable pointer to one instantiation's stored data file."""

    instantiation_id: str
    subscriber_id: str
    path: str
    created_s: float
    retention_deadline_s: float
    manifest_sha256: str


@dataclass(frozen=True)
class LedgerEntry:
    subscriber_id: str
    instantiation_id: str
    duration_s: float
    weight: float
    fee_units: float
    mode: str


class UsageLedger:
    """Append-only usage metering.

    Fee units are duration (hours) times a resource weight: the billable
    device count in per-use mode, 1 per window in flat mode.
    """

    def __init__(self) -> None:
        self._entries: list[LedgerEntry] = []

    def append(self, entry: LedgerEntry) -> None:
        self._entries.append(entry)

    def entries(self, subscriber_id: Optional[str] = None) -> list[LedgerEntry]:
        return [e for e in self._entries if subscriber_id in (None, e.subscriber_id)]

    def total(self, subscriber_id: Optional[str] = None) -> float:
        return float(sum(e.fee_units for e in self.entries(subscriber_id)))


def fee_units(duration_s: float, weight: float) -> float:
    return duration_s / 3600.0 * weight


# ---------------------------------------------------------------------------
# Conflict detection
# ---------------------------------------------------------------------------


def find_conflicts(
    start_s: float, end_s: float, resources: frozenset, calendar: list[ScheduleWindow]
) -> list[tuple[ScheduleWindow, frozenset]]:
    """Accepted windows that overlap [start, end) and share a resource."""
    out = []
    for w in calendar:
        if start_s < w.end_s and w.start_s < end_s:
            shared = resources & w.resources
            if shared:
                out.append((w, shared))
    return out


# ---------------------------------------------------------------------------
# Control center
# ---------------------------------------------------------------------------


class ControlCenter:
    def __init__(
        self,
        t: topo.NetworkTopology,
        *,
        seed: int = 0,
        interval_s: float = DEFAULT_INTERVAL_S,
        retention_days: float = DEFAULT_RETENTION_DAYS,
        data_dir: Optional[str] = None,
        fee_mode: str = "per_use",
        detector: optics.DetectorModel = DEFAULT_DETECTOR,
    ):
        if fee_mode not in ("per_use", "flat"):
            raise ValueError("fee_mode must be 'per_use' or 'flat'")
        self.topology = t
        self.seed = seed
        self.interval_s = interval_s
        self.retention_s = retention_days * 86_400.0
        self.data_dir = Path(data_dir) if data_dir else Path(tempfile.mkdtemp(prefix="qnetem-"))
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.fee_mode = fee_mode
        self.detector = detector
        self.ledger = UsageLedger()
        self.now_s = 0.0
        self.audit_log: list[tuple] = []
        self._lock = threading.RLock()
        self._requests: dict[str, RequestRecord] = {}
        self._calendar: list[ScheduleWindow] = []
        self._windows: dict[str, ScheduleWindow] = {}
        self._handles: dict[str, InstantiationHandle] = {}
        self._archives: dict[str, ArchiveRecord] = {}
        self._seq = 0

    # -- submission ---------------------------------------------------------

    def submit(self, req: compiler.NetworkConfigRequest) -> RequestRecord:
        """Compile and validate a request; raises on schema/routing faults."""
        with self._lock:
            if req.request_id in self._requests:
                raise EmulatorError(E_SCHEMA, f"request_id {req.request_id!r} already exists")
            if not req.end_s > req.start_s:
                raise EmulatorError(E_SCHEMA, "requested window must end after it starts")
            config = compiler.compile_request(req, self.topology)
            findings = compiler.validate_config(config, self.topology, self._calendar)
            record = RequestRecord(req, config, findings, seq=self._seq)
            self._seq += 1
            self._requests[req.request_id] = record
            self.audit_log.append(("submitted", req.request_id))
            if not findings:
                self.audit_log.append(("validated", req.request_id))
            return record

    def get_request(self, request_id: str) -> RequestRecord:
        rec = self._requests.get(request_id)
        if rec is None:
            raise EmulatorError(E_UNKNOWN_HANDLE, f"unknown request {request_id!r}")
        return rec

    # -- scheduling ---------------------------------------------------------

    def schedule(self, request_id: str) -> ScheduleWindow:
        """Reserve the request's window; atomic, conflict-checked.

        Raises E_CONFLICT carrying the blocking windows and the shared
        resources (``exc.findings``), or E_SCHEMA if validation found
        problems or the request is already scheduled.
        """
        with self._lock:
            rec = self.get_request(request_id)
            if rec.window_id is not None:
                raise EmulatorError(E_SCHEMA, f"request {request_id!r} already scheduled")
            if rec.findings:
                err = EmulatorError(E_SCHEMA, "config has validation findings")
                err.findings = list(rec.findings)
                raise err
            req = rec.request
            resources = compiler.config_resources(rec.config)
            blockers = find_conflicts(req.start_s, req.end_s, resources, self._calendar)
            if blockers:
                names = ", ".join(w.window_id for w, _ in blockers)
                err = EmulatorError(E_CONFLICT, f"window blocked by {names}")
                err.findings = [
                    {
                        "code": E_CONFLICT,
                        "message": f"shares {sorted(shared)} with {w.window_id}",
                        "element": w.window_id,
                    }
                    for w, shared in blockers
                ]
                raise err
            window = ScheduleWindow(
                window_id=f"w-{len(self._windows):04d}",
                request_id=request_id,
                subscriber_id=req.subscriber_id,
                start_s=req.start_s,
                end_s=req.end_s,
                priority=req.priority,
                resources=resources,
            )
            self._calendar.append(window)
            self._windows[window.window_id] = window
            rec.window_id = window.window_id
            self.audit_log.append(("scheduled", request_id, window.window_id))
            return window

    def schedule_pending(self) -> dict[str, object]:
        """Drain unscheduled requests in priority order, FIFO within a priority.

        Returns request_id -> ScheduleWindow for accepted requests and
        request_id -> EmulatorError for rejected ones. Policy note: the
        ordering (higher priority first, then submission order) is a
        control-center policy choice.
        """
        with self._lock:
            pending = [
                rec
                for rec in self._requests.values()
                if rec.window_id is None and not rec.findings
            ]
            pending.sort(key=lambda rec: (-rec.request.priority, rec.seq))
            out: dict[str, object] = {}
            for rec in pending:
                rid = rec.request.request_id
                try:
                    out[rid] = self.schedule(rid)
                except EmulatorError as exc:
                    out[rid] = exc
            return out

    def calendar(self) -> list[ScheduleWindow]:
        with self._lock:
            return list(self._calendar)

    # -- instantiation ------------------------------------------------------

    def instantiate(self, request_id: str) -> InstantiationHandle:
        """Push the config onto the devices and run its window.

        Precondition violations raise; a device rejecting a setting rolls
        every pushed setting back and returns the handle in Failed state.
        """
        with self._lock:
            rec = self.get_request(request_id)
            if rec.window_id is None:
                raise EmulatorError(E_SCHEMA, f"request {request_id!r} is not scheduled")
            if rec.handle_id is not None:
                state = self._handles[rec.handle_id].state
                raise EmulatorError(
                    E_SCHEMA, f"request {request_id!r} already instantiated ({state})"
                )
            window = self._windows[rec.window_id]
            if self.now_s < window.start_s or self.now_s >= window.end_s:
                raise EmulatorError(
                    E_CONFLICT,
                    f"window {window.window_id} is not open at t={self.now_s:.3f}s",
                )
            handle = InstantiationHandle(
                handle_id=f"i-{len(self._handles):04d}",
                request_id=request_id,
                subscriber_id=rec.request.subscriber_id,
                start_s=self.now_s,
                end_s=window.end_s,
            )
            self._handles[handle.handle_id] = handle
            rec.handle_id = handle.handle_id
            try:
                self._push_settings(handle, rec.config.document)
            except EmulatorError as exc:
                self._rollback(handle)
                handle.state = FAILED
                handle.failure = f"{exc.code}: {exc.message}"
                handle.end_s = self.now_s
                self.audit_log.append(("failed", handle.handle_id, exc.code))
                return handle
            self._simulate(handle, rec)
            handle.state = ACTIVE
            self.audit_log.append(("activated", handle.handle_id, request_id))
            return handle

    def _push_settings(self, handle: InstantiationHandle, doc: dict) -> None:
        switches = self.topology.switches()
        for sid, mapping in sorted(compiler.normalized_settings(doc).items()):
            sw = switches.get(sid)
            if sw is None:
                raise EmulatorError(E_DEVICE, f"no such device {sid!r}")
            busy_rows = set(mapping) & set(sw.mapping)
            busy_cols = set(mapping.values()) & set(sw.mapping.values())
            if busy_rows or busy_cols:
                raise EmulatorError(E_DEVICE, f"{sid}: port already in use")
            try:
                topo.set_crossbar(sw, {**sw.mapping, **mapping}.items())
            except EmulatorError as exc:
                raise EmulatorError(E_DEVICE, f"{sid} rejected setting: {exc.message}")
            handle.pushed_rows[sid] = list(mapping)

    def _rollback(self, handle: InstantiationHandle) -> None:
        switches = self.topology.switches()
        for sid, rows in handle.pushed_rows.items():
            sw = switches[sid]
            for row in rows:
                sw.mapping.pop(row, None)
        handle.pushed_rows.clear()

    # -- simulation ---------------------------------------------------------

    def _simulate(self, handle: InstantiationHandle, rec: RequestRecord) -> None:
        """Generate the whole window's photon record up front.

        Data becomes visible through monitor/live_records as the virtual
        clock passes each accumulation interval, so callers observe a
        live feed while the physics stays a single reproducible batch.
        """
        doc = rec.config.document
        duration_s = handle.end_s - handle.start_s
        rng = np.random.default_rng([self.seed, rec.seq, 0])
        det = replace(self.detector, channel_count=2)
        window_ps = int(doc.get("window_ps", 1000))
        interval_ps = int(round(self.interval_s * optics.PS_PER_SECOND))
        duration_ps = int(round(duration_s * optics.PS_PER_SECOND))

        taps_by_link: dict[int, list[tuple[int, dict]]] = {}
        for i, tap in enumerate(doc.get("taps", [])):
            taps_by_link.setdefault(tap["link"], []).append((i, tap))

        all_tags = []
        streams: dict = {}
        for li, source in enumerate(doc.get("sources", [])):
            (ia, tap_a), (ib, tap_b) = sorted(taps_by_link[li], key=lambda x: x[1]["arm"])
            src = optics.BiphotonSource(
                source_id=f"{source['hub']}.src{source['index']}",
                pair_rate_hz=source["pair_rate_hz"],
            )
            st = optics.prepare(optics.generate_pairs(src, duration_s, rng), source["mode"], rng)
            st = optics.propagate(st, compiler.resolve_tap(doc, self.topology, ia), "a", rng)
            st = optics.propagate(st, compiler.resolve_tap(doc, self.topology, ib), "b", rng)
            mr = optics.measure(
                st,
                math.radians(tap_a["basis_deg"]),
                math.radians(tap_b["basis_deg"]),
                rng,
            )
            for arm, ti, bits in (("a", ia, mr.bits_a), ("b", ib, mr.bits_b)):
                arrivals = optics.arm_arrivals(st, arm, bits=bits, channel_pair=(0, 1), node=ti)
                clicks = optics.detect(arrivals, det, duration_s, rng, node=ti)
                clicks["channel"] = clicks["channel"] + np.uint8(2 * ti)
                all_tags.append(clicks)
                lo, hi = 2 * ti, 2 * ti + 1
                streams[lo] = clicks["time_ps"][clicks["channel"] == lo].astype(np.int64)
                streams[hi] = clicks["time_ps"][clicks["channel"] == hi].astype(np.int64)
                streams[("tap", ti)] = clicks["time_ps"].astype(np.int64)

        # Delay-compensate each pair from the known fiber lengths, as a
        # calibrated coincidence unit would; without this, any length
        # mismatch beyond the window would hide true coincidences.
        pair_keys = []
        offsets: dict = {}
        tap_list = doc.get("taps", [])
        for a, b in doc.get("pairs", []):
            key = (("tap", int(a)), ("tap", int(b)))
            pair_keys.append(key)
            delta_m = tap_list[int(a)]["length_m"] - tap_list[int(b)]["length_m"]
            offsets[key] = int(round(delta_m * optics.PS_PER_M))
        raw_records = accumulate_counts(
            streams,
            interval_ps,
            pairs=pair_keys,
            window_ps=window_ps,
            start_ps=0,
            end_ps=duration_ps,
            offsets_ps=offsets,
        )
        handle.records = [
            CountRecord(
                r.interval_start_ps,
                r.interval_len_ps,
                {ch: n for ch, n in r.singles.items() if isinstance(ch, int)},
                {(a[1], b[1]): n for (a, b), n in r.coincidences.items()},
            )
            for r in raw_records
        ]
        handle.tag_data = tags.sort_tags(
            np.concatenate(all_tags) if all_tags else np.empty(0, dtype=tags.TAG_DTYPE)
        )
        self._run_apc_loops(handle, doc, duration_s)
        self._log_environment(handle, rec, duration_s)

    def _run_apc_loops(self, handle: InstantiationHandle, doc: dict, duration_s: float) -> None:
        claims = [tap["apc"] for tap in doc.get("taps", []) if tap.get("apc")]
        if not claims:
            return
        rng = np.random.default_rng([self.seed, hash_seed(handle.handle_id), 1])
        n_steps = int(math.ceil(duration_s / self.interval_s))
        for claim in claims:
            rotation = np.eye(2, dtype=complex)
            angles = None
            for k in range(n_steps):
                rotation = apc.apply_drift(rotation, APC_DRIFT_RATE, self.interval_s, rng)
                probe = apc.sampled_probe(rotation, APC_PROBE_PAIRS, rng)
                result = apc.stabilize(
                    probe, initial_angles=angles, target=0.02, max_evals=150, step=0.1
                )
                angles = result.angles
                handle.apc_series.append(
                    {
                        "t_s": round((k + 1) * self.interval_s, 9),
                        "hub": claim["hub"],
                        "channel": int(claim["channel"]),
                        "error": round(float(result.error), 6),
                        "evaluations": int(result.evaluations),
                        "converged": bool(result.converged),
                    }
                )

    def _log_environment(self, handle: InstantiationHandle, rec: RequestRecord, duration_s) -> None:
        rng = np.random.default_rng([self.seed, rec.seq, 2])
        hubs = sorted({s["hub"] for s in rec.config.document.get("sources", [])})
        n_steps = int(math.ceil(duration_s / self.interval_s))
        for k in range(n_steps):
            t_s = round((k + 1) * self.interval_s, 9)
            for hub in hubs:
                temp = 296.0 + 0.05 * math.sin(2 * math.pi * t_s / 600.0)
                temp += float(rng.normal(0.0, 0.002))
                handle.environment.append(
                    {"t_s": t_s, "element": hub, "metric": "temperature_k", "value": round(temp, 6)}
                )

    # -- clock --------------------------------------------------------------

    def advance(self, dt_s: float) -> None:
        """Move the virtual clock; finish any run whose window ends."""
        if dt_s < 0:
            raise ValueError("the clock only runs forward")
        with self._lock:
            self.now_s += dt_s
            for handle in self._handles.values():
                if handle.state == ACTIVE and self.now_s >= handle.end_s:
                    self._rollback(handle)  # release the patched switch ports
                    handle.state = COMPLETED
                    self.audit_log.append(("completed", handle.handle_id))

    # -- monitoring ---------------------------------------------------------

    def get_handle(self, handle_id: str) -> InstantiationHandle:
        handle = self._handles.get(handle_id)
        if handle is None:
            raise EmulatorError(E_UNKNOWN_HANDLE, f"unknown instantiation {handle_id!r}")
        return handle

    def live_records(self, handle_id: str) -> list[CountRecord]:
        """Count records whose interval has fully elapsed."""
        handle = self.get_handle(handle_id)
        if handle.state in (COMPLETED, FAILED):
            return list(handle.records)
        elapsed_ps = (self.now_s - handle.start_s) * optics.PS_PER_SECOND
        return [
            r
            for r in handle.records
            if r.interval_start_ps + r.interval_len_ps <= elapsed_ps
        ]

    def monitor(self, handle_id: str) -> dict:
        """Read-only status snapshot; safe to call at any rate."""
        handle = self.get_handle(handle_id)
        visible = self.live_records(handle_id)
        latest = visible[-1] if visible else None
        rec = self._requests[handle.request_id]
        health = {sid: "ok" for sid in rec.config.document.get("switch_settings", {})}
        for src in rec.config.document.get("sources", []):
            health[f"{src['hub']}.src{src['index']}"] = "ok"
        apc_latest: dict = {}
        for entry in handle.apc_series:
            if entry["t_s"] <= self.now_s - handle.start_s:
                apc_latest[(entry["hub"], entry["channel"])] = entry
        return {
            "handle_id": handle.handle_id,
            "state": handle.state,
            "now_s": self.now_s,
            "start_s": handle.start_s,
            "end_s": handle.end_s,
            "failure": handle.failure,
            "device_health": health,
            "latest_record": latest,
            "records_visible": len(visible),
            "apc_signals": list(apc_latest.values()),
        }

    # -- archive ------------------------------------------------------------

    def archive(self, handle_id: str) -> ArchiveRecord:
        """Write the run's data file; idempotent per handle."""
        with self._lock:
            handle = self.get_handle(handle_id)
            if handle_id in self._archives:
                return self._archives[handle_id]
            if handle.state not in (COMPLETED, FAILED):
                raise EmulatorError(E_NOT_FINISHED, f"{handle_id} is {handle.state}")
            rec = self._requests[handle.request_id]
            record = self._write_archive(handle, rec)
            self._archives[handle_id] = record
            weight = float(compiler.device_count(rec.config)) if self.fee_mode == "per_use" else 1.0
            self.ledger.append(
                LedgerEntry(
                    subscriber_id=handle.subscriber_id,
                    instantiation_id=handle_id,
                    duration_s=handle.duration_s,
                    weight=weight,
                    fee_units=fee_units(handle.duration_s, weight),
                    mode=self.fee_mode,
                )
            )
            self.audit_log.append(("archived", handle_id))
            return record

    def _write_archive(self, handle: InstantiationHandle, rec: RequestRecord) -> ArchiveRecord:
        tag_bytes = tags.encode_tags(handle.tag_data)
        counts_bytes = counts_csv(handle.records).encode()
        env_bytes = environment_csv(handle).encode()
        manifest = {
            "format": "archive.v1",
            "instantiation_id": handle.handle_id,
            "request_id": handle.request_id,
            "subscriber_id": handle.subscriber_id,
            "state": handle.state,
            "failure": handle.failure,
            "created_s": self.now_s,
            "retention_deadline_s": self.now_s + self.retention_s,
            "window": {"start_s": handle.start_s, "end_s": handle.end_s},
            "config": rec.config.document,
            "hashes": {
                "tags.bin": hashlib.sha256(tag_bytes).hexdigest(),
                "counts.csv": hashlib.sha256(counts_bytes).hexdigest(),
                "environment.csv": hashlib.sha256(env_bytes).hexdigest(),
            },
        }
        manifest_bytes = json.dumps(manifest, indent=2, sort_keys=True).encode()
        path = self.data_dir / f"{handle.handle_id}.zip"
        with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
            zf.writestr("manifest.json", manifest_bytes)
            zf.writestr("tags.bin", tag_bytes)
            zf.writestr("counts.csv", counts_bytes)
            zf.writestr("environment.csv", env_bytes)
        return ArchiveRecord(
            instantiation_id=handle.handle_id,
            subscriber_id=handle.subscriber_id,
            path=str(path),
            created_s=self.now_s,
            retention_deadline_s=self.now_s + self.retention_s,
            manifest_sha256=hashlib.sha256(manifest_bytes).hexdigest(),
        )

    def retrieve_archive(self, handle_id: str) -> ArchiveRecord:
        """Fetch the archive record; expires after the retention window."""
        record = self._archives.get(handle_id)
        if record is None:
            raise EmulatorError(E_UNKNOWN_HANDLE, f"no archive for {handle_id!r}")
        if self.now_s > record.retention_deadline_s:
            raise EmulatorError(E_EXPIRED, f"archive {handle_id} past retention deadline")
        return record

    # -- audit --------------------------------------------------------------

    def audit_lifecycle(self) -> FindingList:
        """No handle may reach Active without a prior passed validation."""
        out = FindingList()
        validated: set[str] = set()
        for event in self.audit_log:
            if event[0] == "validated":
                validated.add(event[1])
            elif event[0] == "activated":
                _, handle_id, request_id = event
                if request_id not in validated:
                    out.add(
                        E_SCHEMA,
                        f"{handle_id} activated without validated request {request_id}",
                        handle_id,
                    )
        return out


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------


def hash_seed(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:4], "big")


def counts_csv(records: list[CountRecord]) -> str:
    """Long-format CSV of a count series; stable row order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["interval_start_ps", "interval_len_ps", "kind", "key", "count"])
    for r in records:
        for ch in sorted(r.singles):
            w.writerow([r.interval_start_ps, r.interval_len_ps, "singles", ch, r.singles[ch]])
        for a, b in sorted(r.coincidences):
            w.writerow(
                [r.interval_start_ps, r.interval_len_ps, "coincidences", f"{a}-{b}",
                 r.coincidences[(a, b)]]
            )
    return buf.getvalue()


def environment_csv(handle: InstantiationHandle) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t_s", "element", "metric", "value"])
    for row in handle.environment:
        w.writerow([row["t_s"], row["element"], row["metric"], row["value"]])
    for row in handle.apc_series:
        w.writerow([row["t_s"], f"{row['hub']}.apc{row['channel']}", "apc_error", row["error"]])
    return buf.getvalue()


def record_as_dict(r: CountRecord) -> dict:
    """JSON-safe view of one count record (string keys)."""
    return {
        "interval_start_ps": int(r.interval_start_ps),
        "interval_len_ps": int(r.interval_len_ps),
        "singles": {str(ch): int(n) for ch, n in sorted(r.singles.items())},
        "coincidences": {f"{a}-{b}": int(n) for (a, b), n in sorted(r.coincidences.items())},
    }
