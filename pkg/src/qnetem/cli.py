"""Operator command line: run scenario files, serve the API, report archives.

Exit codes: 0 success, 1 missing input file, 2 validation findings,
3 runtime failure. Findings and errors go to standard error as
``CODE<TAB>message`` lines; tables and progress go to standard output.

A scenario file is a ``design.v1`` document plus run parameters:

    {
      "format": "scenario.v1",
      "topology": {"hubs": 3},          # or an inline topology.v1 doc
      "design": { ... design.v1 ... },
      "duration_s": 1.0,
      "seed": 7,
      "detector": {"efficiency": 0.9},  # optional overrides
      "switch_settings": {},            # optional raw setting overrides
      "qkd": {"link": 0, "n_target": 5000, "sample_fraction": 0.1}
    }
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import socket
import sys
import zipfile
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import uvicorn

from . import compiler, control, optics, qkd, topology as topo
from .control import ControlCenter
from .errors import E_BIND, E_CORRUPT, E_MISSING, E_SCHEMA, EmulatorError
from .service import ClockPump, create_app

EXIT_MISSING = 1
EXIT_FINDINGS = 2
EXIT_RUNTIME = 3


def _fail(code: str, message: str, exit_code: int):
    click.echo(f"{code}\t{message}", err=True)
    sys.exit(exit_code)


def _emit_findings(findings):
    for f in findings:
        click.echo(f"{f.code}\t{f.message}", err=True)


def _load_scenario(path: Path) -> dict:
    if not path.is_file():
        _fail(E_MISSING, f"scenario file {path} does not exist", EXIT_MISSING)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        _fail(E_SCHEMA, f"scenario is not valid JSON: {exc}", EXIT_FINDINGS)
    if not isinstance(doc, dict) or doc.get("format") != "scenario.v1":
        _fail(E_SCHEMA, f"expected a scenario.v1 document, got {type(doc).__name__}", EXIT_FINDINGS)
    if not isinstance(doc.get("design"), dict):
        _fail(E_SCHEMA, "scenario is missing its design document", EXIT_FINDINGS)
    return doc


def _scenario_topology(doc: dict) -> topo.NetworkTopology:
    params = doc.get("topology") or {}
    if params.get("schema") == "topology.v1":
        return topo.topology_from_dict(params)
    return topo.build_network(
        int(params.get("hubs", 3)),
        spoke_km=float(params.get("spoke_km", topo.DEFAULT_SPOKE_KM)),
        ring_km=float(params.get("ring_km", topo.DEFAULT_RING_KM)),
        loss_db_per_km=float(params.get("loss_db_per_km", topo.DEFAULT_LOSS_DB_PER_KM)),
    )


def _scenario_detector(doc: dict) -> optics.DetectorModel:
    return replace(control.DEFAULT_DETECTOR, **doc.get("detector", {}))


@click.group()
def main():
    """Photonic network emulator."""


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


@main.command("run")
@click.argument("scenario", type=click.Path(path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option(
    "--out",
    "out_dir",
    type=click.Path(path_type=Path, file_okay=False),
    default=Path("out"),
    help="Directory for counts.csv, reports, and archives.",
)
def cmd_run(scenario: Path, seed, out_dir: Path):
    """Drive one scenario end to end: compile, schedule, run, archive."""
    doc = _load_scenario(scenario)
    if seed is None:
        seed = int(doc.get("seed", 0))
    t = _scenario_topology(doc)
    detector = _scenario_detector(doc)
    duration_s = float(doc.get("duration_s", 1.0))
    out_dir.mkdir(parents=True, exist_ok=True)
    center = ControlCenter(
        t, seed=seed, data_dir=out_dir / "archives", detector=detector
    )
    req = compiler.NetworkConfigRequest(
        request_id=str(doc.get("request_id", "scenario")),
        subscriber_id=str(doc.get("subscriber_id", "cli")),
        design=doc["design"],
        start_s=0.0,
        end_s=duration_s,
    )
    try:
        rec = center.submit(req)
    except EmulatorError as exc:
        _fail(exc.code, exc.message, EXIT_FINDINGS)

    overrides = doc.get("switch_settings") or {}
    if overrides:
        merged = rec.config.document.setdefault("switch_settings", {})
        for sid, mapping in overrides.items():
            target = merged.setdefault(sid, {})
            pairs = mapping.items() if isinstance(mapping, dict) else mapping
            for row, col in pairs:
                target[row] = col
        rec.findings = compiler.validate_config(rec.config, t)
    if rec.findings:
        _emit_findings(rec.findings)
        sys.exit(EXIT_FINDINGS)

    try:
        center.schedule(req.request_id)
        handle = center.instantiate(req.request_id)
    except EmulatorError as exc:
        _fail(exc.code, exc.message, EXIT_RUNTIME)
    if handle.state == control.FAILED:
        code, _, message = handle.failure.partition(": ")
        _fail(code or "E_DEVICE", message or handle.failure, EXIT_RUNTIME)

    center.advance(duration_s + center.interval_s)
    archive_record = center.archive(handle.handle_id)

    (out_dir / "counts.csv").write_text(control.counts_csv(handle.records))
    if handle.apc_series:
        lines = [json.dumps(e, sort_keys=True) for e in handle.apc_series]
        (out_dir / "convergence.jsonl").write_text("\n".join(lines) + "\n")
    if "qkd" in doc:
        report = _run_qkd(doc, rec, t, detector, duration_s, seed)
        (out_dir / "qkd_report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n"
        )
        click.echo("metric\tvalue")
        click.echo(f"q\t{report['qber']}")
        click.echo(f"sifted\t{report['sifted_bits']}")
        click.echo(f"final\t{report['final_bits']}")
        click.echo(f"fraction\t{report['final_fraction']}")

    click.echo(f"completed {handle.handle_id}: {len(handle.records)} count records")
    click.echo(f"archive {archive_record.path}")


def _run_qkd(doc, rec, t, detector, duration_s, seed) -> dict:
    """Run one key-distribution session over a compiled link."""
    params = doc["qkd"] or {}
    link = int(params.get("link", 0))
    cfg = rec.config.document
    arms = sorted(
        ((i, tap) for i, tap in enumerate(cfg["taps"]) if tap["link"] == link),
        key=lambda pair: pair[1]["arm"],
    )
    if len(arms) != 2:
        _fail(E_SCHEMA, f"qkd.link {link} does not name a two-arm link", EXIT_FINDINGS)
    (ia, tap_a), (ib, tap_b) = arms
    source = cfg["sources"][link]

    rng = np.random.default_rng([seed, 7, 1])
    src = optics.BiphotonSource(
        source_id=f"{source['hub']}.src{source['index']}",
        pair_rate_hz=source["pair_rate_hz"],
    )
    stream = optics.prepare(
        optics.generate_pairs(src, duration_s, rng), source["mode"], rng
    )
    stream = optics.propagate(stream, compiler.resolve_tap(cfg, t, ia), "a", rng)
    stream = optics.propagate(stream, compiler.resolve_tap(cfg, t, ib), "b", rng)

    delta_ps = abs(tap_b["length_m"] - tap_a["length_m"]) * optics.PS_PER_M
    det = replace(detector, channel_count=4)
    try:
        session = qkd.run_bbm92(
            stream,
            det,
            det,
            duration_s,
            n_target=int(params.get("n_target", 5000)),
            rng=rng,
            window_ps=int(cfg.get("window_ps", 1000)),
            search_range_ps=int(delta_ps) + 5_000_000,
        )
        sifted = qkd.sift(session.bases_a, session.bases_b, session.bits_a, session.bits_b)
        estimate = qkd.estimate_qber(
            sifted.key_a, sifted.key_b, float(params.get("sample_fraction", 0.1)), rng
        )
        result = qkd.distill(estimate.key_a, estimate.key_b, estimate.qber, rng)
    except EmulatorError as exc:
        _fail(exc.code, exc.message, EXIT_RUNTIME)

    return {
        "format": "qkd-report.v1",
        "seed": seed,
        "link": link,
        "qber": round(estimate.qber, 6),
        "n_coincidences": len(session),
        "sifted_bits": len(sifted),
        "reconciled_bits": int(estimate.key_a.shape[0]),
        "final_bits": result.length,
        "final_fraction": round(result.length / max(len(session), 1), 6),
        "keys_match": bool(np.array_equal(result.key_a, result.key_b)),
        "offset_ps": session.offset_ps,
        "transcript": qkd.transcript(session, sifted, estimate, result),
    }


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def _serve_app(app, sock) -> None:
    config = uvicorn.Config(app, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8400", help="host:port to listen on.")
@click.option(
    "--topology",
    "topology_path",
    type=click.Path(path_type=Path),
    default=None,
    help="topology.v1 JSON file; defaults to a built-in ring.",
)
@click.option("--hubs", type=int, default=3, help="Hub count for the built-in ring.")
@click.option("--seed", type=int, default=0)
@click.option(
    "--data-dir",
    type=click.Path(path_type=Path, file_okay=False),
    default=None,
    help="Archive storage directory.",
)
@click.option(
    "--real-time/--virtual-time",
    default=True,
    help="Advance the emulation clock with wall time (default) or leave it manual.",
)
def cmd_serve(addr, topology_path, hubs, seed, data_dir, real_time):
    """Serve the control-plane HTTP API until interrupted."""
    host, _, port_text = addr.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        _fail(E_SCHEMA, f"--addr must be host:port, got {addr!r}", EXIT_FINDINGS)

    if topology_path is not None:
        if not topology_path.is_file():
            _fail(E_MISSING, f"topology file {topology_path} does not exist", EXIT_MISSING)
        try:
            t = topo.topology_from_dict(json.loads(topology_path.read_text()))
        except (json.JSONDecodeError, EmulatorError) as exc:
            _fail(E_SCHEMA, f"bad topology file: {exc}", EXIT_FINDINGS)
    else:
        t = topo.build_network(hubs)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, port))
    except OSError as exc:
        sock.close()
        _fail(E_BIND, f"cannot bind {host}:{port}: {exc}", EXIT_RUNTIME)

    center = ControlCenter(t, seed=seed, data_dir=data_dir)
    app = create_app(center)
    pump = ClockPump(center) if real_time else None
    if pump:
        pump.start()
    click.echo(f"serving on http://{host}:{port}")
    try:
        _serve_app(app, sock)
    finally:
        if pump:
            pump.stop()
        sock.close()


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def _parse_counts(text: str):
    """Regroup the long-format counts series into per-interval rows."""
    rows = list(csv.reader(io.StringIO(text)))
    intervals: list[dict] = []
    seen: dict[tuple, dict] = {}
    singles_keys: set[str] = set()
    pair_keys: set[str] = set()
    for start, length, kind, key, count in rows[1:]:
        slot = (int(start), int(length))
        if slot not in seen:
            seen[slot] = {
                "interval_start_ps": slot[0],
                "interval_len_ps": slot[1],
                "singles": {},
                "coincidences": {},
            }
            intervals.append(seen[slot])
        if kind == "singles":
            seen[slot]["singles"][key] = int(count)
            singles_keys.add(key)
        else:
            seen[slot]["coincidences"][key] = int(count)
            pair_keys.add(key)
    return (
        intervals,
        sorted(singles_keys, key=int),
        sorted(pair_keys),
    )


def _report_tables(intervals, singles_keys, pair_keys) -> dict:
    duration_s = round(sum(r["interval_len_ps"] for r in intervals) / optics.PS_PER_SECOND, 9)
    totals = {}
    for key in singles_keys:
        totals[f"singles_{key}"] = sum(r["singles"].get(key, 0) for r in intervals)
    for key in pair_keys:
        totals[f"coincidences_{key}"] = sum(r["coincidences"].get(key, 0) for r in intervals)
    rates = {
        name: round(n / duration_s, 6) if duration_s else 0.0 for name, n in totals.items()
    }
    return {
        "intervals": intervals,
        "summary": {
            "records": len(intervals),
            "duration_s": duration_s,
            "totals": totals,
            "mean_rates_hz": rates,
        },
    }


@main.command("report")
@click.argument("archive", type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def cmd_report(archive: Path, fmt: str):
    """Print the count series and summary stored in an archive file."""
    if not archive.is_file():
        _fail(E_MISSING, f"archive file {archive} does not exist", EXIT_MISSING)
    try:
        zf = zipfile.ZipFile(archive)
    except (zipfile.BadZipFile, OSError) as exc:
        _fail(E_CORRUPT, f"unreadable archive container: {exc}", EXIT_RUNTIME)
    with zf:
        names = set(zf.namelist())
        if "manifest.json" not in names:
            _fail(E_CORRUPT, "archive has no manifest.json", EXIT_RUNTIME)
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except json.JSONDecodeError as exc:
            _fail(E_CORRUPT, f"manifest.json is not valid JSON: {exc}", EXIT_RUNTIME)
        for member, digest in sorted(manifest.get("hashes", {}).items()):
            if member not in names:
                _fail(E_CORRUPT, f"archive member {member} is missing", EXIT_RUNTIME)
            if hashlib.sha256(zf.read(member)).hexdigest() != digest:
                _fail(E_CORRUPT, f"archive member {member} fails its manifest hash", EXIT_RUNTIME)
        counts_text = zf.read("counts.csv").decode()

    tables = _report_tables(*_parse_counts(counts_text))
    if fmt == "json":
        click.echo(json.dumps(tables, indent=2, sort_keys=True))
        return

    intervals = tables["intervals"]
    singles_cols = sorted({k for r in intervals for k in r["singles"]}, key=int)
    pair_cols = sorted({k for r in intervals for k in r["coincidences"]})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["interval_start_ps", "interval_len_ps"]
        + [f"singles_{k}" for k in singles_cols]
        + [f"coincidences_{k}" for k in pair_cols]
    )
    for r in intervals:
        w.writerow(
            [r["interval_start_ps"], r["interval_len_ps"]]
            + [r["singles"].get(k, 0) for k in singles_cols]
            + [r["coincidences"].get(k, 0) for k in pair_cols]
        )
    w.writerow([])
    w.writerow(["metric", "key", "value"])
    summary = tables["summary"]
    w.writerow(["records", "", summary["records"]])
    w.writerow(["duration_s", "", summary["duration_s"]])
    for name in sorted(summary["totals"]):
        w.writerow(["total", name, summary["totals"][name]])
    for name in sorted(summary["mean_rates_hz"]):
        w.writerow(["rate_hz", name, summary["mean_rates_hz"][name]])
    click.echo(buf.getvalue(), nl=False)


if __name__ == "__main__":
    main()
