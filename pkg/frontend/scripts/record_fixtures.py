#!/usr/bin/env python3
"""Record API fixtures for the console's contract tests.

Every fixture is captured from the real control service over its HTTP
test client (or, for the key report, from a real scenario run), so the
console tests exercise the exact bytes the service emits. Rerun after
changing service payloads:

    python3 scripts/record_fixtures.py
"""

import json
import pathlib
import tempfile

import numpy as np
from click.testing import CliRunner
from fastapi.testclient import TestClient

from qnetem import cli, compiler, control, service, topology as topo

OUT = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures"
SEED = 20250815
AUTH = {"Authorization": "Bearer alice"}


def dump(name: str, payload) -> None:
    path = OUT / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(OUT.parent.parent)}")


def record_topologies() -> None:
    for n in (1, 3):
        t = topo.build_network(n)
        center = control.ControlCenter(t, seed=SEED)
        client = TestClient(service.create_app(center))
        dump(f"topology_{n}hub.json", client.get("/topology").json())


def handcrafted_designs() -> list[dict]:
    """Five designs exercising optional-key absence and unknown keys."""
    return [
        # minimal: defaults for rate, window, pairs all absent
        {
            "format": "design.v1",
            "links": [
                {
                    "source_hub": "H0",
                    "mode": "heralded",
                    "arms": [
                        {"endpoint": "H0-N0"},
                        {"endpoint": "H0.measure"},
                    ],
                }
            ],
        },
        # cross-hub entangled pair with both taps counted
        {
            "format": "design.v1",
            "links": [
                {
                    "source_hub": "H0",
                    "mode": "entangled",
                    "pair_rate_hz": 2000000.0,
                    "arms": [
                        {"endpoint": "H0-N0", "basis_deg": 0.0, "apc": False},
                        {"endpoint": "H1-N0", "basis_deg": 0.0, "apc": True},
                    ],
                }
            ],
            "pairs": [[0, 1]],
            "window_ps": 1000,
        },
        # two links, second unpaired, mixed optional keys
        {
            "format": "design.v1",
            "links": [
                {
                    "source_hub": "H1",
                    "mode": "entangled",
                    "arms": [
                        {"endpoint": "H1.measure", "basis_deg": 22.5},
                        {"endpoint": "H2.measure", "basis_deg": -22.5},
                    ],
                },
                {
                    "source_hub": "H2",
                    "mode": "heralded",
                    "pair_rate_hz": 200000.0,
                    "arms": [
                        {"endpoint": "H2-N3", "apc": False},
                        {"endpoint": "H2-N4"},
                    ],
                },
            ],
            "pairs": [[0, 1]],
        },
        # unknown keys at every level must survive a canvas round trip
        {
            "format": "design.v1",
            "label": "ops shakedown",
            "links": [
                {
                    "source_hub": "H0",
                    "mode": "entangled",
                    "owner": "alice",
                    "arms": [
                        {"endpoint": "H0-N2", "basis_deg": 45.0, "note": "far pad"},
                        {"endpoint": "H0.measure", "apc": True},
                    ],
                }
            ],
            "pairs": [],
            "window_ps": 2000,
            "tags": ["demo", 3],
        },
        # empty design is schema-valid: nothing to route
        {"format": "design.v1", "links": [], "pairs": [], "window_ps": 500},
    ]


def record_designs() -> None:
    t = topo.build_network(3)
    rng = np.random.default_rng(SEED)
    designs = handcrafted_designs()
    while len(designs) < 50:
        d = compiler.fuzz_design(t, rng)
        compiler.check_design(d, t)
        designs.append(d)
    for i, d in enumerate(designs):
        dump(f"designs/design_{i:03d}.json", d)


def record_run() -> None:
    t = topo.build_network(2)
    center = control.ControlCenter(t, seed=SEED, interval_s=0.1)
    client = TestClient(service.create_app(center))

    design = {
        "format": "design.v1",
        "links": [
            {
                "source_hub": "H0",
                "mode": "entangled",
                "pair_rate_hz": 2000000.0,
                "arms": [
                    {"endpoint": "H0-N0", "basis_deg": 0.0, "apc": False},
                    {"endpoint": "H1-N0", "basis_deg": 0.0, "apc": True},
                ],
            }
        ],
        "pairs": [[0, 1]],
        "window_ps": 1000,
    }
    body = {"request_id": "fix-run", "design": design, "start_s": 0.0, "end_s": 2.0}
    assert client.post("/requests", json=body, headers=AUTH).status_code == 201
    dump("submit_response.json", client.post("/requests", json={**body, "request_id": "fix-dup"}, headers=AUTH).json())
    assert client.post("/requests/fix-run/schedule", headers=AUTH).status_code == 200

    # overlapping window on the same resources -> the conflict body
    assert client.post("/requests/fix-dup/schedule", headers=AUTH).status_code == 409
    dump("error_conflict.json", client.post("/requests/fix-dup/schedule", headers=AUTH).json())

    started = client.post("/instantiations", json={"request_id": "fix-run"}, headers=AUTH)
    assert started.status_code == 201, started.text
    handle_id = started.json()["handle_id"]

    center.advance(0.95)
    dump("monitor_active.json", client.get(f"/instantiations/{handle_id}", headers=AUTH).json())

    # foreign subscriber is scoped out
    scoped = client.get(f"/instantiations/{handle_id}", headers={"Authorization": "Bearer mallory"})
    assert scoped.status_code == 403
    dump("error_scope.json", scoped.json())

    center.advance(1.5)
    dump("monitor_completed.json", client.get(f"/instantiations/{handle_id}", headers=AUTH).json())

    stream = client.get(
        f"/instantiations/{handle_id}/counts", params={"follow": "false"}, headers=AUTH
    )
    lines = [ln for ln in stream.text.splitlines() if ln.strip()]
    (OUT / "counts_stream.ndjson").write_text("\n".join(lines) + "\n")
    print(f"wrote test/fixtures/counts_stream.ndjson ({len(lines)} records)")

    # the same stream as seen by a client whose resume skipped intervals
    holey = lines[:8] + lines[11:]
    (OUT / "counts_stream_gap.ndjson").write_text("\n".join(holey) + "\n")
    print(f"wrote test/fixtures/counts_stream_gap.ndjson ({len(holey)} records)")

    assert client.get(f"/archives/{handle_id}", headers=AUTH).status_code == 200
    dump("ledger.json", client.get("/ledger/alice", headers=AUTH).json())


def record_qkd_report() -> None:
    scenario = json.loads(
        (pathlib.Path(__file__).resolve().parents[2] / "scenarios" / "bbm92_two_hubs.json").read_text()
    )
    scenario["duration_s"] = 0.4
    scenario["qkd"]["n_target"] = 2000
    runner = CliRunner()
    with tempfile.TemporaryDirectory() as tmp:
        spath = pathlib.Path(tmp) / "scenario.json"
        spath.write_text(json.dumps(scenario))
        result = runner.invoke(cli.main, ["run", str(spath), "--out", tmp])
        assert result.exit_code == 0, result.output
        report = json.loads((pathlib.Path(tmp) / "qkd_report.json").read_text())
    dump("qkd_report.json", report)


if __name__ == "__main__":
    record_topologies()
    record_designs()
    record_run()
    record_qkd_report()
