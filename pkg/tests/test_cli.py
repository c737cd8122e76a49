"""Command line contract: exit codes, stderr findings, reports, serving."""

import copy
import json
import socket
import zipfile

import pytest
from click.testing import CliRunner

from qnetem import cli

SCENARIO = {
    "format": "scenario.v1",
    "topology": {"hubs": 3},
    "duration_s": 0.3,
    "seed": 7,
    "design": {
        "format": "design.v1",
        "links": [
            {
                "source_hub": "H0",
                "mode": "entangled",
                "pair_rate_hz": 1e6,
                "arms": [
                    {"endpoint": "H0-N0", "basis_deg": 0.0, "apc": False},
                    {"endpoint": "H0-N1", "basis_deg": 0.0, "apc": False},
                ],
            }
        ],
        "pairs": [[0, 1]],
        "window_ps": 1000,
    },
    "qkd": {"link": 0, "n_target": 1500, "sample_fraction": 0.1},
}


def scenario(**overrides) -> dict:
    doc = copy.deepcopy(SCENARIO)
    doc.update(overrides)
    return doc


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def invoke(args):
    return CliRunner().invoke(cli.main, [str(a) for a in args])


@pytest.fixture(scope="module")
def run_out(tmp_path_factory):
    """One completed scenario run shared by the read-only report tests."""
    tmp = tmp_path_factory.mktemp("cli-run")
    path = write_scenario(tmp, scenario())
    out = tmp / "out"
    result = invoke(["run", path, "--out", out])
    assert result.exit_code == 0, result.stderr
    return out


class TestRun:
    def test_happy_path(self, run_out):
        assert (run_out / "counts.csv").read_text().startswith("interval_start_ps")
        report = json.loads((run_out / "qkd_report.json").read_text())
        assert report["qber"] < 0.02
        assert report["keys_match"] is True
        assert report["final_bits"] > 0
        assert (run_out / "archives" / "i-0000.zip").exists()

    def test_reproducible_across_invocations(self, tmp_path, run_out):
        path = write_scenario(tmp_path, scenario())
        out = tmp_path / "out"
        result = invoke(["run", path, "--out", out])
        assert result.exit_code == 0
        assert (out / "counts.csv").read_bytes() == (run_out / "counts.csv").read_bytes()
        assert (out / "qkd_report.json").read_bytes() == (
            run_out / "qkd_report.json"
        ).read_bytes()

    def test_seed_flag_changes_output(self, tmp_path, run_out):
        path = write_scenario(tmp_path, scenario())
        out = tmp_path / "out"
        result = invoke(["run", path, "--out", out, "--seed", 9])
        assert result.exit_code == 0
        assert (out / "counts.csv").read_bytes() != (run_out / "counts.csv").read_bytes()

    def test_missing_file_exit_1(self, tmp_path):
        result = invoke(["run", tmp_path / "absent.json"])
        assert result.exit_code == 1

    def test_invalid_json_exit_2(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result = invoke(["run", path, "--out", tmp_path / "o"])
        assert result.exit_code == 2
        assert result.stderr.startswith("E_SCHEMA\t")

    def test_wrong_format_tag_exit_2(self, tmp_path):
        path = write_scenario(tmp_path, scenario(format="scenario.v2"))
        result = invoke(["run", path, "--out", tmp_path / "o"])
        assert result.exit_code == 2

    def test_port_out_of_range_exit_2(self, tmp_path):
        doc = scenario(switch_settings={"H0.ring60": {"61": 0}})
        path = write_scenario(tmp_path, doc)
        result = invoke(["run", path, "--out", tmp_path / "o"])
        assert result.exit_code == 2
        assert "E_PORT_RANGE\t" in result.stderr

    def test_unroutable_design_exit_2(self, tmp_path):
        doc = scenario(topology={"hubs": 1}, qkd=None)
        del doc["qkd"]
        link = doc["design"]["links"][0]
        doc["design"]["links"] = [copy.deepcopy(link) for _ in range(3)]
        for i, l in enumerate(doc["design"]["links"]):
            l["arms"][0]["endpoint"] = f"H0-N{(2 * i) % 5}"
            l["arms"][1]["endpoint"] = f"H0-N{(2 * i + 1) % 5}"
        doc["design"]["pairs"] = []
        path = write_scenario(tmp_path, doc)
        result = invoke(["run", path, "--out", tmp_path / "o"])
        assert result.exit_code == 2
        assert "E_UNROUTABLE\t" in result.stderr

    def test_apc_writes_convergence_series(self, tmp_path):
        doc = scenario(duration_s=0.2)
        del doc["qkd"]
        doc["design"]["links"][0]["arms"][1]["endpoint"] = "H1-N0"
        doc["design"]["links"][0]["arms"][1]["apc"] = True
        path = write_scenario(tmp_path, doc)
        out = tmp_path / "o"
        result = invoke(["run", path, "--out", out])
        assert result.exit_code == 0
        lines = (out / "convergence.jsonl").read_text().splitlines()
        assert len(lines) == 2
        entry = json.loads(lines[0])
        assert set(entry) == {"t_s", "hub", "channel", "error", "evaluations", "converged"}

    def test_qkd_starved_exit_3(self, tmp_path):
        doc = scenario()
        doc["qkd"]["n_target"] = 10**8
        path = write_scenario(tmp_path, doc)
        result = invoke(["run", path, "--out", tmp_path / "o"])
        assert result.exit_code == 3
        assert result.stderr.startswith("E_TIMEOUT\t")


class TestReport:
    def archive_path(self, run_out):
        return run_out / "archives" / "i-0000.zip"

    def test_rows_match_record_count(self, run_out):
        result = invoke(["report", self.archive_path(run_out)])
        assert result.exit_code == 0
        table = result.stdout.split("\n\n")[0].splitlines()
        assert len(table) - 1 == 3  # 0.3 s at 0.1 s intervals

    def test_byte_stable(self, run_out):
        a = invoke(["report", self.archive_path(run_out)])
        b = invoke(["report", self.archive_path(run_out)])
        assert a.stdout == b.stdout

    def test_cross_format_equality(self, run_out):
        csv_out = invoke(["report", self.archive_path(run_out)]).stdout
        json_out = json.loads(
            invoke(["report", self.archive_path(run_out), "--format", "json"]).stdout
        )
        series, summary = csv_out.split("\n\n")
        rows = series.splitlines()
        header = rows[0].split(",")
        assert len(rows) - 1 == json_out["summary"]["records"]
        first = dict(zip(header, rows[1].split(",")))
        jfirst = json_out["intervals"][0]
        assert int(first["interval_start_ps"]) == jfirst["interval_start_ps"]
        for ch, n in jfirst["singles"].items():
            assert int(first[f"singles_{ch}"]) == n
        for name, total in json_out["summary"]["totals"].items():
            assert f"total,{name},{total}" in summary

    def test_truncated_archive_corrupt_exit_3(self, run_out, tmp_path):
        blob = self.archive_path(run_out).read_bytes()
        broken = tmp_path / "broken.zip"
        broken.write_bytes(blob[: len(blob) // 2])
        result = invoke(["report", broken])
        assert result.exit_code == 3
        assert result.stderr.startswith("E_CORRUPT\t")

    def test_tampered_member_corrupt_exit_3(self, run_out, tmp_path):
        tampered = tmp_path / "tampered.zip"
        with zipfile.ZipFile(self.archive_path(run_out)) as src:
            with zipfile.ZipFile(tampered, "w") as dst:
                for info in src.infolist():
                    data = src.read(info.filename)
                    if info.filename == "counts.csv":
                        data += b"0,0,singles,0,1\n"
                    dst.writestr(info.filename, data)
        result = invoke(["report", tampered])
        assert result.exit_code == 3
        assert "E_CORRUPT\t" in result.stderr
        assert "counts.csv" in result.stderr

    def test_missing_archive_exit_1(self, tmp_path):
        result = invoke(["report", tmp_path / "absent.zip"])
        assert result.exit_code == 1


class TestServe:
    def test_bind_conflict_exit_3(self):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            result = invoke(["serve", "--addr", f"127.0.0.1:{port}", "--virtual-time"])
        finally:
            blocker.close()
        assert result.exit_code == 3
        assert result.stderr.startswith("E_BIND\t")

    def test_bad_addr_exit_2(self):
        result = invoke(["serve", "--addr", "nonsense"])
        assert result.exit_code == 2
        assert result.stderr.startswith("E_SCHEMA\t")

    def test_missing_topology_file_exit_1(self, tmp_path):
        result = invoke(["serve", "--topology", tmp_path / "absent.json"])
        assert result.exit_code == 1

    def test_serves_app_on_bound_socket(self, monkeypatch, tmp_path):
        captured = {}

        def fake_serve(app, sock):
            captured["app"] = app
            captured["port"] = sock.getsockname()[1]

        monkeypatch.setattr(cli, "_serve_app", fake_serve)
        result = invoke(
            ["serve", "--addr", "127.0.0.1:0", "--virtual-time", "--data-dir", tmp_path]
        )
        assert result.exit_code == 0
        assert "serving on" in result.stdout
        assert captured["port"] > 0
        routes = {r.path for r in captured["app"].routes}
        assert "/requests" in routes and "/instantiations" in routes
