import json

import pytest

from qratio import __version__, cli, problem, topology
from qratio.problem import ProblemInstance
from qratio.topology import Digraph


def run_cli(*argv):
    return cli.main(list(argv))


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture
def tiny_files(tmp_path):
    g = Digraph(3, [(j, i) for j in range(3) for i in range(3) if i != j])
    inst = ProblemInstance(loads=(1, 2, 3), utils=(0, 0, 0), caps=(2, 2, 2), pi_upper=12)
    graph_path = tmp_path / "g.txt"
    inst_path = tmp_path / "i.txt"
    graph_path.write_text(topology.save_digraph(g), encoding="utf-8")
    inst_path.write_text(problem.save_instance(inst), encoding="utf-8")
    return graph_path, inst_path


class TestRun:
    def test_equal_capacity_scenario(self, tmp_path):
        out = tmp_path / "run.json"
        code = run_cli(
            "run",
            "--nodes", "3",
            "--edge-prob", "1.0",
            "--pi-upper", "12",
            "--capacities", "list:2,2,2",
            "--loads", "list:1,2,3",
            "--seed", "1",
            "--out", str(out),
        )
        assert code == 0
        record = read_json(out)
        assert record["version"] == __version__
        assert record["config"]["seed"] == 1
        assert record["sweep"] is None
        (trial,) = record["trials"]
        assert trial["terminated"]
        assert trial["q_tasks_num"] == 12 and trial["q_tasks_den"] == 1
        for node in trial["nodes"]:
            assert node["qs"] == 12
            assert node["total_share"] == 2
        assert record["verification"]["all_pass"]

    def test_file_driven_run(self, tiny_files, tmp_path):
        graph_path, inst_path = tiny_files
        out = tmp_path / "run.json"
        code = run_cli(
            "run",
            "--graph-file", str(graph_path),
            "--instance-file", str(inst_path),
            "--seed", "1",
            "--out", str(out),
        )
        assert code == 0
        record = read_json(out)
        assert record["trials"][0]["n"] == 3
        assert record["trials"][0]["instance"]["caps"] == [2, 2, 2]

    def test_csv_output(self, tmp_path):
        out = tmp_path / "run.csv"
        code = run_cli(
            "run",
            "--nodes", "3",
            "--edge-prob", "1.0",
            "--pi-upper", "12",
            "--capacities", "list:2,2,2",
            "--loads", "list:1,2,3",
            "--seed", "1",
            "--trials", "2",
            "--format", "csv",
            "--out", str(out),
        )
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0].startswith("seed,n,diameter_bound,terminated")
        assert len(lines) == 3

    def test_byte_identical_reruns(self, tmp_path):
        args = [
            "run",
            "--nodes", "20",
            "--edge-prob", "0.5",
            "--pi-upper", "1000",
            "--capacities", "alt:100,300",
            "--load-min", "1",
            "--load-max", "100",
            "--seed", "42",
            "--trials", "3",
        ]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(*args, "--out", str(a)) == 0
        assert run_cli(*args, "--out", str(b)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_round_cap_exit_code(self, tmp_path):
        inst = ProblemInstance(loads=(2, 0), utils=(0, 0), caps=(1, 1), pi_upper=10)
        inst_path = tmp_path / "stuck.txt"
        inst_path.write_text(problem.save_instance(inst), encoding="utf-8")
        code = run_cli(
            "run",
            "--nodes", "2",
            "--edge-prob", "1.0",
            "--instance-file", str(inst_path),
            "--seed", "1",
            "--max-rounds", "6",
            "--out", str(tmp_path / "o.json"),
        )
        assert code == cli.EXIT_CAP

    def test_conflicting_graph_sources_rejected(self, tiny_files, tmp_path):
        graph_path, _ = tiny_files
        code = run_cli(
            "run", "--nodes", "5", "--graph-file", str(graph_path), "--seed", "1",
            "--out", str(tmp_path / "o.json"),
        )
        assert code == cli.EXIT_CONFIG

    def test_missing_graph_source_rejected(self):
        assert run_cli("run", "--seed", "1") == cli.EXIT_CONFIG

    def test_bad_spec_rejected(self, tmp_path):
        code = run_cli(
            "run", "--nodes", "3", "--capacities", "nonsense:1", "--seed", "1",
            "--out", str(tmp_path / "o.json"),
        )
        assert code == cli.EXIT_CONFIG

    def test_unreadable_graph_file_rejected(self, tmp_path):
        assert run_cli("run", "--graph-file", str(tmp_path / "absent.txt"), "--seed", "1") == cli.EXIT_CONFIG

    def test_infeasible_instance_rejected(self, tmp_path):
        inst_path = tmp_path / "bad.txt"
        inst_path.write_text("nodes 2 pi_upper 10 diameter 1\n1 9 0 2\n2 9 0 2\n", encoding="utf-8")
        code = run_cli(
            "run", "--nodes", "2", "--edge-prob", "1.0", "--instance-file", str(inst_path), "--seed", "1",
            "--out", str(tmp_path / "o.json"),
        )
        assert code == cli.EXIT_CONFIG


class TestSweep:
    def test_csv_rows_per_size(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run_cli(
            "sweep",
            "--sizes", "4,6,8",
            "--trials", "2",
            "--seed", "1",
            "--edge-prob", "0.8",
            "--capacities", "alt:3,7",
            "--loads", "uniform:1,4",
            "--pi-upper", "200",
            "--out", str(out),
        )
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 4
        assert lines[0].split(",")[0] == "size"
        assert [ln.split(",")[0] for ln in lines[1:]] == ["4", "6", "8"]

    def test_json_format(self, tmp_path):
        out = tmp_path / "sweep.json"
        code = run_cli(
            "sweep", "--sizes", "4", "--trials", "2", "--seed", "1",
            "--edge-prob", "0.8", "--capacities", "const:5", "--loads", "uniform:1,4",
            "--pi-upper", "100", "--format", "json", "--out", str(out),
        )
        assert code == 0
        record = read_json(out)
        assert record["sweep"]["rows"][0]["size"] == 4
        assert record["trials"] == []

    def test_bad_sizes_rejected(self):
        assert run_cli("sweep", "--sizes", "4,x", "--trials", "1") == cli.EXIT_CONFIG


class TestVerify:
    def _emit_run(self, tmp_path, snapshot=True):
        out = tmp_path / "trace.json"
        argv = [
            "run",
            "--nodes", "3",
            "--edge-prob", "1.0",
            "--pi-upper", "12",
            "--capacities", "list:2,2,2",
            "--loads", "list:1,2,3",
            "--seed", "1",
            "--out", str(out),
        ]
        if snapshot:
            argv.insert(1, "--snapshot")
        assert run_cli(*argv) == 0
        return out

    def test_round_trip_passes(self, tmp_path, capsys):
        trace = self._emit_run(tmp_path)
        assert run_cli("verify", "--trace-file", str(trace)) == 0
        assert "PASS" in capsys.readouterr().out

    def test_corrupted_trace_fails(self, tmp_path):
        trace = self._emit_run(tmp_path)
        record = read_json(trace)
        record["trials"][0]["nodes"][0]["qs"] = 99
        trace.write_text(json.dumps(record), encoding="utf-8")
        assert run_cli("verify", "--trace-file", str(trace)) == cli.EXIT_VERIFY

    def test_corrupted_snapshot_fails(self, tmp_path):
        trace = self._emit_run(tmp_path)
        record = read_json(trace)
        record["trials"][0]["snapshots"][1]["y"][0] += 1
        trace.write_text(json.dumps(record), encoding="utf-8")
        assert run_cli("verify", "--trace-file", str(trace)) == cli.EXIT_VERIFY

    def test_version_mismatch_warns_but_checks(self, tmp_path, capsys):
        trace = self._emit_run(tmp_path, snapshot=False)
        record = read_json(trace)
        record["version"] = "0.0.0-older"
        trace.write_text(json.dumps(record), encoding="utf-8")
        assert run_cli("verify", "--trace-file", str(trace)) == 0
        captured = capsys.readouterr()
        assert "warning" in captured.err
        assert "PASS" in captured.out

    def test_unreadable_trace_config_error(self, tmp_path):
        missing = tmp_path / "nope.json"
        assert run_cli("verify", "--trace-file", str(missing)) == cli.EXIT_CONFIG
        garbled = tmp_path / "garbled.json"
        garbled.write_text("{not json", encoding="utf-8")
        assert run_cli("verify", "--trace-file", str(garbled)) == cli.EXIT_CONFIG

    def test_record_without_trials_rejected(self, tmp_path):
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({"version": __version__, "trials": []}), encoding="utf-8")
        assert run_cli("verify", "--trace-file", str(empty)) == cli.EXIT_CONFIG


class TestParser:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli("--version")
        assert exc.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_command_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("frobnicate")
        assert exc.value.code == 2
