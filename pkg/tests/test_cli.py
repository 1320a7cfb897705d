import json
import os
import subprocess
import sys

from reflex_sm.cli import build_parser, main

TINY = {
    "name": "Tiny",
    "source": [{"id": "a", "name": "alpha"}, {"id": "b", "name": "bravo"}],
    "target": [{"id": "x", "name": "alpha"}, {"id": "y", "name": "bravo"}],
    "expected": [["a", "x"], ["b", "y"]],
    "band": "low",
}


def write_tiny(tmp_path, **overrides):
    doc = dict(TINY)
    doc.update(overrides)
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def run_cli(*argv):
    return main(list(argv))


class TestBasicCommands:
    def test_fixtures_lists_three(self, capsys):
        assert run_cli("fixtures") == 0
        out = capsys.readouterr().out
        assert "Person" in out and "Order" in out and "Travel" in out

    def test_run_prints_matching(self, tmp_path, capsys):
        path = write_tiny(tmp_path)
        assert run_cli("run", "--scenario", str(path), "--seed", "3") == 0
        out = capsys.readouterr().out
        assert "a (alpha) -> x (alpha)" in out

    def test_run_writes_trace_jsonl(self, tmp_path):
        path = write_tiny(tmp_path)
        trace_path = tmp_path / "trace.jsonl"
        assert run_cli("run", "--scenario", str(path), "--seed", "3",
                       "--trace", str(trace_path)) == 0
        records = [json.loads(line) for line in trace_path.read_text().splitlines()]
        assert records
        decisions = [r for r in records if "decision" in r]
        assert {"tick", "agent", "decision", "target", "scores"} <= set(decisions[0])

    def test_meta_then_eval_table_row(self, tmp_path, capsys):
        out_path = tmp_path / "r.json"
        assert run_cli("meta", "--fixture", "person", "--sims", "10", "--seed", "7",
                       "--out", str(out_path)) == 0
        capsys.readouterr()
        assert run_cli("eval", str(out_path)) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[1].split() == ["Person", "1", "6", "6", "100%"]

    def test_meta_byte_identical_reruns(self, tmp_path):
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        for out in (first, second):
            assert run_cli("meta", "--fixture", "person", "--sims", "10", "--seed", "7",
                           "--out", str(out)) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_meta_with_repetitions_and_eval(self, tmp_path, capsys):
        out_path = tmp_path / "rep.json"
        assert run_cli("meta", "--fixture", "person", "--sims", "5", "--seed", "7",
                       "--repetitions", "2", "--out", str(out_path)) == 0
        capsys.readouterr()
        assert run_cli("eval", str(out_path)) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3  # header + one row per repetition

    def test_meta_csv_output(self, tmp_path):
        csv_path = tmp_path / "freqs.csv"
        assert run_cli("meta", "--fixture", "person", "--sims", "5", "--seed", "7",
                       "--out-csv", str(csv_path)) == 0
        header = csv_path.read_text().splitlines()[0]
        assert header == "source_id,target_id,frequency,mean_score,selected"

    def test_eval_custom_scenario(self, tmp_path, capsys):
        scenario_path = write_tiny(tmp_path)
        report_path = tmp_path / "tiny-report.json"
        assert run_cli("meta", "--scenario", str(scenario_path), "--sims", "3",
                       "--seed", "1", "--out", str(report_path)) == 0
        capsys.readouterr()
        assert run_cli("eval", str(report_path), "--scenario", str(scenario_path)) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[1].split()[0] == "Tiny"

    def test_sweep_writes_csv(self, tmp_path, capsys):
        scenario_path = write_tiny(tmp_path)
        csv_path = tmp_path / "sweep.csv"
        assert run_cli("sweep", "--scenario", str(scenario_path), "--sims-values", "1,2",
                       "--repetitions", "2", "--seed", "5", "--out-csv", str(csv_path)) == 0
        assert csv_path.read_text().splitlines()[0] == "sims,mean_pct"

    def test_seed_env_var_and_override(self, tmp_path, monkeypatch):
        out_env = tmp_path / "env.json"
        monkeypatch.setenv("REFLEX_SM_SEED", "99")
        assert run_cli("meta", "--fixture", "person", "--sims", "3",
                       "--out", str(out_env)) == 0
        assert json.loads(out_env.read_text())["seed"] == 99
        out_flag = tmp_path / "flag.json"
        assert run_cli("meta", "--fixture", "person", "--sims", "3", "--seed", "7",
                       "--out", str(out_flag)) == 0
        assert json.loads(out_flag.read_text())["seed"] == 7


class TestExitCodes:
    def test_unknown_flag_exits_one(self, capsys):
        assert run_cli("meta", "--fixture", "person", "--frobnicate") == 1
        assert "usage" in capsys.readouterr().err

    def test_spec_range_check_example(self):
        # `run` has no --sims flag, so this is a usage error
        assert run_cli("run", "--fixture", "order", "--sims", "0") == 1

    def test_invalid_sims_value(self, capsys):
        assert run_cli("meta", "--fixture", "person", "--sims", "0") == 1
        assert "error" in capsys.readouterr().err

    def test_invalid_threshold_interval(self):
        assert run_cli("meta", "--fixture", "person", "--threshold-lo", "0.9",
                       "--threshold-hi", "0.5") == 1

    def test_invalid_measures_list(self):
        assert run_cli("meta", "--fixture", "person", "--measures", "cosine") == 1

    def test_unknown_fixture_name(self):
        assert run_cli("meta", "--fixture", "bogus") == 1

    def test_missing_scenario_file_exits_two(self, tmp_path, capsys):
        assert run_cli("meta", "--scenario", str(tmp_path / "absent.json")) == 2
        assert capsys.readouterr().err

    def test_malformed_scenario_exits_two(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{oops", encoding="utf-8")
        assert run_cli("run", "--scenario", str(path)) == 2
        assert capsys.readouterr().err

    def test_invalid_scenario_semantics_exits_two(self, tmp_path):
        path = write_tiny(tmp_path, expected=[["a", "zz"]])
        assert run_cli("run", "--scenario", str(path)) == 2

    def test_help_exits_zero(self, capsys):
        assert run_cli("--help") == 0
        assert "COMMAND" in capsys.readouterr().out


class TestHelpConsistency:
    def test_every_flag_documented_and_accepted(self):
        parser = build_parser()
        subparsers = parser._subparsers._group_actions[0]
        for name, sub in subparsers.choices.items():
            help_text = sub.format_help()
            for action in sub._actions:
                assert action.help != "==SUPPRESS==", (name, action.option_strings)
                for option in action.option_strings:
                    assert option in help_text, (name, option)


class TestFilesystemHygiene:
    def test_outputs_only_at_given_paths(self, tmp_path):
        workdir = tmp_path / "work"
        outdir = tmp_path / "out"
        workdir.mkdir()
        outdir.mkdir()
        report = outdir / "r.json"
        csv_path = outdir / "freqs.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "reflex_sm.cli", "meta", "--fixture", "person",
             "--sims", "3", "--seed", "7", "--out", str(report), "--out-csv", str(csv_path)],
            cwd=workdir, capture_output=True, text=True, env=dict(os.environ),
        )
        assert proc.returncode == 0, proc.stderr
        assert sorted(p.name for p in outdir.iterdir()) == ["freqs.csv", "r.json"]
        assert list(workdir.iterdir()) == []


class TestReproduce:
    def test_reproduce_table_shape_small(self, capsys, monkeypatch):
        # keep it quick: tiny batch, the full protocol runs in the acceptance suite
        assert run_cli("reproduce", "--seed", "7", "--sims", "2") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 10
        assert [line.split()[0] for line in lines[1:]] == (
            ["Person"] * 3 + ["Order"] * 3 + ["Travel"] * 3
        )

    def test_reproduce_compare_appends_reference(self, capsys):
        assert run_cli("reproduce", "--seed", "7", "--sims", "1", "--compare") == 0
        out = capsys.readouterr().out
        assert "COMA" in out
