import json
import math

import pytest

from pdwf.cli import run
from pdwf.measures import SetPartition


def run_capture(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestEsfCommand:
    def test_n3_theta1(self, capsys):
        code, out, err = run_capture(["esf", "--n", "3", "--theta", "1"], capsys)
        assert code == 0
        dist = json.loads(out)
        assert len(dist) == 5
        assert math.fsum(dist.values()) == pytest.approx(1.0, abs=1e-10)
        assert dist["012"] == pytest.approx(1 / 6)

    def test_above_cap_is_resource_error(self, capsys):
        code, out, err = run_capture(["esf", "--n", "13", "--theta", "1"], capsys)
        assert code == 2
        assert out == ""

    def test_bad_theta_is_validation_error(self, capsys):
        code, _, err = run_capture(["esf", "--n", "3", "--theta", "0"], capsys)
        assert code == 1
        assert "error" in err


class TestCrpSampleCommand:
    def test_streams_lines(self, capsys):
        code, out, _ = run_capture(
            ["--seed", "1", "crp-sample", "--n", "5", "--theta", "1", "--reps", "7"],
            capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 7
        for line in lines:
            SetPartition.from_string(line)  # parses and validates

    def test_deterministic(self, capsys):
        a = run_capture(["--seed", "5", "crp-sample", "--n", "6", "--theta", "2",
                         "--reps", "20"], capsys)
        b = run_capture(["--seed", "5", "crp-sample", "--n", "6", "--theta", "2",
                         "--reps", "20"], capsys)
        assert a == b

    def test_common_flags_accepted_after_subcommand(self, capsys):
        a = run_capture(["--seed", "5", "crp-sample", "--n", "6", "--theta", "2",
                         "--reps", "20"], capsys)
        b = run_capture(["crp-sample", "--n", "6", "--theta", "2", "--reps", "20",
                         "--seed", "5"], capsys)
        assert a == b

    def test_threads_do_not_change_output(self, capsys):
        a = run_capture(["--seed", "3", "crp-sample", "--n", "4", "--theta", "1",
                         "--reps", "600"], capsys)
        b = run_capture(["--seed", "3", "--threads", "4", "crp-sample", "--n", "4",
                         "--theta", "1", "--reps", "600"], capsys)
        assert a[1] == b[1]


class TestWfCommand:
    def test_simulate_records(self, capsys):
        code, out, _ = run_capture(
            ["--seed", "2", "wf", "simulate", "--N", "30", "--theta", "1",
             "--burn-in", "60", "--reps", "3", "--sample-n", "4"], capsys)
        assert code == 0
        recs = [json.loads(line) for line in out.strip().split("\n")]
        assert len(recs) == 3
        for rec in recs:
            assert rec["K"] >= 1
            SetPartition.from_string(rec["partition"])
            assert "k_trace" in rec


class TestGenealogyCommand:
    def test_csv(self, capsys):
        code, out, _ = run_capture(
            ["--seed", "4", "genealogy", "--N", "30", "--reps", "5",
             "--intervals", "5:15,3:10"], capsys)
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "replicate,x,y,gens,edges"
        assert len(lines) == 1 + 5 * 2
        for line in lines[1:]:
            rep, x, y, gens, edges = (int(tok) for tok in line.split(","))
            assert int(edges) <= int(y) * int(gens)

    def test_bad_intervals(self, capsys):
        code, _, err = run_capture(
            ["genealogy", "--N", "30", "--reps", "2", "--intervals", "oops"], capsys)
        assert code == 1


class TestFvCommand:
    def test_transition_summary(self, capsys):
        code, out, _ = run_capture(
            ["--seed", "6", "fv", "transition", "--theta", "1", "--t", "1",
             "--reps", "400"], capsys)
        assert code == 0
        stats = json.loads(out)
        assert stats["match_target"] == pytest.approx(0.5)
        assert abs(stats["match_mean"] - 0.5) < 0.1


class TestBoundsCommand:
    def test_bound_mode(self, capsys):
        code, out, _ = run_capture(
            ["bounds", "--preset", "pim", "--N", "1000", "--theta", "1",
             "--n", "2"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["error_terms"][0] == 0.0
        assert rep["error_terms"][1] == pytest.approx(7e-3)
        assert rep["sampling_tv_bound"]["n"] == 2
        assert rep["provenance"]["k32_mode"] == "bound"

    def test_mc_mode_deterministic(self, capsys):
        argv = ["--seed", "9", "bounds", "--N", "200", "--theta", "1",
                "--k32-mode", "mc", "--mc-reps", "500"]
        a = run_capture(argv, capsys)
        b = run_capture(argv, capsys)
        assert a == b and a[0] == 0

    def test_value_mode_requires_value(self, capsys):
        code, _, err = run_capture(
            ["bounds", "--N", "100", "--theta", "1", "--k32-mode", "value"], capsys)
        assert code == 1


class TestErrors:
    def test_unknown_flag_exits_1(self, capsys):
        code, _, err = run_capture(["esf", "--n", "3", "--theta", "1",
                                    "--bogus"], capsys)
        assert code == 1
        assert "usage" in err

    def test_unknown_command_exits_1(self, capsys):
        code, _, _ = run_capture(["frobnicate"], capsys)
        assert code == 1


class TestOutFile(object):
    def test_out_writes_file_only(self, capsys, tmp_path):
        out_path = tmp_path / "esf.json"
        code, out, _ = run_capture(
            ["--out", str(out_path), "esf", "--n", "2", "--theta", "1"], capsys)
        assert code == 0
        assert out == ""
        assert json.loads(out_path.read_text())["00"] == pytest.approx(0.5)
