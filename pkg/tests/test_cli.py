"""Command line interface tests."""

import json

from alkane_qubo.cli import EXIT_OK, EXIT_USAGE, main
from alkane_qubo.qubo import problem_from_json


def run_cli(*argv):
    return main(list(argv))


class TestBuild:
    def test_emits_problem_json(self, tmp_path, capsys):
        out = tmp_path / "problem.json"
        assert run_cli("build", "--n", "4", "-o", str(out)) == EXIT_OK
        problem = problem_from_json(out.read_text())
        assert problem.m == 8
        assert problem.offset == 18.0

    def test_stdout_default(self, capsys):
        assert run_cli("build", "--n", "4") == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["offset"] == 18.0

    def test_scaled_ising_within_bounds(self, tmp_path):
        out = tmp_path / "ising.json"
        assert run_cli("build", "--n", "5", "--ising", "--scale", "-o", str(out)) == EXIT_OK
        doc = json.loads(out.read_text())
        assert max(abs(v) for v in doc["h"]) <= 2.0 + 1e-12
        assert max(abs(v) for _, _, v in doc["couplings"]) <= 1.0 + 1e-12

    def test_rejects_small_n(self):
        assert run_cli("build", "--n", "2") == EXIT_USAGE

    def test_rejects_bad_penalty(self):
        assert run_cli("build", "--n", "4", "--p1", "-1") == EXIT_USAGE


class TestEnumerate:
    def test_butane_report_and_dump(self, tmp_path):
        report_path = tmp_path / "report.json"
        isomer_path = tmp_path / "isomers.jsonl"
        code = run_cli(
            "enumerate", "--n", "4", "--samples", "2000", "--seed", "1",
            "-o", str(report_path), "--isomers", str(isomer_path),
        )
        assert code == EXIT_OK
        report = json.loads(report_path.read_text())
        assert report["isomers_found"] == 2
        assert report["n"] == 4
        assert len(isomer_path.read_text().splitlines()) == 2

    def test_byte_identical_given_seed(self, tmp_path):
        outputs = []
        for name in ("a", "b"):
            report_path = tmp_path / f"{name}.json"
            code = run_cli("enumerate", "--n", "4", "--samples", "1000", "--seed", "7",
                           "-o", str(report_path))
            assert code == EXIT_OK
            outputs.append(report_path.read_bytes())
        assert outputs[0] == outputs[1]

    def test_sample_dump(self, tmp_path):
        dump = tmp_path / "samples.csv"
        code = run_cli("enumerate", "--n", "4", "--samples", "50", "--seed", "0",
                       "--max-iterations", "1", "-o", str(tmp_path / "r.json"),
                       "--dump-samples", str(dump))
        assert code == EXIT_OK
        lines = dump.read_text().splitlines()
        assert lines[0] == "bits,energy_original,iteration,chain"
        assert len(lines) == 51


class TestOracle:
    def test_heptane_isomer_lines(self, capsys):
        assert run_cli("oracle", "--n", "7", "--mode", "isomers") == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 9

    def test_ground_state_lines(self, capsys):
        assert run_cli("oracle", "--n", "4", "--mode", "ground-states") == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        docs = [json.loads(line) for line in lines]
        assert len(docs) == 3
        assert all(doc["energy"] == -18.0 for doc in docs)


class TestAnalyze:
    def test_hamming(self, tmp_path):
        out = tmp_path / "hamming.csv"
        assert run_cli("analyze", "--mode", "hamming", "--n", "5", "-o", str(out)) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "isomer_a,isomer_b,distance"
        assert len(lines) == 1 + 3  # 3 isomers -> 3 pairs

    def test_histogram(self, tmp_path):
        out = tmp_path / "histogram.csv"
        code = run_cli("analyze", "--mode", "histogram", "--n", "4",
                       "--samples", "500", "--seed", "2", "-o", str(out))
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "energy,count"
        counts = [int(line.split(",")[1]) for line in lines[1:]]
        assert sum(counts) == 500

    def test_coverage(self, tmp_path):
        out = tmp_path / "coverage.csv"
        code = run_cli("analyze", "--mode", "coverage", "--n", "4", "--methods", "FA",
                       "--repetitions", "2", "--samples", "2000", "--seed", "3", "-o", str(out))
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "method,repetition,iterations"
        assert len(lines) == 3

    def test_unknown_method(self):
        assert run_cli("analyze", "--mode", "coverage", "--n", "4", "--methods", "XX") == EXIT_USAGE


class TestVerify:
    def test_butane_passes(self, capsys):
        assert run_cli("verify", "--n", "4") == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out


class TestUsageErrors:
    def test_missing_subcommand(self):
        assert run_cli() == EXIT_USAGE

    def test_missing_required_argument(self):
        assert run_cli("build") == EXIT_USAGE

    def test_unknown_flag(self):
        assert run_cli("build", "--n", "4", "--bogus") == EXIT_USAGE
