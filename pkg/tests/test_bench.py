import json
import math

import numpy as np
import pytest

from sfcmr.bench import BenchConfig, compute_exponents, mu_x, run_single, run_suite
from sfcmr.cli import main
from sfcmr.hcp_io import (
    TIMING_COLUMNS,
    Kind,
    format_instance,
    parse_solution,
    read_instance,
    read_report,
    verify_sequence,
    write_trace,
)

from conftest import cubic_hamiltonian, cycle, path, petersen

TRIANGLE_TEXT = "NAME : tri\nDIMENSION : 3\nEDGE_DATA_SECTION\n1 2\n2 3\n3 1\n-1\nEOF\n"


@pytest.fixture
def toy_dir(tmp_path):
    d = tmp_path / "instances"
    d.mkdir()
    (d / "tri.hcp").write_text(TRIANGLE_TEXT)
    (d / "petersen.hcp").write_text(format_instance(petersen()))
    (d / "cubic24.hcp").write_text(format_instance(cubic_hamiltonian(24, seed=4)))
    return d


class TestComputeExponents:
    def test_table_orientation(self):
        # counters of the first table row: V=66, R_vH=264, M_eps=156, R_eps=1203
        cols = compute_exponents({"V": 66, "M_vH": 0, "R_vH": 264, "M_eps": 156, "R_eps": 1203})
        assert cols["log_R_V"] == pytest.approx(math.log(264) / math.log(66))
        assert cols["log_R_V"] == pytest.approx(1.331, abs=1e-3)
        # the published log columns are reproduced by the error counters
        assert cols["log_V_R_eps"] == pytest.approx(1.692877851, abs=1e-8)
        assert cols["log_V_M_eps"] == pytest.approx(1.205315549, abs=1e-8)
        assert cols["log_M_V"] is None

    def test_third_row(self):
        cols = compute_exponents({"V": 78, "M_vH": 0, "R_vH": 23, "M_eps": 287, "R_eps": 190})
        assert cols["log_V_R_eps"] == pytest.approx(1.204355003, abs=1e-8)
        assert cols["log_V_M_eps"] == pytest.approx(1.299026958, abs=1e-8)

    def test_counter_equal_to_v(self):
        assert compute_exponents({"V": 50, "R_vH": 50})["log_R_V"] == pytest.approx(1.0)

    def test_zero_counter(self):
        assert compute_exponents({"V": 50, "R_vH": 0})["log_R_V"] is None


class TestMuX:
    def test_values(self):
        assert mu_x([0.0, 0.0]) == 100.0
        assert mu_x(np.array([1.0, 0.0])) == 50.0
        assert mu_x([]) is None


class TestBenchConfig:
    def test_bad_workers(self):
        with pytest.raises(ValueError):
            BenchConfig(workers=0)

    def test_bad_time_limit(self):
        with pytest.raises(ValueError):
            BenchConfig(time_limit=0)


class TestRunSingle:
    def test_triangle(self, tmp_path):
        p = tmp_path / "tri.hcp"
        p.write_text(TRIANGLE_TEXT)
        row, report = run_single(p, BenchConfig(out_dir=tmp_path / "out", time_limit=30))
        assert row["outcome"] == "HC"
        seq = parse_solution((tmp_path / "out" / row["solution_file"]).read_text())
        assert verify_sequence(read_instance(p), seq, Kind.HC)

    def test_malformed(self, tmp_path):
        p = tmp_path / "bad.hcp"
        p.write_text("DIMENSION : 3\nEDGE_DATA_SECTION\n1 9\n")
        row, report = run_single(p, BenchConfig())
        assert report is None
        assert row["outcome"] == "error"

    def test_seeds_tried_in_order(self, tmp_path):
        p = tmp_path / "star.hcp"
        p.write_text("DIMENSION : 4\nEDGE_DATA_SECTION\n1 2\n1 3\n1 4\n-1\n")
        row, report = run_single(p, BenchConfig(seeds=[3, 4], time_limit=10))
        assert row["outcome"] == "none"
        assert report.seed == 4


class TestRunSuite:
    def test_toy_suite(self, toy_dir, tmp_path):
        rows, summary = run_suite(toy_dir, BenchConfig(out_dir=tmp_path / "out", time_limit=60))
        assert len(rows) == 3
        assert summary == "solved 3/3"
        back = read_report(tmp_path / "out" / "report.csv")
        assert [r["instance"] for r in back] == ["cubic24", "petersen", "tri"]
        for r in back:
            g = read_instance(toy_dir / f"{r['instance']}.hcp")
            seq = parse_solution((tmp_path / "out" / r["solution_file"]).read_text())
            assert verify_sequence(g, seq, Kind(r["outcome"]))

    def test_empty_dir(self, tmp_path):
        rows, summary = run_suite(tmp_path, BenchConfig(), tmp_path / "r.csv")
        assert rows == []
        assert summary == "solved 0/0"
        assert len((tmp_path / "r.csv").read_text().splitlines()) == 1

    def test_bad_instance_isolated(self, toy_dir):
        (toy_dir / "zz.hcp").write_text("garbage\n")
        rows, summary = run_suite(toy_dir, BenchConfig(time_limit=60))
        assert summary == "solved 3/4"
        assert rows[-1]["outcome"] == "error"

    def test_parallel_matches_serial(self, toy_dir, tmp_path):
        run_suite(toy_dir, BenchConfig(workers=1), tmp_path / "a.csv")
        run_suite(toy_dir, BenchConfig(workers=3), tmp_path / "b.csv")
        a, b = read_report(tmp_path / "a.csv"), read_report(tmp_path / "b.csv")
        for ra, rb in zip(a, b):
            for col in TIMING_COLUMNS:
                ra.pop(col)
                rb.pop(col)
        assert a == b


class TestCli:
    def test_solve(self, tmp_path, capsys):
        p = tmp_path / "tri.hcp"
        p.write_text(TRIANGLE_TEXT)
        assert main(["solve", str(p)]) == 0
        assert capsys.readouterr().out.startswith("HC ")

    def test_unsolved_exit(self, tmp_path):
        p = tmp_path / "star.hcp"
        p.write_text("DIMENSION : 4\nEDGE_DATA_SECTION\n1 2\n1 3\n1 4\n-1\n")
        assert main(["solve", str(p), "--hp"]) == 1

    def test_parse_error_exit(self, tmp_path):
        p = tmp_path / "bad.hcp"
        p.write_text("DIMENSION : two\n")
        assert main(["solve", str(p)]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["solve", str(tmp_path / "nope.hcp")]) == 2

    def test_trace_written(self, tmp_path):
        p = tmp_path / "c.hcp"
        p.write_text(format_instance(cycle(12)))
        out = tmp_path / "out"
        assert main(["solve", str(p), "--trace", "--out", str(out), "--seed", "2"]) == 0
        lines = (out / "C12.trace.csv").read_text().splitlines()
        assert lines[0] == "t,x"
        assert lines[-1].endswith(",0.0")

    def test_bench(self, toy_dir, tmp_path, capsys):
        assert main(["bench", str(toy_dir), "--out", str(tmp_path / "o"), "--workers", "2"]) == 0
        assert capsys.readouterr().out.strip() == "solved 3/3"
        assert (tmp_path / "o" / "report.csv").exists()

    def test_env_override(self, tmp_path, monkeypatch):
        p = tmp_path / "p.hcp"
        p.write_text(format_instance(path(6)))
        monkeypatch.setenv("SFCMR_TIME_LIMIT", "-1")
        assert main(["solve", str(p)]) == 2
        monkeypatch.setenv("SFCMR_TIME_LIMIT", "5")
        monkeypatch.setenv("SFCMR_SEED", "11")
        assert main(["solve", str(p)]) == 0

    def test_analyze(self, tmp_path, capsys):
        x, xs = 0.3, []
        for _ in range(3000):
            x = 4 * x * (1 - x)
            xs.append(x)
        write_trace(tmp_path / "t.csv", xs)
        assert main(["analyze", str(tmp_path / "t.csv")]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["datapoints"] == 3000
        assert out["zero_one"] > 0.9

    def test_analyze_short(self, tmp_path):
        write_trace(tmp_path / "t.csv", [0.1, 0.2])
        assert main(["analyze", str(tmp_path / "t.csv")]) == 2
