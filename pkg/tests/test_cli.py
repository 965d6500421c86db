"""Command-line interface: outputs, exit codes, determinism."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from qvolume.cli import main
from qvolume.kernel import parse_rational


@pytest.fixture()
def runner():
    return CliRunner()


def _run(runner, args, expect_exit=0):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == expect_exit, result.output
    return result


class TestSolve:
    def test_symmetric_min2_d7(self, runner, tmp_path):
        out = tmp_path / "d7.json"
        result = _run(
            runner, ["solve", "min2", "--dim", "7", "--symmetric", "--out", str(out)]
        )
        assert "objective -19/2" in result.output
        assert "record a=1/2 b=1" in result.output
        data = json.loads(out.read_text())
        assert data["solution"]["objective"] == "-19/2"
        assert data["record"]["volume"] == "-19/2"
        assert data["manifest"]["digest"]

    def test_symmetric_max2_d2(self, runner):
        result = _run(runner, ["solve", "max2", "--dim", "2", "--symmetric"])
        assert "objective 1" in result.output

    def test_symmetric_min3_d6(self, runner):
        result = _run(runner, ["solve", "min3", "--dim", "6", "--symmetric"])
        assert "objective -75/16" in result.output

    def test_cap_exceeded_is_usage_error(self, runner):
        result = runner.invoke(main, ["solve", "min2", "--dim", "11", "--full"])
        assert result.exit_code == 2

    def test_unknown_kind_is_usage_error(self, runner):
        result = runner.invoke(main, ["solve", "max3", "--dim", "3"])
        assert result.exit_code == 2


class TestVerify:
    def _solve(self, runner, tmp_path, args, name):
        out = tmp_path / name
        _run(runner, ["solve", *args, "--out", str(out)])
        return out

    def test_grid_and_extension_pass(self, runner, tmp_path):
        out = self._solve(
            runner, tmp_path, ["min2", "--dim", "9", "--symmetric"], "d9.json"
        )
        report = tmp_path / "report.json"
        result = _run(
            runner,
            ["verify", str(out), "--mode", "extension", "--samples", "50",
             "--seed", "1", "--out", str(report)],
        )
        assert "inner-volume-roundtrip: pass" in result.output
        assert json.loads(report.read_text())["passed"] is True

    def test_val_q5_extension_mode(self, runner, tmp_path):
        out = self._solve(
            runner, tmp_path, ["min3", "--dim", "5", "--symmetric"], "d5.json"
        )
        result = _run(
            runner,
            ["verify", str(out), "--mode", "extension", "--samples", "50"],
        )
        assert "vertex-lipschitz: pass" in result.output

    def test_hand_edited_infeasible_file_fails(self, runner, tmp_path):
        out = self._solve(
            runner, tmp_path, ["min2", "--dim", "7", "--symmetric"], "d7.json"
        )
        data = json.loads(out.read_text())
        data["grid"]["class_values"]["6,1"] = "1"  # breaks an adjacency bound
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(data))
        result = runner.invoke(main, ["verify", str(broken), "--mode", "grid"])
        assert result.exit_code == 1
        assert "FAIL" in result.output


class TestExtendEval:
    def test_extend_then_eval(self, runner, tmp_path):
        solved = tmp_path / "d4.json"
        _run(runner, ["solve", "max2", "--dim", "4", "--symmetric", "--out", str(solved)])
        extended = tmp_path / "q.json"
        _run(runner, ["extend", str(solved), "--out", str(extended)])
        result = _run(
            runner, ["eval", str(extended), "--point", "1,1,3/4,1"]
        )
        assert result.output.strip() == "3/4"

    def test_extend_refusal_exit_code(self, runner, tmp_path):
        solved = tmp_path / "d5.json"
        _run(runner, ["solve", "min2", "--dim", "5", "--symmetric", "--out", str(solved)])
        # b < 1: the two-level extension must refuse
        result = runner.invoke(main, ["extend", str(solved)])
        assert result.exit_code == 1


class TestTable:
    def test_fixture_table_matches_embedded_rows(self, runner, tmp_path):
        out = tmp_path / "t.csv"
        _run(runner, ["table", "min", "2..18", "--out", str(out)])
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# manifest ")
        assert lines[1] == "d,a,b,volume,volume_decimal"
        assert len(lines) == 19
        from qvolume.closedform import table_fixture
        from qvolume.kernel import rational_str

        for line in lines[2:]:
            d, a, b, volume, _ = line.split(",")
            record = table_fixture(int(d), "min")
            assert volume == rational_str(record.volume)
            assert a == rational_str(record.a)

    def test_solve_source_matches_fixtures(self, runner, tmp_path):
        fixture_out = tmp_path / "fix.csv"
        solve_out = tmp_path / "solved.csv"
        _run(runner, ["table", "max", "2..6", "--out", str(fixture_out)])
        _run(
            runner,
            ["table", "max", "2..6", "--source", "solve", "--out", str(solve_out)],
        )
        fixture_rows = fixture_out.read_text().splitlines()[1:]
        solved_rows = solve_out.read_text().splitlines()[1:]
        for fixture_line, solved_line in zip(fixture_rows, solved_rows):
            assert fixture_line.split(",")[3] == solved_line.split(",")[3]

    def test_json_format(self, runner, tmp_path):
        out = tmp_path / "t.json"
        _run(runner, ["table", "min", "5..5", "--format", "json", "--out", str(out)])
        data = json.loads(out.read_text())
        assert data["rows"][0]["volume"] == "-32/13"


class TestPlot:
    def test_csv_and_svg(self, runner, tmp_path):
        prefix = tmp_path / "fig"
        _run(runner, ["plot", "--out", str(prefix)])
        lines = (tmp_path / "fig.csv").read_text().splitlines()
        assert lines[1] == "d,log2_abs_min,log2_abs_max"
        rows = {line.split(",")[0]: line.split(",") for line in lines[2:]}
        assert rows["2"][2] == "0"  # log2 |max| at d=2
        assert rows["2"][1].startswith("-1.58496250072")
        assert rows["16"][1].startswith("11.8967")  # log2(3813)
        assert rows["18"][2] == ""  # no max row at d=18
        svg = (tmp_path / "fig.svg").read_text()
        assert svg.startswith("<!-- manifest ")
        assert "<svg" in svg and svg.count("<circle") > 30

    def test_log2_precision(self, runner, tmp_path):
        import math

        prefix = tmp_path / "fig"
        _run(runner, ["plot", "--out", str(prefix)])
        lines = (tmp_path / "fig.csv").read_text().splitlines()
        row16 = [line for line in lines if line.startswith("16,")][0]
        value = float(row16.split(",")[1])
        # 12 significant digits of a value near 11.9: half-ulp is 5e-11
        assert abs(value - math.log2(3813)) < 5e-11


class TestCompare:
    def test_min_range_flags(self, runner, tmp_path):
        out = tmp_path / "cmp.csv"
        _run(runner, ["compare", "min", "7..18", "--out", str(out)])
        lines = out.read_text().splitlines()
        rows = {line.split(",")[0]: line for line in lines[2:]}
        matches = {
            int(d) for d, line in rows.items()
            if line.split(",")[5] == "True"
        }
        assert matches == {8, 9, 10, 12, 13, 14, 15, 16, 17, 18}
        assert "formula-table-discrepancy" in rows["7"]
        assert rows["7"].split(",")[7] == "True"  # bound direction holds

    def test_max_d2_flagged(self, runner, tmp_path):
        out = tmp_path / "cmp.csv"
        _run(runner, ["compare", "max", "2..2", "--no-lp", "--out", str(out)])
        line = out.read_text().splitlines()[2]
        assert line.split(",")[2] == "2/3"  # formula value at d=2
        assert "formula-table-discrepancy" in line

    def test_single_dimension_match(self, runner, tmp_path):
        out = tmp_path / "cmp.csv"
        _run(runner, ["compare", "min", "15..15", "--out", str(out)])
        line = out.read_text().splitlines()[2]
        fields = line.split(",")
        assert fields[2] == fields[3] == fields[4] == "-7435/4"


class TestScan:
    def test_d2_n3(self, runner, tmp_path):
        out = tmp_path / "scan.csv"
        result = _run(
            runner,
            ["scan", "-d", "2", "--kind", "min", "-N", "3", "--out", str(out)],
        )
        assert "best min -1/3 on [1/3,1/3] .. [2/3,2/3]" in result.output
        lines = out.read_text().splitlines()
        assert len(lines) == 38  # manifest + header + 36 boxes

    def test_json_summary(self, runner, tmp_path):
        out = tmp_path / "scan.json"
        _run(
            runner,
            ["scan", "-d", "2", "--kind", "max", "-N", "2", "--format", "json",
             "--out", str(out)],
        )
        data = json.loads(out.read_text())
        assert data["best_value"] == "1"

    def test_bad_resolution_usage_error(self, runner):
        result = runner.invoke(
            main, ["scan", "-d", "2", "--kind", "min", "-N", "0", "--out", "x.csv"]
        )
        assert result.exit_code == 2


class TestDeterminism:
    def test_byte_identical_artifacts(self, runner, tmp_path):
        def produce(base: Path) -> dict:
            base.mkdir()
            solved = base / "d7.json"
            _run(runner, ["solve", "min2", "--dim", "7", "--symmetric",
                          "--out", str(solved)])
            _run(runner, ["verify", str(solved), "--mode", "extension",
                          "--samples", "40", "--seed", "42",
                          "--out", str(base / "report.json")])
            _run(runner, ["table", "min", "2..10", "--out", str(base / "t.csv")])
            _run(runner, ["plot", "--out", str(base / "fig")])
            _run(runner, ["compare", "max", "2..9", "--out", str(base / "cmp.csv")])
            _run(runner, ["scan", "-d", "2", "--kind", "min", "-N", "3",
                          "--out", str(base / "scan.csv")])
            return {
                path.name: path.read_bytes()
                for path in sorted(base.iterdir())
            }

        first = produce(tmp_path / "one")
        second = produce(tmp_path / "two")
        assert first.keys() == second.keys()
        for name in first:
            assert first[name] == second[name], f"{name} differs between runs"
