"""Command line front end: deterministic reports, exit codes, formats.

Numeric strings frozen here are the .12g renderings of values already
pinned down in the module tests (entropies, r values, closed forms).
"""

from __future__ import annotations

import csv
import io
import math

import pytest

from retroquery import cli
from retroquery.problems import gen_grover, save_problem

RT2 = 1.0 / math.sqrt(2.0)


def run(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


# === analyze ===

def test_analyze_deutsch_setting(capsys):
    rc, out, err = run(capsys, "analyze", "--problem", "deutsch", "--setting", "01")
    assert rc == 0, err
    assert "# retroquery analyze" in out
    assert "## Knowledge instances at 01" in out
    # three instances; the two-balanced subset needs no query at all
    assert "| {00,01} | 0.5 | 0 | 1 | 1 |" in out
    assert "| {01,10} | 0.5 | 1 | 1 | 0 |" in out
    assert "| {01,11} | 0.5 | 0 | 1 | 1 |" in out
    assert "| minimax | general | 1 |" in out
    assert "## Valid pairs at 01" in out
    assert "## Notes" in out


def test_analyze_all_settings_lists_each(capsys):
    rc, out, _ = run(capsys, "analyze", "--problem", "deutsch")
    assert rc == 0
    for b in ("00", "01", "10", "11"):
        assert f"## Knowledge instances at {b}" in out
        assert f"## Valid pairs at {b}" in out
    # pair table rows: three per setting
    assert out.count("| general |") >= 1


def test_analyze_simon_frozen_row(capsys):
    rc, out, _ = run(capsys, "analyze", "--problem", "simon", "--n", "2",
                     "--setting", "0011")
    assert rc == 0
    assert "| {0011,0110} | 0.613147192765 | 0.584962500721 | 1.58496250072 | 1 |" in out
    assert "| {0011,1001} | 0.613147192765 | 0.584962500721 | 1.58496250072 | 1 |" in out
    assert "| minimax | general | 1 |" in out


def test_analyze_unknown_setting_exits_nonzero(capsys):
    rc, out, err = run(capsys, "analyze", "--problem", "deutsch", "--setting", "99")
    assert rc == 1
    assert "99" in err


def test_analyze_file_problem(tmp_path, capsys):
    path = tmp_path / "g2.json"
    save_problem(gen_grover(2), str(path))
    rc, out, _ = run(capsys, "analyze", "--file", str(path), "--setting", "01")
    assert rc == 0
    assert "| {00,01} | 0.5 | 1 | 1 | 1 |" in out


def test_analyze_no_valid_sharing(capsys):
    rc, out, _ = run(capsys, "analyze", "--problem", "grover", "--n", "1")
    assert rc == 0
    assert "## No valid sharing" in out
    assert "| 0 | C-nr | 1 |" in out
    assert "| n/a |" in out

    rc2, _, err2 = run(capsys, "analyze", "--problem", "grover", "--n", "1", "--strict")
    assert rc2 == 1
    assert "no valid sharing" in err2.lower()


# === predict ===

def test_predict_dj(capsys):
    rc, out, _ = run(capsys, "predict", "--problem", "dj", "--n", "2", "--r", "0.5")
    assert rc == 0
    assert "| sharing engine | 1 |" in out


def test_predict_grover_closed_forms(capsys):
    rc, out, _ = run(capsys, "predict", "--problem", "grover", "--n", "4", "--r", "0.5")
    assert rc == 0
    assert "| 4 | 0.5 | 3 | 3 | 0.5 |" in out  # n r queries k_opt r(k_opt)
    assert "| closed form | 3 |" in out
    # the unfiltered engine also runs at this size; bitmask sharing with
    # three of four bits known leaves two-element subsets, hence depth 1
    assert "| minimax | bitmask | 1 |" in out


def test_predict_grover_full_knowledge(capsys):
    rc, out, _ = run(capsys, "predict", "--problem", "grover", "--n", "4", "--r", "1.0")
    assert rc == 0
    assert "| closed form | 0 |" in out


def test_predict_r_validation(capsys):
    rc, _, err = run(capsys, "predict", "--problem", "deutsch", "--r", "0.7")
    assert rc == 1 and "search family" in err
    rc, _, err = run(capsys, "predict", "--problem", "grover", "--n", "4", "--r", "0.0")
    assert rc == 1
    rc, _, err = run(capsys, "predict", "--problem", "grover", "--n", "4", "--r", "1.5")
    assert rc == 1


# === infer-r ===

def test_infer_r_rows(capsys):
    rc, out, _ = run(capsys, "infer-r", "--n-min", "2", "--n-max", "6")
    assert rc == 0
    assert "| 2 | 1 | 0.5 | 1 |" in out
    assert "| 6 | 6 | 0.53210751299 | 7 |" in out


def test_infer_r_odd_range_fails(capsys):
    rc, _, err = run(capsys, "infer-r", "--n-min", "3", "--n-max", "3")
    assert rc == 1


# === simulate ===

def test_simulate_deutsch_forced(capsys):
    rc, out, _ = run(capsys, "simulate", "--circuit", "deutsch", "--setting", "01")
    assert rc == 0
    assert "## Input state" in out and "## Output state" in out
    assert f"00|0|0 {RT2:.15f} {0.0:.15f} {0.25:.15f}" in out
    assert f"00|0|1 {-RT2:.15f} {0.0:.15f} {0.25:.15f}" in out
    assert "| 1 | B | {01} | 0.25 |" in out
    assert "| 2 | A | {1} | 1 |" in out
    assert f"01|1|0 {RT2:.15f} {0.0:.15f} {1.0:.15f}" in out
    assert "| 01 | 1 | 1 | yes |" in out
    assert "| arguments determine solutions | yes |" in out


def test_simulate_simon_reports_period(capsys):
    rc, out, _ = run(capsys, "simulate", "--circuit", "simon2", "--setting", "0011")
    assert rc == 0
    assert "| 0011 | 01 | 01 | yes |" in out
    assert "| sharp argument equals period | yes |" in out


def test_simulate_check_states(capsys):
    for name in ("deutsch", "grover2", "dj2", "simon2"):
        rc, out, _ = run(capsys, "simulate", "--circuit", name, "--check-states")
        assert rc == 0, name
        assert "## State checks" in out
        assert "FAIL" not in out
    print("state checks pass through the CLI for every builtin circuit")


def test_simulate_sampling_is_seeded(capsys):
    rc1, out1, _ = run(capsys, "simulate", "--circuit", "deutsch", "--seed", "3")
    rc2, out2, _ = run(capsys, "simulate", "--circuit", "deutsch", "--seed", "3")
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert "| seed | 3 |" in out1


def test_simulate_unknown_circuit(capsys):
    rc, _, err = run(capsys, "simulate", "--circuit", "nosuch")
    assert rc == 1
    assert "nosuch" in err


def test_simulate_unknown_setting(capsys):
    rc, _, err = run(capsys, "simulate", "--circuit", "deutsch", "--setting", "777")
    assert rc == 1


# === histories ===

def test_histories_deutsch(capsys):
    rc, out, _ = run(capsys, "histories", "--circuit", "deutsch", "--setting", "01")
    assert rc == 0
    assert "{01,10} {01,11}" in out  # the query-at-0 paths
    assert "{00,01} {01,10}" in out  # the query-at-1 paths
    assert "| histories | 8 |" in out
    assert "| unjustified | 0 |" in out


def test_histories_grover(capsys):
    rc, out, _ = run(capsys, "histories", "--circuit", "grover2", "--setting", "01")
    assert rc == 0
    assert "| histories | 32 |" in out
    assert "| unjustified | 0 |" in out
    # the path that queries the solution itself is justified by every instance
    assert "| {00,01} {01,10} {01,11} |" in out
    # querying 11 pins the solution down via the {01,11} instance alone
    found = False
    for ln in out.splitlines():
        cells = [c.strip() for c in ln.split("|")]
        if len(cells) > 3 and cells[2] == "11" and "{01,11}" in ln:
            assert "{00,01}" not in ln and "{01,10}" not in ln
            found = True
    assert found


def test_histories_requires_setting(capsys):
    with pytest.raises(SystemExit):
        cli.main(["histories", "--circuit", "deutsch"])
    capsys.readouterr()


# === formats and determinism ===

def test_csv_format_structure(capsys):
    rc, out, _ = run(capsys, "analyze", "--problem", "simon", "--n", "2",
                     "--setting", "0011", "--format", "csv")
    assert rc == 0
    assert "\r\n" in out
    rows = list(csv.reader(io.StringIO(out)))
    assert ["# Run configuration"] in rows
    i = rows.index(["# Knowledge instances at 0011"])
    assert rows[i + 1] == ["subset", "r_value", "delta_e_solution",
                           "delta_h_setting", "depth"]
    data = rows[i + 2:]
    assert ["{0011,0110}", "0.613147192765", "0.584962500721",
            "1.58496250072", "1"] in data


def test_csv_state_dump(capsys):
    rc, out, _ = run(capsys, "simulate", "--circuit", "deutsch", "--setting", "01",
                     "--format", "csv")
    assert rc == 0
    rows = list(csv.reader(io.StringIO(out)))
    i = rows.index(["# Input state"])
    assert rows[i + 1] == ["setting", "argument", "check_bit", "re", "im", "weight"]
    assert rows[i + 2] == ["00", "0", "0", f"{RT2:.15f}", f"{0.0:.15f}", f"{0.25:.15f}"]
    assert rows[i + 3] == ["00", "0", "1", f"{-RT2:.15f}", f"{0.0:.15f}", f"{0.25:.15f}"]


def test_out_file_matches_stdout(tmp_path, capsys):
    rc, out, _ = run(capsys, "analyze", "--problem", "deutsch")
    path = tmp_path / "r.md"
    rc2 = cli.main(["analyze", "--problem", "deutsch", "--out", str(path)])
    capsys.readouterr()
    assert rc == rc2 == 0
    assert path.read_bytes().decode() == out


DETERMINISM_BATTERY = (
    ("analyze", "--problem", "deutsch"),
    ("analyze", "--problem", "simon", "--n", "2", "--setting", "0011",
     "--format", "csv"),
    ("analyze", "--problem", "dj", "--n", "2", "--strategy", "half-table"),
    ("predict", "--problem", "grover", "--n", "4", "--r", "0.5"),
    ("predict", "--problem", "dj", "--n", "2"),
    ("infer-r", "--n-min", "2", "--n-max", "10", "--format", "csv"),
    ("simulate", "--circuit", "deutsch", "--setting", "01", "--check-states"),
    ("simulate", "--circuit", "simon2", "--seed", "5"),
    ("histories", "--circuit", "grover2", "--setting", "01"),
)


def test_reports_are_byte_identical(capsys):
    for argv in DETERMINISM_BATTERY:
        rc1, out1, _ = run(capsys, *argv)
        rc2, out2, _ = run(capsys, *argv)
        assert rc1 == rc2 == 0, argv
        assert out1 == out2, argv
    print(f"{len(DETERMINISM_BATTERY)} commands rendered byte-identically twice")


def test_every_report_carries_the_metric_footnotes(capsys):
    for argv in DETERMINISM_BATTERY:
        _, out, _ = run(capsys, *argv)
        assert "delta_e_solution" in out, argv
        assert "ceil" in out, argv
        assert "policy" in out, argv


def test_no_command_is_an_error(capsys):
    with pytest.raises(SystemExit):
        cli.main([])
    capsys.readouterr()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
