import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from piotrowski.cli import EXIT_DATA, EXIT_FIT, EXIT_OK, EXIT_USAGE, parse_range, run

DATA = Path(__file__).parent / "data"
WIETSZY = str(DATA / "wietszy_wiekszy.csv")


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_range():
    assert parse_range("5:20:5") == [5, 10, 15, 20]
    assert parse_range("5:22:5") == [5, 10, 15, 20]
    assert parse_range("10,20") == [10, 20]


def test_validate_reports_first_and_last_forms(tmp_path, capsys):
    assert run(["validate", WIETSZY, "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "first_innovative: 1543" in out
    assert "last_recessive: 1825" in out
    assert "total: 9158" in out


def test_fit_writes_outputs(tmp_path, capsys):
    assert run(["fit", WIETSZY, "--out", str(tmp_path)]) == EXIT_OK
    stem = tmp_path / "wietszy_wiekszy_20w10o"
    fits = rows(f"{stem}_fits.csv")
    weighted = next(r for r in fits if r["weighting"] == "weighted" and r["window"] == "20")
    assert weighted["df"] == "42"
    assert {r["df"] for r in fits} == {"42", "200"}
    assert Path(f"{stem}_bins.csv").read_text().startswith("start,end,midpoint")
    assert Path(f"{stem}.svg").read_text().startswith("<svg")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "fit"
    assert manifest["config"]["window"] == 20
    assert "R2=" in capsys.readouterr().out


def test_fit_single_weighting_without_raw(tmp_path):
    assert run(["fit", WIETSZY, "--weighted", "--no-raw-yearly", "--window", "50", "--overlap", "20",
                "--out", str(tmp_path)]) == EXIT_OK
    fits = rows(tmp_path / "wietszy_wiekszy_50w20o_fits.csv")
    assert [(r["weighting"], r["window"], r["overlap"]) for r in fits] == [("weighted", "50", "20")]


def test_failed_fit_exit_code(tmp_path, capsys):
    short = tmp_path / "short.csv"
    short.write_text("year,recessive,innovative\n1600,4,1\n1605,1,4\n")
    assert run(["fit", str(short), "--no-raw-yearly", "--out", str(tmp_path)]) == EXIT_FIT
    assert "FAILED" in capsys.readouterr().out


def test_poly_and_split(tmp_path):
    abo = str(DATA / "abo_albo.csv")
    assert run(["poly", abo, "--degree", "3", "--out", str(tmp_path)]) == EXIT_OK
    fits = rows(tmp_path / "abo_albo_20w10o_poly3_fits.csv")
    assert {r["degree"] for r in fits} == {"1", "3"}
    assert run(["split", abo, "--at", "1610", "--out", str(tmp_path)]) == EXIT_OK
    fits = rows(tmp_path / "abo_albo_20w10o_split1610_fits.csv")
    assert [r["change"] for r in fits] == ["abo_albo_before_1610"] * 2 + ["abo_albo_from_1610"] * 2
    assert (tmp_path / "abo_albo_20w10o_split1610.svg").exists()


def test_grid_and_table(tmp_path):
    files = [str(DATA / f"{n}.csv") for n in ("na_naj", "ir_er")]
    assert run(["grid", *files, "--windows", "20,50", "--overlaps", "5,20", "--threads", "1",
                "--out", str(tmp_path)]) == EXIT_OK
    grid = rows(tmp_path / "grid.csv")
    assert [(r["change"], r["window"], r["overlap"]) for r in grid] == [
        ("na_naj", "20", "5"), ("na_naj", "50", "5"), ("na_naj", "50", "20"),
        ("ir_er", "20", "5"), ("ir_er", "50", "5"), ("ir_er", "50", "20"),
    ]
    assert (tmp_path / "grid_20o.svg").exists()
    assert not (tmp_path / "grid_10o.svg").exists()
    assert run(["table", str(tmp_path / "grid.csv"), "--out", str(tmp_path)]) == EXIT_OK
    table = rows(tmp_path / "table1.csv")
    assert [r["change"] for r in table] == ["na_naj", "ir_er"]
    assert all(len(r["w50/o20"]) == 5 for r in table)


def test_empty_grid_warns_and_succeeds(tmp_path, capsys):
    with pytest.warns(UserWarning):
        code = run(["grid", WIETSZY, "--windows", "5", "--overlaps", "10", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert "empty grid" in capsys.readouterr().err
    assert (tmp_path / "grid.csv").read_text().startswith("change,window")


def test_composite(tmp_path):
    files = [str(DATA / f"{n}.csv") for n in ("bych_bym", "bychmy_bysmy")]
    assert run(["composite", *files, "--out", str(tmp_path)]) == EXIT_OK
    offsets = rows(tmp_path / "composite_offsets.csv")
    assert {(r["change_a"], r["change_b"]) for r in offsets} == {
        ("bych_bym", "bychmy_bysmy"), ("bychmy_bysmy", "bych_bym")}
    assert (tmp_path / "composite.svg").exists()


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["fit", WIETSZY, "--window", "10", "--overlap", "10"],
    ["poly", WIETSZY, "--degree", "1"],
    ["grid", WIETSZY, "--windows", "a:b"],
    ["composite", WIETSZY],
])
def test_usage_errors(tmp_path, argv):
    if argv and argv[0] != "bogus":
        argv = [*argv, "--out", str(tmp_path)]
    assert run(argv) == EXIT_USAGE


def test_data_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("year,recessive,innovative\n1600,x,1\n")
    assert run(["fit", str(bad), "--out", str(tmp_path)]) == EXIT_DATA
    assert run(["validate", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == EXIT_DATA
    assert run(["split", WIETSZY, "--at", "1300", "--out", str(tmp_path)]) == EXIT_DATA


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "piotrowski", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().startswith("piotrowski ")
