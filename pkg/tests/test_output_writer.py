"""结果文件写出测试"""

import csv
import json

from src.core.qcore import QPoint
from src.core.qsturm import BoundaryParams, Problem, solve, zero_potential
from src.utils.output_writer import (
    SOLUTION_HEADER, ensure_output_dir, solution_rows, write_csv, write_json,
    write_solution_csv,
)


def test_ensure_output_dir(tmp_path):
    path = ensure_output_dir(str(tmp_path / "a" / "b"))
    assert (tmp_path / "a" / "b").is_dir()
    assert path == str(tmp_path / "a" / "b")


def test_json_is_sorted_with_trailing_newline(tmp_path):
    path = write_json(str(tmp_path / "out.json"), {"b": 1, "a": [1.5, None]})
    text = (tmp_path / "out.json").read_text(encoding="utf-8")
    assert path.endswith("out.json")
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.5, None], "b": 1}


def test_csv_uses_unix_newlines(tmp_path):
    write_csv(str(tmp_path / "t.csv"), ["k", "value"], [["0", "1.0"], ["1", "0.5"]])
    assert (tmp_path / "t.csv").read_bytes() == b"k,value\n0,1.0\n1,0.5\n"


def test_solution_rows(tmp_path, sturm_grid):
    p = zero_potential(sturm_grid)
    phi = solve(p, QPoint(-4), BoundaryParams(0.0, Problem.E1))
    theta = solve(p, QPoint(-4), BoundaryParams(0.0, Problem.E2))
    rows = solution_rows(phi, theta, p)
    assert len(rows) == len(sturm_grid)
    assert rows[0][:2] == ["-10", "1024.0"]
    assert rows[-1][4] == ""
    assert all(row[4] != "" for row in rows[:-2])
    assert all(float(row[4]) >= 0 for row in rows[:-2])

    write_solution_csv(str(tmp_path), 4, rows)
    with open(tmp_path / "solution_K4.csv", newline="", encoding="utf-8") as f:
        assert next(csv.reader(f)) == SOLUTION_HEADER
