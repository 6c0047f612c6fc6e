import json
import subprocess
import sys

import pytest

from lipsel.cli import CSV_COLUMNS, run, run_bench, to_json


def _call(tmp_path, capsys, name, payload, *extra):
    path = tmp_path / "in.json"
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    code = run([name, str(path), *extra])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_select_two_flats(tmp_path, capsys):
    payload = {
        "space": {"dist": [[0, 1], [1, 0]]},
        "flats": [{"base": [0, 0], "basis": [[1, 0]]}, {"base": [0, 1]}],
        "k": 1,
    }
    code, out, _ = _call(tmp_path, capsys, "select", payload)
    assert code == 0
    res = json.loads(out)
    assert res["schema_version"] == "1.0" and res["command"] == "select"
    assert res["points"][1] == [0.0, 1.0] and res["points"][0][1] == 0.0
    assert res["seminorm"] >= 1.0 - 1e-9 and res["validation"]["membership_ok"]


def test_select_cube_with_infinite_radius(tmp_path, capsys):
    payload = {"space": {"dist": [[0, 1], [1, 0]]}, "centers": [[0.5], [2.5]], "radii": [0.5, "inf"]}
    code, out, _ = _call(tmp_path, capsys, "select-cube", payload)
    assert code == 0
    res = json.loads(out)
    assert res["points"] == [[1.0], [2.0]] and res["seminorm"] <= 1.0


def test_whitney_affine(tmp_path, capsys):
    payload = {"X": [[0], [1], [2]], "f": [1, 3, 5], "omega": {"kind": "power", "alpha": 1}}
    code, out, _ = _call(tmp_path, capsys, "whitney", payload)
    assert code == 0
    res = json.loads(out)
    assert res["report"]["jet_seminorm"] <= 1e-7
    assert res["g"] == [[2.0], [2.0], [2.0]]


def test_whitney_obstruction_exits_2(tmp_path, capsys):
    payload = {"X": [[0, 0], [0.01, 0], [1, 0], [0, 1]], "f": [0, 1, 0, 0],
               "omega": {"kind": "capped-power", "alpha": 1, "cap": 1}}
    code, out, _ = _call(tmp_path, capsys, "whitney", payload, "--scale", "1")
    assert code == 2
    assert json.loads(out)["subset"] == [0, 1]


def test_extend_c11_and_kirszbraun(tmp_path, capsys):
    c11 = {"X": [[-1], [1]], "f": [1, 1], "g": [[-2], [2]], "M": 3, "queries": [[-1], [0.5]]}
    code, out, _ = _call(tmp_path, capsys, "extend-c11", c11)
    assert code == 0
    assert json.loads(out)["values"][0] == pytest.approx(1.0, abs=1e-6)
    code, out, _ = _call(tmp_path, capsys, "kirszbraun", {"X": [[0], [1]], "f": [0, 1], "M": 1, "queries": [[0.5]]})
    assert code == 0
    assert json.loads(out)["values"][0][0] == pytest.approx(0.5, abs=1e-9)


def test_missing_M_needs_flag(tmp_path, capsys):
    payload = {"X": [[0], [1]], "f": [0, 1], "queries": [[0.5]]}
    code, _, err = _call(tmp_path, capsys, "kirszbraun", payload)
    assert code == 1 and "--auto-M" in err
    code, out, _ = _call(tmp_path, capsys, "kirszbraun", payload, "--auto-M")
    assert code == 0 and json.loads(out)["M"] == pytest.approx(1.0)


def test_linsys_inconsistent_point_exits_2(tmp_path, capsys):
    payload = {"X": [[0], [1]], "A": [[[1, 1]], [[0, 0]]], "b": [[1], [1]],
               "omega": {"kind": "capped-power", "alpha": 0.5, "cap": 1}}
    code, out, _ = _call(tmp_path, capsys, "linsys", payload)
    assert code == 2
    assert json.loads(out)["subset"] == [1]


def test_oracle_on_jets(tmp_path, capsys):
    code, out, _ = _call(tmp_path, capsys, "oracle", {"X": [[0], [1]], "f": [0, 1], "max_card": 2})
    assert code == 0
    assert json.loads(out)["jet_subset_max"] == pytest.approx(2.0)


def test_malformed_json_reports_position(tmp_path, capsys):
    code, _, err = _call(tmp_path, capsys, "whitney", '{"X": [[0],[1]], "f": [0,1')
    assert code == 1
    assert "line 1" in err and "column" in err


def test_bad_field_and_missing_file(tmp_path, capsys):
    code, _, err = _call(tmp_path, capsys, "whitney", {"X": [[0], [1]]})
    assert code == 1 and "'f'" in err
    assert run(["whitney", str(tmp_path / "nope.json")]) == 1


def test_usage_errors_exit_1(capsys):
    assert run(["no-such-command"]) == 1
    assert run(["bench", "no-such-suite", "--count", "1"]) == 1
    assert run(["bench", "selection-ratio", "--sizes", ""]) == 1
    assert run(["bench", "selection-ratio", "--threads", "0"]) == 1


def test_bench_is_deterministic_and_shaped(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["bench", "selection-ratio", "--count", "6", "--seed", "3", "--output", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 1 + 6 + 1 and lines[-1].startswith("summary")


def test_bench_timing_column():
    text = run_bench("finiteness", 0, [3], 2, timing=True)
    assert text.splitlines()[0].endswith(",wall_time")


def test_json_numbers_round_trip():
    x = 0.1 + 0.2
    assert float(json.loads(to_json({"x": x}))["x"]) == x
    assert to_json({"b": float("inf"), "a": [1, True]}) == '{"a": [1, true], "b": "inf"}'


def test_module_entry_point(tmp_path):
    path = tmp_path / "in.json"
    path.write_text(json.dumps({"X": [[0], [1]], "f": [0, 1], "M": 1, "queries": [[0.25]]}))
    proc = subprocess.run([sys.executable, "-m", "lipsel", "kirszbraun", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["values"][0][0] == pytest.approx(0.25)
