import json
import subprocess
import sys
from fractions import Fraction

import pytest

from coarsewreath.cli import main
from coarsewreath.io import InputError, dumps, jsonable, load_json, parse_instance, parse_metric, parse_points, parse_walls


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_wreath_dist_fixture_prints_six(capsys):
    code, out, _ = run(capsys, "wreath-dist", "fixture:lamplighter_c5", "fixture:c5_points")
    assert code == 0 and out.strip() == "6"


def test_fixture_name_accepts_json_suffix(capsys):
    code, out, _ = run(capsys, "wreath-dist", "fixture:lamplighter_c5.json", "fixture:c5_points.json")
    assert code == 0 and out.strip() == "6"


def test_wreath_dist_matrix(capsys):
    code, out, _ = run(capsys, "wreath-dist", "fixture:lamplighter_c5", "fixture:c5_points", "--all")
    assert code == 0
    assert out.splitlines()[1:] == ["0\t0\t6", "1\t6\t0"]


def test_console_script_missing_file():
    res = subprocess.run([sys.executable, "-m", "coarsewreath.cli", "validate", "/nonexistent.json"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "cannot read" in res.stderr


def test_malformed_json_reports_byte_offset(tmp_path, capsys):
    p = tmp_path / "bad.json"
    # the error sits at character 6 but byte 7, after a two-byte character
    p.write_bytes('{"é": x}'.encode())
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2 and "byte 7" in err and str(p) in err


def test_cap_exceeded_is_machine_readable(capsys):
    code, _, err = run(capsys, "compress", "fixture:lamplighter_p16")
    assert code == 3
    info = json.loads(err)
    assert info["error"] == "cap_exceeded" and info["value"] == 2**16 * 16


def test_dp_cap_exit_code(tmp_path, capsys):
    pts = tmp_path / "p.json"
    pts.write_text(json.dumps({"points": [{"y": 0}, {"lamps": {str(z): 1 for z in range(8)}, "y": 0}]}))
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps({"lamplighter": {"n": 8}}))
    code, _, err = run(capsys, "--dp-cap", "4", "wreath-dist", str(inst), str(pts))
    assert code == 3 and json.loads(err)["kind"] == "dp_support"


def test_validate_violation_exit(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    code, out, _ = run(capsys, "validate", str(p))
    assert code == 1 and json.loads(out)["violations"][0][0] == "triangle"


def test_walls_subcommands(capsys, tmp_path):
    code, out, _ = run(capsys, "walls", "metric", "fixture:walls_c5")
    assert code == 0 and json.loads(out)["dist"]["value"][0] == ["0", "1", "2", "2", "1"]
    code, out, _ = run(capsys, "walls", "decompose", "fixture:k23_metric")
    rep = json.loads(out)
    assert code == 1 and rep["feasible"] is False and rep["verified"] is True
    code, out, _ = run(capsys, "walls", "decompose", "fixture:c5_metric")
    assert code == 0 and json.loads(out)["feasible"]
    csv = tmp_path / "e.csv"
    code, _, _ = run(capsys, "walls", "embed", "fixture:walls_z2", "--csv", str(csv))
    assert code == 0 and csv.read_text().splitlines() == ["point,A0", "0,1", "1,0"]


def test_geometry_and_tsv(capsys, tmp_path):
    t = tmp_path / "lift.tsv"
    code, out, _ = run(capsys, "geometry", "fixture:lamplighter_c5", "--tsv", str(t))
    rep = json.loads(out)
    assert code == 0 and rep["selected"] == "Y-discrete+Z-bounded"
    assert rep["poly_fit"]["provenance"] == "fitted" and rep["deltaY"]["provenance"] == "computed"
    assert t.read_text().splitlines()[0] == "r\ttheta\traw"


def test_embed_and_certify(capsys):
    code, out, _ = run(capsys, "embed-wreath", "fixture:lamplighter_c5", "--sigma", "fixture:walls_z2",
                       "--nu", "cycle", "--mu", "cycle")
    assert code == 0 and json.loads(out)["isometric"]
    code, out, _ = run(capsys, "certify", "fixture:lamplighter_c5", "--nu", "cycle", "--mu", "cycle")
    assert code == 0 and json.loads(out)["ok"]
    code, out, _ = run(capsys, "certify", "fixture:lamplighter_c5", "--nu", "cycle", "--mu", "cycle", "--mutate", "10")
    assert code == 1 and json.loads(out)["violations"]


def test_compress_ball(capsys, tmp_path):
    t = tmp_path / "c.tsv"
    code, out, _ = run(capsys, "--radius", "6", "compress", "fixture:lamplighter_p16", "--mu", "path", "--nu", "path",
                       "--r", "0.5", "--tsv", str(t))
    rep = json.loads(out)
    assert code == 0 and rep["feasible"] and rep["fit"]["provenance"] == "fitted"
    assert t.read_text().startswith("d\tdlambda_min")


def test_boxspace_cli(capsys, tmp_path):
    code, out, _ = run(capsys, "--out", str(tmp_path), "boxspace", "--L", "4")
    assert code == 0
    rep = json.loads((tmp_path / "boxspace.json").read_text())
    assert rep["orders"]["value"] == [8, 64, 2048] and rep["ok"]
    code, _, err = run(capsys, "boxspace", "--chain", "2,3")
    assert code == 2 and "not nested" in err


def test_selftest_subset(capsys, tmp_path):
    code, _, err = run(capsys, "--out", str(tmp_path), "selftest", "--only", "1,3")
    assert code == 0 and err.count("[PASS]") == 2
    rep = json.loads((tmp_path / "selftest.json").read_text())
    assert [c["id"] for c in rep["criteria"]] == [1, 3]


def test_parsers_and_serialisation(tmp_path):
    assert parse_metric({"path": 3}).d(0, 2) == 2
    M = parse_metric({"dist": [[0, "1/2"], ["1/2", 0]]})
    assert M.d(0, 1) == Fraction(1, 2)
    with pytest.raises(InputError):
        parse_metric({"dist": [[0, 0.5], [0.5, 0]]})
    with pytest.raises(InputError):
        parse_walls({"ground": [0, 1]})
    W = parse_instance({"X": {"path": 2}, "Y": {"cycle": 4}, "p": [0, 1, 2, 3], "C": 0})
    assert W.size() == 2**4 * 4
    pts = parse_points([{"lamps": [[1, 1]], "y": 2}], W)
    assert pts[0].lamps == ((1, 1),)
    assert jsonable({"a": Fraction(3, 4), "b": 1 / 3}) == {"a": "3/4", "b": 0.333333333333}
    assert dumps({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'
    with pytest.raises(InputError):
        load_json(tmp_path / "missing.json")
