import csv
import json

import pytest

from rnms.algebra import lambda_value
from rnms.cli import main, parse_p


def _rows(path):
    lines = [ln for ln in open(path).read().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _header(path):
    first = open(path).readline()
    assert first.startswith("# ")
    return json.loads(first[2:])


def test_entropy_table(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["entropy", "--m-max", "50", "--tol", "1e-10", "--out", str(out)]) == 0
    rows = _rows(out)
    assert len(rows) == 50
    assert all(float(r["H_m"]) > 0 for r in rows)
    cfg = _header(out)
    assert cfg["command"] == "entropy" and cfg["version"] and cfg["params"]["m_max"] == 50
    assert "natural" in open(out).read()


def test_frequencies(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["frequencies", "--m", "1", "--ell", "2", "--p", "0.5,0.5", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [r["word"] for r in rows] == ["aa", "ab", "ba", "bb"]
    assert sum(float(r["frequency"]) for r in rows) == pytest.approx(1, abs=1e-9)
    out2 = tmp_path / "g.csv"
    assert main(["frequencies", "--m", "1", "--ell", "2", "--method", "empirical", "--out", str(out2)]) == 0
    assert sum(float(r["frequency"]) for r in _rows(out2)) == pytest.approx(1, abs=1e-9)


def test_diffract_has_root_row(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["diffract", "--p", "0.5,0.5", "--n", "6", "--k-range", "0:3.5:0.001", "--out", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["k", "pp", "ac"]
    root = [r for r in rows if abs(float(r["k"]) - lambda_value(1)) < 1e-9]
    assert root and float(root[0]["ac"]) == pytest.approx(0, abs=1e-9)
    assert len(rows) >= 3501


def test_outputs_are_byte_identical(tmp_path):
    for args in (
        ["patch", "--m", "2", "--p", "0.2,0.3,0.5", "--steps", "5", "--seed", "17"],
        ["generate", "--m", "1", "--steps", "8", "--seed", "3"],
        ["mc-validate", "--k", "0.37", "--n", "5", "--samples", "2000", "--seed", "5"],
        ["diffract", "--k-range", "0:1:0.05", "--format", "json"],
    ):
        out = tmp_path / "run.out"
        main(args + ["--out", str(out)])
        first = out.read_bytes()
        out.unlink()
        main(args + ["--out", str(out)])
        assert out.read_bytes() == first


def test_patch_then_window_check(tmp_path):
    pts = tmp_path / "pts.csv"
    assert main(["patch", "--m", "1", "--p", "0.5,0.5", "--steps", "10", "--seed", "2", "--out", str(pts)]) == 0
    rows = _rows(pts)
    assert list(rows[0])[:3] == ["index", "float_position", "star_position"]
    rep = tmp_path / "rep.csv"
    assert main(["window-check", "--m", "1", "--input", str(pts), "--out", str(rep)]) == 0
    assert _rows(rep)[0]["all_inside"] == "true"
    # a deterministic window is too small for a random patch: validation failure
    assert main(["window-check", "--m", "1", "--i", "0", "--seed-word", "aa", "--input", str(pts), "--out", str(rep)]) == 2
    assert _rows(rep)[0]["all_inside"] == "false"


def test_window_check_float_columns(tmp_path):
    pts = tmp_path / "pts.csv"
    pts.write_text("index,float_position,star_position\n0,0,0.5\n1,1,3.0\n")
    assert main(["window-check", "--m", "1", "--input", str(pts), "--out", str(tmp_path / "r.csv")]) == 2


def test_diffract_det(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["diffract-det", "--m", "2", "--i", "1", "--k-list", "0:0,1:1", "--out", str(out)]) == 0
    rows = _rows(out)
    assert float(rows[0]["intensity"]) == pytest.approx(0.25)
    out = tmp_path / "e.csv"
    assert main(["diffract-det", "--m", "1", "--i", "0", "--seed-word", "ab", "--coeff-max", "2", "--out", str(out)]) == 0
    assert all(float(r["k"]) >= 0 for r in _rows(out))


def test_mc_validate(tmp_path):
    out = tmp_path / "mc.csv"
    assert main(["mc-validate", "--k", "0.37", "--n", "6", "--samples", "20000", "--seed", "1", "--out", str(out)]) == 0
    text = open(out).read()
    assert "agreement: pass" in text
    assert {r["quantity"] for r in _rows(out)} == {"mean_re", "mean_im", "var"}


def test_json_format(tmp_path):
    out = tmp_path / "f.json"
    assert main(["frequencies", "--m", "2", "--ell", "1", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"] == ["word", "frequency"] and len(doc["rows"]) == 2
    assert doc["config"]["command"] == "frequencies"


def test_stdout(capsys):
    assert main(["generate", "--m", "2", "--steps", "2", "--seed", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# {") and "left,right,length" in out


def test_usage_errors(capsys):
    assert main(["diffract", "--p", "0.5,0.6"]) == 1
    assert main(["frequencies", "--m", "2", "--ell", "2", "--p", "0.5,0.5"]) == 1
    assert main(["diffract", "--k-range", "1:0:0.1"]) == 1
    assert main(["window-check", "--m", "2", "--i", "0", "--input", "/dev/null"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["entropy", "--m-max", "3", "--unknown"])
    assert exc.value.code == 1


def test_parse_p():
    assert [float(q) for q in parse_p("1/3,1/3,1/3")] == pytest.approx([1 / 3] * 3)
    assert sum(parse_p("0.3333333333,0.6666666667")) == 1
    with pytest.raises(Exception):
        parse_p("a,b")
