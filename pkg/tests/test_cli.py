import json
import subprocess
import sys
from importlib import resources

import pytest

from quatlattice.cli import GramParseError, format_gram, main, read_gram

DATA = resources.files("quatlattice") / "data"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_construct_quadratic_5(capsys):
    code, out, _ = run(capsys, "construct", "quadratic", "5", "--no-timing")
    assert code == 0
    rec = json.loads(out)
    assert rec["report"]["classification"] == "E8"
    assert rec["report"]["center_density"] == "1/16"
    assert rec["gram"] == read_gram(str(DATA / "e8_sqrt5.gram"))
    assert rec["det_via_formula"] == rec["gram_det"] == "1"
    assert float(rec["max_relative_deviation"]) <= 1e-9
    assert "timing" not in rec


def test_construct_is_byte_identical(capsys):
    _, a, _ = run(capsys, "construct", "quadratic", "13", "--method", "family", "--no-timing")
    _, b, _ = run(capsys, "construct", "quadratic", "13", "--method", "family", "--no-timing")
    assert a == b
    assert json.dumps(json.loads(a), sort_keys=True) == a.strip()


def test_construct_non_squarefree_exits_1(capsys):
    code, out, err = run(capsys, "construct", "quadratic", "12")
    assert code == 1
    assert "D not squarefree" in err
    assert out == ""


def test_construct_unsupported_quartic_exits_1(capsys):
    code, _, err = run(capsys, "construct", "quartic", "8")
    assert code == 1 and err.startswith("error:")


def test_construct_text_and_roundtrip(capsys, tmp_path):
    gram_file = tmp_path / "m20.gram"
    code, out, _ = run(capsys, "construct", "quartic", "20", "--no-timing",
                       "--gram-out", str(gram_file))
    assert code == 0
    built = json.loads(out)
    assert built["report"]["classification"] == "BarnesWall16"
    code, out, _ = run(capsys, "analyze", str(gram_file))
    assert code == 0
    assert json.loads(out)["report"] == built["report"]


def test_text_format_is_integer_rows(capsys):
    code, out, _ = run(capsys, "construct", "quadratic", "5", "--format", "text")
    lines = out.strip().split("\n")
    assert lines[0] == "8"
    assert all(len(line.split()) == 8 for line in lines[1:])
    assert out == format_gram(read_gram(str(DATA / "e8_sqrt5.gram")))


def test_analyze_fixtures(capsys):
    code, out, _ = run(capsys, "analyze", str(DATA / "bw16_m20.gram"))
    rep = json.loads(out)["report"]
    assert (rep["det"], rep["min_norm"], rep["kissing"], rep["classification"]) == \
        ("256", 4, 4320, "BarnesWall16")
    code, out, _ = run(capsys, "analyze", str(DATA / "e8_sqrt5.gram"))
    rep = json.loads(out)["report"]
    assert (rep["det"], rep["min_norm"], rep["classification"]) == ("1", 2, "E8")


def test_analyze_identity(capsys, tmp_path):
    p = tmp_path / "id.gram"
    p.write_text("8\n" + "".join(" ".join("1" if i == j else "0" for j in range(8)) + "\n"
                                for i in range(8)))
    code, out, _ = run(capsys, "analyze", str(p))
    rep = json.loads(out)["report"]
    assert (rep["det"], rep["min_norm"], rep["even"], rep["classification"]) == ("1", 1, False, "Other")


@pytest.mark.parametrize("content", ["", "2\n1 0\n", "2\n1 x\n0 1\n", "2 2\n1 0\n0 1\n"])
def test_gram_parse_errors(tmp_path, content):
    p = tmp_path / "bad.gram"
    p.write_text(content)
    with pytest.raises(GramParseError):
        read_gram(str(p))


def test_analyze_rejects_indefinite(capsys, tmp_path):
    p = tmp_path / "indef.gram"
    p.write_text("2\n1 2\n2 1\n")
    code, _, err = run(capsys, "analyze", str(p))
    assert code == 1 and "positive definite" in err


def test_scan_lines(capsys):
    code, out, _ = run(capsys, "scan", "quadratic", "--smax", "9", "--no-timing")
    recs = [json.loads(line) for line in out.strip().split("\n")]
    assert [r["parameter"] for r in recs] == [1, 3, 5, 7, 9]
    assert all(r["status"] == "verified" for r in recs)


def test_constants(capsys):
    code, out, err = run(capsys, "constants", "--P", "100000")
    rec = json.loads(out)
    assert abs(float(rec["tau"]) - 0.046602493) < 1e-9
    assert "tau = 0.046602493" in err


def test_precision_env(capsys, monkeypatch):
    monkeypatch.setenv("QUATLATTICE_PRECISION", "200")
    code, out, _ = run(capsys, "construct", "quadratic", "5", "--no-timing")
    assert json.loads(out)["precision_bits"] == 200
    code, _, _ = run(capsys, "construct", "quadratic", "5", "--precision", "32")
    assert code == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quatlattice.cli", "construct", "quadratic", "12"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert "D not squarefree" in proc.stderr
