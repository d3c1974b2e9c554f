import json

import pytest

from knopp.cli import RunConfig, main
from knopp.core import Alpha


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", "--point", "rational:1/3", "--alpha", "1/2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["defaults"]["rtol"] == 1e-3 and doc["defaults"]["norm"] == "sup"
    assert doc["defaults"]["alpha"] == "1/2"


def test_eval_csv_value(capsys):
    code, out, _ = run(capsys, "eval", "--point", "dyadic:1/2^1", "--format", "csv")
    assert code == 0
    row = out.strip().split("\n")[1].split(",")
    assert float(row[2]) == 0.5 and float(row[3]) == 0.5


def test_eval_third(capsys):
    code, out, _ = run(capsys, "eval", "--point", "rational:1/3", "--format", "csv")
    lo, hi = map(float, out.strip().split("\n")[1].split(",")[2:4])
    assert lo <= 1.1380711874576983496 <= hi


@pytest.mark.parametrize("argv", [
    ["eval", "--point", "dyadic:3/2^1"],
    ["eval", "--point", "rational:1/x"],
    ["eval"],
    ["eval", "--point", "rational:1/3", "--alpha", "1.5"],
    ["eval", "--point", "rational:1/3", "--rtol", "0"],
    ["exponents", "--point", "rational:1/3", "--kmin", "9", "--kmax", "8"],
    ["extrema-scan", "--depth", "17"],
])
def test_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:") and out == ""


@pytest.mark.parametrize("spec,kind", [
    ("smax:3:2:1", "LocalMax"),
    ("rational:2/3", "GlobalMax"),
    ("dyadic:5/2^4", "LocalMin"),
    ("dyadic:0/2^0", "GlobalMin"),
    ("rule:r=2", "NotExtremum"),
])
def test_classify(capsys, spec, kind):
    code, out, _ = run(capsys, "classify", "--point", spec, "--format", "json")
    assert code == 0
    assert json.loads(out)["extremum"] == kind


def test_classify_undecided(capsys):
    code, out, _ = run(capsys, "classify", "--point", "bits:0.0101", "--format", "json")
    assert code == 0 and json.loads(out)["undecided"] is True


def test_extrema_scan_csv_repeatable(capsys, tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "extrema-scan", "--depth", "3", "--alpha", "0.3", "--format", "csv", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().strip().split("\n")
    assert len(lines) == 1 + 15
    assert lines[1].startswith("0,0,0,")


def test_exponents_csv_repeatable(capsys):
    argv = ["exponents", "--point", "dyadic:1/2^1", "--kmin", "4", "--kmax", "8", "--format", "csv"]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    assert first.startswith("side,k,r,")


def test_boxdim_table(capsys):
    code, out, _ = run(capsys, "boxdim", "--kmin", "4", "--kmax", "10")
    assert code == 0 and "slope" in out


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(Alpha("1/2"), None, 6, 6, 1e-3, None, 0, "table")
    with pytest.raises(ValueError):
        RunConfig(Alpha("1/2"), None, 6, 8, 1e-3, 0.5, 0, "table")
    cfg = RunConfig(Alpha("1/2"), "rational:1/3", 6, 20, 1e-3, None, 0, "json")
    assert cfg.header()["kmin"] == 6 and cfg.header()["seed"] == 0
