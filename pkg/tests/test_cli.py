import json

import pytest

from chowlab.cli import main


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_measure(tmp_path, capsys):
    poly = write(tmp_path, "f.txt", "x0 + x1")
    code, out = run(capsys, ["measure", "--poly", poly, "--samples", "5000", "--seed", "1"])
    data = json.loads(out)
    assert code == 0 and data["samples"] == 5000 and data["stderr"] > 0


def test_hilbert(tmp_path, capsys):
    conic = write(tmp_path, "conic.json",
                  {"type": "hypersurface", "poly": "x0 x2 - x1^2", "nvars": 3})
    code, out = run(capsys, ["hilbert", "--variety", conic, "--m", "2", "--weights", "1/2,0,1/2"])
    data = json.loads(out)
    assert code == 0 and data["H"] == 5 and data["s"] == "4"


def test_chow(tmp_path, capsys):
    conic = write(tmp_path, "conic.json",
                  {"type": "hypersurface", "poly": "x0 x2 - x1^2", "nvars": 3})
    code, out = run(capsys, ["chow", "--variety", conic, "--weights", "1,0,0"])
    data = json.loads(out)
    assert data["e"] == "2" and data["E_contribution"] == "1/2" and data["degree"] == 2


def test_theight(tmp_path, capsys):
    p1 = write(tmp_path, "p1.json", {"type": "projective_space", "n": 1})
    weights = write(tmp_path, "w.json", {"inf": [1, 0]})
    code, out = run(capsys, ["theight", "--variety", p1, "--weights", weights,
                             "--Q-log", "3", "--point", "2,1", "--transfer", "1/2"])
    data = json.loads(out)
    assert code == 0 and data["E_Y"] == "1/2"
    assert data["log_H"]["rational"] == "3" and data["log_H"]["prime_part"] == {"2": "1"}
    assert data["transfer"]["status"] == "pass"


def test_bounds(capsys):
    code, out = run(capsys, ["bounds", "--n", "1", "--delta", "1", "--D", "1"])
    data = json.loads(out)
    assert data["A2"] == "126" and data["B2"] == "7" and data["B2_identity"]


def test_census(tmp_path, capsys):
    cfg = write(tmp_path, "pell.json", {
        "name": "pell", "variety": {"type": "projective_space", "n": 1},
        "systems": {"inf": ["x0^2 - 2 x1^2", "x1"]}, "delta": "1/2", "height_bound": 100})
    out_dir = tmp_path / "out"
    code, out = run(capsys, ["census", "--config", cfg, "--out", str(out_dir)])
    assert code == 0
    assert (out_dir / "pell.json").exists() and (out_dir / "pell_solutions.tsv").exists()
    report = json.loads((out_dir / "pell.json").read_text())
    assert report["summary"]["nontrivial_solutions"] == 0


def test_census_bad_config(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", {"variety": {"type": "projective_space", "n": 1},
                                       "systems": {"inf": ["x0"]}, "delta": "1/2",
                                       "height_bound": 10})
    assert main(["census", "--config", cfg]) == 3
    assert main(["census", "--config", str(tmp_path / "missing.json")]) == 3


def test_bad_variety_file(tmp_path):
    bad = write(tmp_path, "v.json", {"type": "grassmannian"})
    assert main(["hilbert", "--variety", bad, "--m", "2"]) == 3
