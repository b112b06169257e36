from __future__ import annotations

import csv
import json
from fractions import Fraction

import pytest

from rznk import __version__
from rznk.certify import motzkin_poly
from rznk.cli import main
from rznk.io import bounds_from_dict, cert_from_dict, coeff_table_from_dict, definetti_from_dict, poly_to_dict

DIAG13 = {"field": "complex", "d": 2, "k": 1, "terms": [
    {"alpha": [1, 0], "beta": [1, 0], "re": 1}, {"alpha": [0, 1], "beta": [0, 1], "re": 3}]}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv):
    return main([str(a) for a in argv])


def load(path):
    return json.loads(open(path).read())


def check_meta(data, seed=0):
    m = data["meta"]
    assert m["tool"] == "rznk" and m["version"] == __version__ and m["seed"] == seed
    assert {"mode", "tolerances", "input_hash"} <= set(m)


def test_bounds_real_example(tmp_path):
    out = tmp_path / "b.json"
    assert run(["bounds", "--d", 3, "--k", 3, "--m", "0.1", "--M", "0.2481481", "--real", "--out", out]) == 0
    data = load(out)
    check_meta(data)
    assert (data["n_general"], data["n_improved"], data["n_reznick"], data["n_numeric"]) == (63, 58, 80, 57)
    bounds_from_dict(data)


def test_bounds_rejects_bad_m(tmp_path, capsys):
    assert run(["bounds", "--d", 2, "--k", 1, "--m", "0", "--M", "1"]) == 1


def test_certify_complex(tmp_path):
    inp, out = write(tmp_path / "w.json", DIAG13), tmp_path / "c.json"
    assert run(["certify", "--input", inp, "--m", 1, "--M", 3, "--out", out]) == 0
    data = load(out)
    check_meta(data)
    assert data["n"] == 4 and data["regime"] == "proven" and data["passed"]
    cert = cert_from_dict(data)
    assert cert.residual <= 1e-8


def test_certify_real_auto(tmp_path):
    inp = write(tmp_path / "m.json", poly_to_dict(motzkin_poly(Fraction(1, 2))))
    out = tmp_path / "c.json"
    assert run(["certify", "--input", inp, "--out", out]) == 0
    data = load(out)
    assert data["n"] == 30 and data["diagnostics"]["extrema_source"] == "estimated"


def test_certify_nonpositive_exits_1(tmp_path, capsys):
    inp = write(tmp_path / "m0.json", poly_to_dict(motzkin_poly(0)))
    assert run(["certify", "--input", inp, "--out", tmp_path / "x.json"]) == 1
    assert "not strictly positive" in capsys.readouterr().err


def test_certify_explicit_nonpositive_m(tmp_path, capsys):
    inp = write(tmp_path / "w.json", DIAG13)
    assert run(["certify", "--input", inp, "--m", "-1", "--M", 3]) == 1


def test_certify_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["certify", "--input", bad]) == 1


def test_certify_design_cache_miss(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RZNK_CACHE_DIR", str(tmp_path / "cache"))
    inp = write(tmp_path / "w.json", DIAG13)
    code = run(["certify", "--input", inp, "--m", 1, "--M", 3, "--require-cached-design"])
    assert code == 1 and "cache miss" in capsys.readouterr().err


def test_certify_with_design_file(tmp_path):
    des = tmp_path / "des.json"
    assert run(["design", "--d", 2, "--degree", 5, "--out", des]) == 0
    inp = write(tmp_path / "w.json", DIAG13)
    assert run(["certify", "--input", inp, "--m", 1, "--M", 3, "--design", des, "--out", tmp_path / "c.json"]) == 0


def test_certify_design_too_small(tmp_path, capsys):
    des = tmp_path / "des.json"
    run(["design", "--d", 2, "--degree", 2, "--out", des])
    inp = write(tmp_path / "w.json", DIAG13)
    assert run(["certify", "--input", inp, "--m", 1, "--M", 3, "--design", des]) == 1


def test_certify_below_threshold_empirical(tmp_path):
    inp, out = write(tmp_path / "w.json", DIAG13), tmp_path / "c.json"
    assert run(["certify", "--input", inp, "--m", 1, "--M", 3, "--n", 2, "--out", out]) == 0
    assert load(out)["regime"] == "empirical"


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "--d", "2", "--k", "1", "--m", "1", "--M", "2", "--bogus"])
    assert exc.value.code == 1


def test_unknown_command_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_verify_design_pass_and_fail(tmp_path, capsys):
    des = tmp_path / "des.json"
    run(["design", "--d", 2, "--degree", 3, "--out", des])
    assert run(["verify-design", "--in", des, "--out", tmp_path / "r.json"]) == 0
    bad = load(des)
    for atom in bad["atoms"]:
        atom["w"] *= 1.1
    bad_path = write(tmp_path / "bad.json", bad)
    assert run(["verify-design", "--in", bad_path, "--out", tmp_path / "r2.json"]) == 2


def test_coeffs(tmp_path):
    out = tmp_path / "c.json"
    assert run(["coeffs", "--d", 2, "--k", 1, "--n", 2, "--out", out]) == 0
    t = coeff_table_from_dict(load(out))
    assert t.c == [Fraction(1, 3), Fraction(2, 3)]


def test_definetti(tmp_path):
    out = tmp_path / "d.json"
    assert run(["definetti", "--d", 2, "--k", 2, "--n", 20, "--r", 1, "--out", out]) == 0
    rep = definetti_from_dict(load(out))
    assert rep.eps_exact == Fraction(3, 190)


def test_definetti_bad_args(capsys):
    assert run(["definetti", "--d", 2, "--k", 3, "--n", 3, "--r", 0]) == 1


def test_definetti_sweep(tmp_path):
    grid = write(tmp_path / "g.json", {"d": [2, 3], "k": [1, 2], "n": {"min": 2, "max": 6}})
    out = tmp_path / "s.csv"
    assert run(["definetti-sweep", "--grid", grid, "--out", out]) == 0
    rows = list(csv.DictReader(open(out)))
    assert list(rows[0]) == ["d", "k", "n", "r", "delta", "eps_exact", "eps_bound", "feasible"]
    for r in rows:
        if r["feasible"] == "true":
            assert Fraction(r["eps_exact"]) <= Fraction(r["eps_bound"])


def test_motzkin_csv(tmp_path):
    out = tmp_path / "fig.csv"
    assert run(["motzkin", "--eps-min", 0.01, "--eps-max", 0.5, "--eps-steps", 50, "--n-max", 40, "--out", out]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 50
    for r in rows:
        num, improved, general, reznick = (int(r[c]) for c in ("numeric", "improved", "general", "reznick"))
        assert num <= improved <= general <= reznick
        if r["coeff_threshold_n"]:
            assert int(r["coeff_threshold_n"]) <= num


def test_wick_and_hilbert(tmp_path):
    assert run(["wick", "--d", 2, "--n", 2, "--samples", 50_000, "--out", tmp_path / "w.json"]) == 0
    assert run(["hilbert", "--d", 2, "--n", 3, "--out", tmp_path / "h.json"]) == 0
    assert run(["hilbert", "--d", 3, "--n", 2, "--real", "--samples", 100_000, "--out", tmp_path / "hr.json"]) == 0
    check_meta(load(tmp_path / "h.json"))


def test_wick_limit_is_usage_error(capsys):
    assert run(["wick", "--d", 5, "--n", 1]) == 1


@pytest.mark.parametrize("argv", [
    ["bounds", "--d", 3, "--k", 3, "--m", "0.1", "--M", "0.2481481", "--real"],
    ["certify", "--input", "@W", "--seed", 7],
    ["motzkin", "--eps-min", 0.05, "--eps-max", 0.5, "--eps-steps", 5, "--n-max", 20],
    ["definetti", "--d", 3, "--k", 2, "--n", 30, "--r", 0],
])
def test_determinism(tmp_path, argv):
    inp = write(tmp_path / "w.json", DIAG13)
    argv = [inp if a == "@W" else a for a in argv]
    outs = []
    for i in range(2):
        out = tmp_path / f"o{i}"
        assert run(argv + ["--out", out]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_stdout_output(capsys):
    assert run(["coeffs", "--d", 2, "--k", 1, "--n", 1]) == 0
    data = json.loads(capsys.readouterr().out)
    check_meta(data)


def test_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("RZNK_THREADS", "1")
    assert run(["hilbert", "--d", 2, "--n", 2, "--out", tmp_path / "h.json"]) == 0
