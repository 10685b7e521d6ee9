import json

import numpy as np
import pytest

from noncolliding import cli
from noncolliding.cli import UsageError, dumps, parse_alpha, parse_grid, parse_rows, run


def _run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


# -- parsing helpers --------------------------------------------------------------------


def test_parse_alpha():
    np.testing.assert_array_equal(parse_alpha("0,1"), [0, 1])
    np.testing.assert_array_equal(parse_alpha("0.3-2i, 1e-1+0.5i,-2,3i"), [0.3 - 2j, 0.1 + 0.5j, -2, 3j])
    with pytest.raises(UsageError):
        parse_alpha("1,abc")


def test_parse_grid_and_rows():
    np.testing.assert_allclose(parse_grid("-2:2:5"), [-2, -1, 0, 1, 2])
    np.testing.assert_allclose(parse_grid("0.5,1.5"), [0.5, 1.5])
    np.testing.assert_allclose(parse_rows("0,1;2,3"), [[0, 1], [2, 3]])
    with pytest.raises(UsageError):
        parse_rows("0,1;2")


def test_dumps_float_and_complex_format():
    text = dumps({"a": 0.1, "b": 1 / 3, "c": 1 + 2j, "d": float("nan"), "e": np.array([1.0, 2.5]), "f": True})
    back = json.loads(text)
    assert back["a"] == 0.1 and back["b"] == 1 / 3 and back["c"] == [1.0, 2.0]
    assert back["d"] is None and back["e"] == [1.0, 2.5] and back["f"] is True
    assert "0.33333333333333331" in text


# -- subcommands --------------------------------------------------------------------------


def test_charpoly_example(capsys):
    code, rep = _run_json(capsys, ["charpoly", "--ensemble", "gue", "--n-matrix", "1", "--sigma2", "1", "--alpha", "0,1"])
    assert code == 0 and rep["estimate"] == pytest.approx(1.0, rel=1e-14)


def test_charpoly_with_monte_carlo(capsys):
    argv = ["charpoly", "--ensemble", "chgue", "--N", "1", "--nu", "0", "--sigma2", "0.5", "--alpha", "0,1", "--samples", "20000", "--seed", "3"]
    code, rep = _run_json(capsys, argv)
    assert code == 0 and rep["pass"] and rep["closed_form"] == pytest.approx(1.0)
    assert set(rep["mc"]) == {"estimate", "stderr", "samples", "seed"} and rep["mc"]["seed"] == 3
    code, rep = _run_json(capsys, ["charpoly", "--ensemble", "gue", "--N", "1", "--alpha", "0", "--samples", "1000"])
    assert code == 0 and "closed_form" not in rep and rep["estimate"] == rep["mc"]["estimate"]


def test_charpoly_odd_alpha_without_samples_is_usage_error(capsys):
    assert run(["charpoly", "--ensemble", "gue", "--N", "1", "--alpha", "0"]) == 2
    assert "error" in capsys.readouterr().err


def test_sample_is_byte_identical(capsys):
    argv = ["sample", "--ensemble", "chgue", "--nu", "-0.5", "--N", "2", "--seed", "7"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first
    assert first.splitlines()[0] == "index,x_1,x_2"


def test_sample_hex_seed_env_and_file(capsys, tmp_path, monkeypatch):
    assert run(["sample", "--ensemble", "gue", "--N", "3", "--samples", "4", "--seed", "0x1f"]) == 0
    hexed = capsys.readouterr().out
    assert run(["sample", "--ensemble", "gue", "--N", "3", "--samples", "4", "--seed", "31"]) == 0
    assert capsys.readouterr().out == hexed
    monkeypatch.setenv("RMT_SEED", "31")
    out = tmp_path / "s.csv"
    assert run(["sample", "--ensemble", "gue", "--N", "3", "--samples", "4", "--out", str(out)]) == 0
    assert out.read_text() == hexed


def test_kernel_csv(capsys):
    assert run(["kernel", "--family", "bm", "--N", "2", "--t", "1", "--x=-1:1:3", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,y,K" and len(lines) == 4
    from noncolliding.biorth import ext_hermite_kernel

    x, y, k = map(float, lines[1].split(","))
    assert x == y == -1.0 and k == pytest.approx(ext_hermite_kernel(2, 1.0, -1.0, -1.0), rel=1e-15)
    assert run(["kernel", "--family", "besq", "--N", "2", "--nu", "0.5", "--t", "1", "--x", "0.5,1", "--y", "2,3", "--atoms", "0.2,1.0"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_simulate_csv_and_manifest(capsys, tmp_path):
    man = tmp_path / "m.json"
    assert run(["simulate", "--family", "bm", "--N", "2", "--times", "0.5,1", "--samples", "3", "--seed", "1", "--manifest", str(man)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,x_1,x_2" and len(lines) == 1 + 3 * 3
    m = json.loads(man.read_text())
    assert m["method"] == "matrix" and m["seed"] == 1 and m["n_paths"] == 3
    argv = ["simulate", "--family", "bm", "--N", "2", "--method", "euler", "--dt", "0.01", "--times", "0.1,0.2", "--warm-start", "0.01", "--format", "json"]
    code, rep = _run_json(capsys, argv)
    assert code == 0 and rep["manifest"]["warm_start"] == 0.01 and np.asarray(rep["paths"]).shape == (1, 3, 2)
    assert run(["simulate", "--family", "bm", "--N", "2", "--method", "euler", "--times", "0.1"]) == 2


def test_verify_onepoint_single_particle(capsys):
    code, rep = _run_json(capsys, ["verify", "onepoint", "--family", "bm", "--N", "1", "--t", "0.5", "--samples", "20000", "--seed", "2"])
    assert code == 0 and rep["pass"] is True and rep["op"] == "onepoint"
    assert {"op", "params", "grid", "estimates", "closed_form", "stderr", "z", "pass"} <= set(rep)


def test_verify_csv_and_aliases(capsys):
    argv = ["verify", "det-block", "--family", "bm", "--N", "2", "--t", "0.5", "--points=-1,0.5;0.2,1.5", "--samples", "20000", "--format", "csv"]
    assert run(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "g_1,g_2,estimate,closed_form,stderr,z" and len(lines) == 3
    assert run(["verify", "det_block", "--family", "bm", "--N", "2", "--t", "0.5"]) == 2


def test_failed_report_exit_code(capsys, monkeypatch):
    code, rep = _run_json(capsys, ["identities", "--checks", "cauchy", "--seed", "1"])
    assert code == 0 and rep["pass"] and rep["checks"][0]["name"] == "cauchy"
    monkeypatch.setattr(cli, "run_battery", lambda seed, names: {"seed": seed, "checks": [], "pass": False})
    code, rep = _run_json(capsys, ["identities"])
    assert code == 1 and rep["pass"] is False


def test_identities_csv(capsys):
    assert run(["identities", "--format", "csv", "--checks", "bridges,ishikawa"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name,cases,max_rel_err,tol,pass,seconds" and len(lines) == 3


def test_usage_errors(capsys):
    assert run([]) == 2
    assert run(["sample", "--ensemble", "goe", "--N", "2"]) == 2
    assert run(["sample", "--ensemble", "gue", "--N", "2", "--seed", "xyz"]) == 2
    assert run(["identities", "--checks", "nope"]) == 2
    assert run(["charpoly", "--ensemble", "gue", "--N", "1", "--alpha", "0.5,0.5"]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "identities" in capsys.readouterr().out
