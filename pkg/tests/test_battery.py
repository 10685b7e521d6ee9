import numpy as np
import pytest

from noncolliding.battery import CHECKS, run_battery, separated_points


def test_separated_points():
    rng = np.random.default_rng(0)
    for cplx in (False, True):
        pts = separated_points(rng, 6, -1, 1, 0.2, complex_=cplx)
        d = np.abs(pts[:, None] - pts[None, :])[np.triu_indices(6, 1)]
        assert pts.shape == (6,) and d.min() >= 0.2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_battery_passes(seed):
    rep = run_battery(seed)
    assert [c["name"] for c in rep["checks"]] and len(rep["checks"]) == len(CHECKS)
    for c in rep["checks"]:
        assert c["pass"], c
        assert c["max_rel_err"] <= c["tol"] and c["cases"] > 0
    assert rep["pass"] and rep["seed"] == seed


def test_battery_subset_and_determinism():
    a = run_battery(5, ["cauchy", "ishikawa"])
    b = run_battery(5, ["ishikawa", "cauchy"])
    assert [c["name"] for c in a["checks"]] == ["ishikawa", "cauchy"]
    assert [c["max_rel_err"] for c in a["checks"]] == [c["max_rel_err"] for c in b["checks"]]
    with pytest.raises(KeyError):
        run_battery(0, ["nope"])
