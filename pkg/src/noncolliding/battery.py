"""Battery of deterministic identity checks.

Each check draws random inputs from a seeded stream, evaluates both sides of
an identity and records the worst relative discrepancy.  ``run_battery``
returns a JSON-ready summary; the CLI ``identities`` subcommand prints it.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .biorth import h_plus_det
from .charpoly import m_class, m_gue_monic_form, m_gue_pair_form, m_nu_monic_form, m_nu_pair_form
from .densities import km_det_besq, km_det_bm
from .detkit import cauchy_closed_form, cauchy_det, ishikawa_both_sides, rel_err, vandermonde_product
from .ensembles import stream_rng
from .specfun import PolyFamily, christoffel_darboux, hermite, laguerre

__all__ = ["CHECKS", "run_battery", "separated_points"]

NU_VALUES = (-0.5, 0.0, 0.5, 1.0, 2.3)


def separated_points(rng, n, low, high, min_sep, complex_=False):
    """``n`` points in a box with pairwise distance at least ``min_sep`` (rejection sampling)."""
    while True:
        pts = rng.uniform(low, high, n)
        if complex_:
            pts = pts + 1j * rng.uniform(low, high, n)
        d = np.abs(pts[:, None] - pts[None, :])
        if n < 2 or np.min(d[np.triu_indices(n, 1)]) >= min_sep:
            return pts


def _result(name, errors, tol):
    worst = float(np.max(errors)) if len(errors) else 0.0
    return {"name": name, "cases": len(errors), "max_rel_err": worst, "tol": tol, "pass": bool(worst <= tol)}


def check_ishikawa(rng, draws=200):
    errs = []
    for _ in range(draws):
        n = int(rng.integers(1, 5))
        pts = separated_points(rng, 2 * n, -2, 2, 0.1, complex_=True)
        x, y = pts[:n], pts[n:]
        a = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
        b = rng.uniform(-2, 2, n) + 1j * rng.uniform(-2, 2, n)
        lhs, rhs = ishikawa_both_sides(n, x, y, a, b)
        errs.append(rel_err(lhs, rhs))
    return _result("ishikawa", errs, 1e-9)


def check_vandermonde_split(rng, draws=200):
    errs = []
    for _ in range(draws):
        n = int(rng.integers(1, 5))
        a = separated_points(rng, 2 * n, -2, 2, 0.05, complex_=True)
        left = vandermonde_product(a[:n]) * vandermonde_product(a[n:]) * np.prod(a[n:][None, :] - a[:n][:, None])
        errs.append(rel_err(left, vandermonde_product(a)))
    return _result("vandermonde_split", errs, 1e-10)


def check_cauchy(rng, draws=100):
    errs = []
    for _ in range(draws):
        n = int(rng.integers(1, 5))
        x = separated_points(rng, n, 0.1, 2, 0.1, complex_=True)
        y = separated_points(rng, n, 0.1, 2, 0.1, complex_=True)
        errs.append(rel_err(cauchy_det(x, y), cauchy_closed_form(x, y)))
    return _result("cauchy", errs, 1e-10)


def check_christoffel_darboux(rng, draws=100):
    errs = []
    for _ in range(draws):
        N = int(rng.integers(1, 13))
        fam = PolyFamily.hermite() if rng.random() < 0.5 else PolyFamily.laguerre(float(rng.choice(NU_VALUES)))
        lo = -3.0 if fam.kind == "hermite" else 0.0
        x, y = separated_points(rng, 2, lo, 3.0, 0.05)
        total = christoffel_darboux(fam, N, x, y, check=False)
        bracket = fam(N, x) * fam(N - 1, y) - fam(N, y) * fam(N - 1, x)
        if fam.kind == "hermite":
            pref = math.exp(-N * math.log(2.0) - math.lgamma(N))
        else:
            pref = -math.exp(math.lgamma(N + 1) - math.lgamma(N + fam.nu))
        errs.append(rel_err(total, pref * bracket / (x - y)))
    return _result("christoffel_darboux", errs, 1e-10)


def check_bridges(rng, draws=50):
    errs = []
    for _ in range(draws):
        x = float(rng.uniform(-4, 4))
        for n in range(11):
            lhs = x * laguerre(n, 0.5, x * x / 2)
            rhs = (-1) ** n * 2 ** (-(2 * n + 0.5)) / math.factorial(n) * hermite(2 * n + 1, x / math.sqrt(2))
            errs.append(rel_err(lhs, rhs))
            lhs = laguerre(n, -0.5, x * x / 2)
            rhs = (-1) ** n * 2 ** (-2 * n) / math.factorial(n) * hermite(2 * n, x / math.sqrt(2))
            errs.append(rel_err(lhs, rhs))
    return _result("hermite_laguerre_bridges", errs, 1e-10)


def _alpha(rng, n, complex_=False):
    return separated_points(rng, 2 * n, -2, 2, 0.05, complex_=complex_)


def check_charpoly_gue(rng, draws=100):
    errs = []
    for _ in range(draws):
        n, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        a = _alpha(rng, n)
        errs.append(rel_err(m_gue_pair_form(n, a, N, 1.0), m_gue_monic_form(n, a, N, 1.0)))
    return _result("charpoly_gue_pair_vs_monic", errs, 1e-9)


def check_charpoly_nu(rng, draws=100):
    errs = []
    for nu in NU_VALUES:
        for _ in range(draws // len(NU_VALUES)):
            n, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
            a = _alpha(rng, n)
            errs.append(rel_err(m_nu_pair_form(n, a, N, nu, 0.5), m_nu_monic_form(n, a, N, nu, 0.5)))
    return _result("charpoly_laguerre_pair_vs_monic", errs, 1e-9)


def check_class_forms(rng, draws=100):
    errs = []
    for _ in range(draws):
        kind = "C" if rng.random() < 0.5 else "D"
        n, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        # |alpha| separated by 0.1; random signs exercise the parity of the Hermite form
        a = separated_points(rng, 2 * n, 0.1, 2, 0.1) * rng.choice([-1, 1], 2 * n)
        her, lag = m_class(kind, n, a, N, 1.0, rtol=np.inf, return_both=True)
        errs.append(rel_err(her, lag))
    return _result("class_cd_hermite_vs_laguerre", errs, 1e-9)


def check_karlin_mcgregor(rng, draws=50):
    errs = []
    for _ in range(draws):
        N = int(rng.integers(1, 5))
        # larger t / closer points make det[p] itself ill-conditioned beyond 1e-8 in double
        t = float(rng.uniform(0.3, 1.0))
        if rng.random() < 0.5:
            xi = np.sort(separated_points(rng, N, -2, 2, 0.3))
            y = np.sort(separated_points(rng, N, -2, 2, 0.3))
            lhs = km_det_bm(t, y, xi) / vandermonde_product(xi)
            errs.append(rel_err(lhs, h_plus_det("bm", t, y, xi)))
        else:
            nu = float(rng.choice(NU_VALUES))
            xi = np.sort(separated_points(rng, N, 0.05, 3, 0.3))
            y = np.sort(separated_points(rng, N, 0.05, 3, 0.3))
            lhs = km_det_besq(nu, t, y, xi) / vandermonde_product(xi)
            errs.append(rel_err(lhs, h_plus_det("besq", t, y, xi, nu=nu)))
    return _result("karlin_mcgregor_ratio", errs, 1e-8)


CHECKS = {
    "ishikawa": check_ishikawa,
    "vandermonde_split": check_vandermonde_split,
    "cauchy": check_cauchy,
    "christoffel_darboux": check_christoffel_darboux,
    "bridges": check_bridges,
    "charpoly_gue": check_charpoly_gue,
    "charpoly_nu": check_charpoly_nu,
    "class_cd": check_class_forms,
    "karlin_mcgregor": check_karlin_mcgregor,
}


def run_battery(seed=0, names=None) -> dict:
    """Run the selected checks (all by default); each uses its own stream of ``seed``."""
    names = list(CHECKS) if names is None else list(names)
    unknown = set(names) - set(CHECKS)
    if unknown:
        raise KeyError(f"unknown checks: {sorted(unknown)}")
    results = []
    for i, name in enumerate(CHECKS):
        if name not in names:
            continue
        start = time.perf_counter()
        res = CHECKS[name](stream_rng(seed, i))
        res["seconds"] = time.perf_counter() - start
        results.append(res)
    return {"seed": int(seed), "checks": results, "pass": all(r["pass"] for r in results)}
