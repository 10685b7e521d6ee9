"""Acceptance criteria, one test each.

Every test prints a single ``criterion k: PASS|FAIL`` line (also repeated in
the pytest terminal summary) with the worst observed error and the runtime.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate, special, stats

from conftest import ACCEPTANCE_LINES
from noncolliding.battery import run_battery, separated_points
from noncolliding.biorth import (
    InitialConfig,
    ext_hermite_kernel,
    ext_laguerre_kernel,
    h_minus_det,
    h_plus_det,
    phi_minus,
    phi_nu_minus,
    phi_nu_plus,
    phi_plus,
)
from noncolliding.charpoly import (
    closed_form,
    m_class,
    m_gue_monic_form,
    m_gue_pair_form,
    m_nu_monic_form,
    m_nu_pair_form,
    mc_charpoly,
)
from noncolliding.densities import besq_kernel, bm_kernel, km_det_besq, km_det_bm
from noncolliding.detkit import rel_err, vandermonde_product
from noncolliding.ensembles import EnsembleSpec
from noncolliding.equivalence import verify_density_shift, verify_det_block, verify_onepoint, verify_spacetime
from noncolliding.processes import gap_statistics, simulate_euler, simulate_matrix, warm_start
from noncolliding.specfun import hermite, laguerre

NUS = (-0.5, 0.0, 0.5, 1.0, 2.3)


class Criterion:
    """Collects sub-checks, then prints and asserts one verdict line."""

    def __init__(self, k, title, limit):
        self.k, self.title, self.limit = k, title, limit
        self.start = time.perf_counter()
        self.failures = []
        self.notes = []

    def check(self, name, ok, detail=""):
        self.notes.append(f"{name}={detail}" if detail else name)
        if not ok:
            self.failures.append(f"{name} {detail}".strip())

    def worst(self, name, errors, tol):
        w = float(np.max(errors))
        self.check(name, w <= tol, f"{w:.1e}<={tol:.0e}")

    def finish(self):
        elapsed = time.perf_counter() - self.start
        if self.limit is not None and elapsed > self.limit:
            self.failures.append(f"runtime {elapsed:.1f}s > {self.limit}s")
        verdict = "PASS" if not self.failures else "FAIL"
        budget = f"/{self.limit}s" if self.limit is not None else ""
        line = f"criterion {self.k}: {verdict}  {self.title}  [{elapsed:.1f}s{budget}]  " + "; ".join(self.notes)
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert not self.failures, self.failures


def _quad(f, a, b, rtol=1e-12):
    return integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=600)[0]


def _half(f, upper, nu, rtol=1e-11):
    # int_0^upper f for integrands behaving like u^nu at the origin
    if nu >= 0:
        return _quad(f, 0, upper, rtol)
    g = lambda u: f(max(u, 1e-300)) * max(u, 1e-300) ** (-nu)
    return integrate.quad(g, 0, upper, weight="alg", wvar=(nu, 0.0), epsabs=0.0, epsrel=rtol, limit=600)[0]


def _gauss_legendre(a, b, panels=200, order=20):
    z, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = np.diff(edges)[:, None] / 2
    x = (edges[:-1, None] + half * (z + 1)).ravel()
    return x, (half * w).ravel()


# -- 1 -------------------------------------------------------------------------------------


def test_criterion_1_cross_form_equivalence():
    c = Criterion(1, "pair form = monic form (GUE and Laguerre)", 10)
    rng = np.random.default_rng(101)
    errs = []
    for _ in range(100):
        n, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        a = separated_points(rng, 2 * n, -2, 2, 0.05, complex_=bool(rng.random() < 0.5))
        errs.append(rel_err(m_gue_pair_form(n, a, N, 1.0), m_gue_monic_form(n, a, N, 1.0)))
    c.worst("gue", errs, 1e-9)
    for nu in NUS:
        errs = []
        for _ in range(100):
            n, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
            a = separated_points(rng, 2 * n, -2, 2, 0.05, complex_=bool(rng.random() < 0.5))
            errs.append(rel_err(m_nu_pair_form(n, a, N, nu, 0.5), m_nu_monic_form(n, a, N, nu, 0.5)))
        c.worst(f"nu={nu}", errs, 1e-9)
    c.finish()


# -- 2 -------------------------------------------------------------------------------------


def test_criterion_2_monte_carlo_oracle():
    c = Criterion(2, "closed forms within 3 stderr of 1e5-sample MC", 120)
    samples = 100_000
    forced = [
        (EnsembleSpec("GUE", 1, sigma2=1.0), [0.0, 1.0]),
        (EnsembleSpec("chGUE", 1, nu=0.0, sigma2=0.5), [0.0, 1.0]),
    ]
    for i, (spec, a) in enumerate(forced):
        exact = closed_form(spec, a)
        z = mc_charpoly(spec, a, samples, seed=300 + i).z(1.0)
        c.check(f"forced_{spec.kind}", abs(exact - 1) < 1e-14 and z <= 3, f"z={z:.2f}")
    # points off the positive spectrum keep the chiral products light-tailed
    base = np.array([0.4 + 0.3j, 1.3, 2.1, 0.9 - 0.2j])
    zs = []
    for kind in ("GUE", "chGUE", "classC", "classD"):
        for N in (1, 2, 3):
            for n in (1, 2):
                spec = EnsembleSpec(kind, N, nu=0.5 if kind == "chGUE" else 0.0, sigma2=0.7)
                a = base[: 2 * n]
                a = -a if kind == "chGUE" else (1j * a if kind != "GUE" else a)
                rep = mc_charpoly(spec, a, samples, seed=310 + 10 * N + n)
                zs.append(max(rep.z(closed_form(spec, a, f)) for f in (("monic", "pair") if kind in ("GUE", "chGUE") else ("monic",))))
    c.check("grid", max(zs) <= 3, f"max_z={max(zs):.2f} over {len(zs)}")
    c.finish()


# -- 3 -------------------------------------------------------------------------------------


def test_criterion_3_ishikawa_battery():
    c = Criterion(3, "Ishikawa identity and Vandermonde split", 5)
    rep = run_battery(303, ["ishikawa", "vandermonde_split"])
    for chk in rep["checks"]:
        c.check(chk["name"], chk["pass"] and chk["cases"] >= 200, f"{chk['max_rel_err']:.1e}<={chk['tol']:.0e}")
    c.finish()


# -- 4 -------------------------------------------------------------------------------------


def test_criterion_4_kernel_structure():
    c = Criterion(4, "Chapman-Kolmogorov, kernels, biorthogonality, phi paths", 60)
    # Chapman-Kolmogorov
    errs = []
    for s, t in [(0.3, 1.0), (2.0, 0.3)]:
        for x, z in [(0.0, 0.0), (-4.0, 3.0)]:
            lhs = _quad(lambda y: float(np.real(bm_kernel(s, z, y) * bm_kernel(t, y, x))), -60, 60)
            errs.append(rel_err(lhs, float(np.real(bm_kernel(s + t, z, x)))))
    c.worst("ck_bm", errs, 1e-8)
    errs = []
    for nu in (-0.5, 0.0, 2.3):
        for s, t, x, z in [(0.3, 1.0, 0.5, 1.0), (2.0, 0.3, 4.0, 0.2)]:
            upper = 2 * max(s, t) * 80 + 4 * max(x, z) + 40
            lhs = _half(lambda y: besq_kernel(nu, s, z, y) * besq_kernel(nu, t, y, x), upper, nu)
            errs.append(rel_err(lhs, besq_kernel(nu, s + t, z, x)))
    c.worst("ck_besq", errs, 1e-6)
    # extended kernels: trace and reproducing property
    T, errs = 0.9, []
    for N in (1, 3, 6):
        errs.append(abs(_quad(lambda x: ext_hermite_kernel(N, T, x, x), -30, 30) - N))
        for x, y in [(0.3, -0.8), (1.5, 1.2)]:
            val = _quad(lambda u: ext_hermite_kernel(N, T, x, u) * ext_hermite_kernel(N, T, u, y), -30, 30)
            errs.append(abs(val - ext_hermite_kernel(N, T, x, y)))
        for nu in (-0.5, 1.0):
            errs.append(abs(_half(lambda x: ext_laguerre_kernel(N, nu, T, x, x), 2 * T * 120, nu) - N))
            for x, y in [(0.3, 1.8), (2.5, 4.0)]:
                val = _half(lambda u: ext_laguerre_kernel(N, nu, T, x, u) * ext_laguerre_kernel(N, nu, T, u, y), 2 * T * 120, nu)
                errs.append(abs(val - ext_laguerre_kernel(N, nu, T, x, y)))
    c.worst("trace_reproducing", errs, 1e-6)
    # biorthogonality for N <= 4: composite Gauss-Legendre on vectorized phi values
    t, errs = 0.8, []
    xb, wb = _gauss_legendre(-12, 12)
    for pts in [(-0.8,), (-0.8, 0.5), (-0.8, 0.5, 1.3), (-1.1, -0.2, 0.6, 1.5), (0.0,) * 4]:
        xi = InitialConfig(pts)
        plus = np.array([phi_plus(m, t, xb, xi) for m in range(xi.N)])
        minus = np.array([phi_minus(n, t, xb, xi) for n in range(xi.N)])
        errs.append(np.max(np.abs((plus * wb) @ minus.T - np.eye(xi.N))))
    nu = 0.5
    for pts in [(0.4, 1.5), (0.3, 0.9, 1.8, 3.0), (0.0,) * 4]:
        xi = InitialConfig(pts)
        # x = u^2 removes the x^nu branch point at the origin
        u, wu = _gauss_legendre(0, math.sqrt(2 * t * 60 + 4 * max(xi.points) + 20))
        x, wx = u * u, 2 * u * wu
        plus = np.array([phi_nu_plus(m, nu, t, x, xi) for m in range(xi.N)])
        minus = np.array([phi_nu_minus(n, nu, t, x, xi) for n in range(xi.N)])
        errs.append(np.max(np.abs((plus * wx) @ minus.T - np.eye(xi.N))))
    c.worst("biorthogonality", errs, 1e-7)
    # closed forms against the residue, moment and quadrature paths
    errs = []
    xi4 = InitialConfig.delta0(4)
    xb, xl = np.linspace(-3, 3, 13), np.linspace(0.05, 6, 12)
    for n in range(4):
        closed = phi_plus(n, 0.8, xb, xi4, method="closed")
        errs.append(np.max(np.abs(closed - phi_plus(n, 0.8, xb, xi4, method="residue"))) / np.max(np.abs(closed)))
        closed = phi_minus(n, 0.8, xb, xi4, method="closed")
        errs.append(np.max(np.abs(closed - phi_minus(n, 0.8, xb, xi4, method="moment"))) / np.max(np.abs(closed)))
        for nu in NUS:
            closed = phi_nu_plus(n, nu, 0.8, xl, xi4, method="closed")
            errs.append(np.max(np.abs(closed - phi_nu_plus(n, nu, 0.8, xl, xi4, method="residue"))) / np.max(np.abs(closed)))
            closed = phi_nu_minus(n, nu, 0.8, xl, xi4, method="closed")
            errs.append(np.max(np.abs(closed - phi_nu_minus(n, nu, 0.8, xl, xi4, method="moment"))) / np.max(np.abs(closed)))
    # quadrature paths: Gaussian expectation for phi^-, squared Bessel integral for phi^{nu,-}
    z, w = special.roots_hermitenorm(12)
    w = w / math.sqrt(2 * math.pi)
    for x in (-1.5, 0.4, 2.0):
        for n in range(4):
            ref = np.sum(w * np.prod([x + 1j * math.sqrt(0.8) * z] * n, axis=0)).real if n else 1.0
            errs.append(rel_err(phi_minus(n, 0.8, x, xi4), ref))
    xi3 = InitialConfig((0.4, 1.3, 2.0))
    for x in (0.3, 2.7):
        for n in range(3):
            errs.append(rel_err(phi_nu_minus(n, 0.5, 0.6, x, xi3, method="quadrature"), phi_nu_minus(n, 0.5, 0.6, x, xi3, method="moment")))
    c.worst("phi_paths", errs, 1e-8)
    c.finish()


# -- 5 -------------------------------------------------------------------------------------


def test_criterion_5_karlin_mcgregor():
    c = Criterion(5, "Karlin-McGregor factorizations", 10)
    rng = np.random.default_rng(505)
    errs = []
    for _ in range(40):
        N, t = int(rng.integers(1, 5)), float(rng.uniform(0.3, 1.0))
        if rng.random() < 0.5:
            x, y = (np.sort(separated_points(rng, N, -2, 2, 0.3)) for _ in range(2))
            km, hp, hm = km_det_bm(t, y, x), h_plus_det("bm", t, y, InitialConfig(x)), h_minus_det("bm", t, y, InitialConfig(x))
        else:
            nu = float(rng.choice(NUS))
            x, y = (np.sort(separated_points(rng, N, 0.05, 3, 0.3)) for _ in range(2))
            xi = InitialConfig(x)
            km, hp, hm = km_det_besq(nu, t, y, x), h_plus_det("besq", t, y, xi, nu=nu), h_minus_det("besq", t, y, xi, nu=nu)
        errs.append(rel_err(hp * vandermonde_product(x), km))
        errs.append(rel_err(hm, vandermonde_product(y)))
    c.worst("distinct", errs, 1e-8)
    # one double point: the ratio km / h_N(x) as two starting points merge (Richardson in eps)
    errs = []
    y = np.array([0.4, 1.5, 2.8])
    for fam in ("bm", "besq"):
        def ratio(eps):
            x = np.array([1.0 - eps / 2, 1.0 + eps / 2, 2.2])
            km = km_det_bm(0.8, y, x) if fam == "bm" else km_det_besq(0.5, 0.8, y, x)
            return km / vandermonde_product(x)

        limit = (4 * ratio(1e-2) - ratio(2e-2)) / 3
        errs.append(rel_err(limit, h_plus_det(fam, 0.8, y, InitialConfig((1.0, 1.0, 2.2)), nu=0.5)))
    c.worst("double_point", errs, 1e-6)
    c.finish()


# -- 6 -------------------------------------------------------------------------------------


def test_criterion_6_time_shift_equivalence():
    c = Criterion(6, "time-shift equivalence at 1e5 samples, N=2, sigma2=t=1/2", 300)
    samples, s2, t = 100_000, 0.5, 0.5
    setups = {
        "bm": dict(nu=0.0, grid=np.linspace(-2, 2, 5), blocks=[[-1.0, 0.5], [0.2, 1.5], [-1.5, -0.2]],
                   configs=[[-1.0, 0.5], [0.0, 1.0], [0.5, 2.0]], pairs=[[0.2, 0.5], [-1.0, 0.3], [0.8, -0.6]]),
        "besq": dict(nu=0.0, grid=np.linspace(0.25, 3, 5), blocks=[[0.3, 1.2], [0.8, 2.5], [0.5, 0.9]],
                     configs=[[0.3, 1.1], [0.6, 2.4], [1.0, 1.8]], pairs=[[0.3, 0.6], [1.0, 0.4], [2.0, 2.5]]),
    }
    for k, (fam, p) in enumerate(setups.items()):
        base = (fam, 2, p["nu"], s2)
        reps = {
            "onepoint": verify_onepoint(*base, t, p["grid"], samples, seed=600 + k),
            "det_block": verify_det_block(*base, t, p["blocks"], samples, seed=610 + k),
            "density_shift": verify_density_shift(*base, t, p["configs"], samples, seed=620 + k),
            "spacetime": verify_spacetime(*base, 0.25, t, p["pairs"], samples, seed=630 + k),
        }
        for op, rep in reps.items():
            zmax = float(np.max(np.abs(rep["z"])))
            c.check(f"{fam}.{op}", rep["pass"] and zmax <= 3, f"|z|max={zmax:.2f}")
    c.finish()


# -- 7 -------------------------------------------------------------------------------------


def test_criterion_7_process_simulation():
    c = Criterion(7, "Dyson gap moment and Euler/matrix agreement", 300)
    paths = 10_000
    times = [0.25, 0.5, 1.0]
    g = gap_statistics(simulate_matrix("bm", 2, 0.0, times, seed=700, n_paths=paths))
    z = np.abs(g["gap2_mean"][1:, 0] - 6 * np.array(times)) / g["gap2_stderr"][1:, 0]
    c.check("matrix_gap2", np.all(z <= 3), f"z={np.round(z, 2).tolist()}")
    # euler from an exact state at t_eps; its clock starts there
    te, T = 0.01, 0.5
    x0 = warm_start("bm", 2, 0.0, te, seed=701, n_paths=paths)
    eu = simulate_euler("bm", 2, 0.0, x0, 1e-4, T - te, seed=702, n_paths=paths)
    ge = gap_statistics(eu)
    rel = abs(ge["gap2_mean"][-1, 0] / (6 * T) - 1)
    c.check("euler_gap2", rel <= 0.05, f"rel={rel:.3f}<=0.05")
    mx = simulate_matrix("bm", 2, 0.0, [T], seed=703, n_paths=paths)
    pick = np.random.default_rng(704).integers(0, 2, paths)
    idx = np.arange(paths)
    d = stats.ks_2samp(eu.paths[idx, -1, pick], mx.at(T)[idx, pick]).statistic
    crit = 1.358 * math.sqrt(2 / paths)
    c.check("ks_one_point", d < crit, f"D={d:.4f}<{crit:.4f}")
    c.finish()


# -- 8 -------------------------------------------------------------------------------------


def test_criterion_8_class_cd_consistency():
    c = Criterion(8, "class C/D Hermite vs Laguerre forms and bridges", None)
    rng = np.random.default_rng(808)
    errs = []
    for _ in range(200):
        kind = "C" if rng.random() < 0.5 else "D"
        n, N = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        a = separated_points(rng, 2 * n, 0.1, 2, 0.1) * rng.choice([-1, 1], 2 * n)
        her, lag = m_class(kind, n, a, N, float(rng.uniform(0.3, 2.0)), rtol=np.inf, return_both=True)
        errs.append(rel_err(her, lag))
    c.worst("chara_forms", errs, 1e-9)
    x = np.linspace(-4, 4, 33)
    errs = []
    for n in range(11):
        lhs = x * laguerre(n, 0.5, x * x / 2)
        rhs = (-1) ** n * 2 ** (-(2 * n + 0.5)) / math.factorial(n) * hermite(2 * n + 1, x / math.sqrt(2))
        errs.append(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
        lhs = laguerre(n, -0.5, x * x / 2)
        rhs = (-1) ** n * 2 ** (-2 * n) / math.factorial(n) * hermite(2 * n, x / math.sqrt(2))
        errs.append(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    c.worst("bridges", errs, 1e-10)
    c.finish()
