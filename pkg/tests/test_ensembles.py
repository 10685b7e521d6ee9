import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from noncolliding.ensembles import (
    EnsembleSpec,
    chgue_pdf,
    draw,
    gue_pdf,
    mc_expectation,
    parse_seed,
    resolve_seed,
    sample_chgue,
    sample_gue,
    write_samples_csv,
)

KS_SAMPLES = 100_000


def _ks_critical(n, alpha=0.01):
    return stats.kstwo.ppf(1 - alpha, n)


# -- pdfs ------------------------------------------------------------------------


def test_gue_pdf_examples():
    assert gue_pdf(1, 1.0, [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-14)
    assert gue_pdf(3, 1.0, [0.2, 0.2, 1.0]) == 0


def test_gue_pdf_normalization_two_points():
    val = integrate.dblquad(lambda y, x: gue_pdf(2, 1.0, [x, y]), -12, 12, lambda x: x, lambda x: 12, epsabs=1e-12)[0]
    assert val == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("sigma2", [0.3, 2.0])
def test_gue_pdf_scaling(sigma2):
    x = np.array([-0.4, 0.1, 1.3])
    s = math.sqrt(sigma2)
    assert gue_pdf(3, sigma2, s * x) * s**3 == pytest.approx(gue_pdf(3, 1.0, x), rel=1e-12)


def test_chgue_pdf_examples():
    for x in [0.0, 0.4, 3.0]:
        assert chgue_pdf(1, 0.0, 0.5, [x]) == pytest.approx(math.exp(-x), rel=1e-14)
    assert chgue_pdf(2, 0.5, 1.0, [0.7, 0.7]) == 0
    with pytest.raises(ValueError):
        chgue_pdf(1, 0.0, 1.0, [-0.1])


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 2.0])
def test_chgue_pdf_normalization(nu):
    one = integrate.quad(lambda x: chgue_pdf(1, nu, 0.5, [x]), 0, np.inf, epsabs=1e-12)[0]
    assert one == pytest.approx(1.0, abs=1e-6)
    if nu >= 0:
        two = integrate.dblquad(
            lambda y, x: chgue_pdf(2, nu, 0.5, [x, y]), 0, 60, lambda x: x, lambda x: 60, epsabs=1e-11
        )[0]
        assert two == pytest.approx(1.0, abs=1e-6)


def test_pdfs_vectorize_over_leading_axes():
    x = np.array([[0.1, 0.5], [0.2, 2.0]])
    np.testing.assert_allclose(gue_pdf(2, 1.0, x), [gue_pdf(2, 1.0, r) for r in x])
    np.testing.assert_allclose(chgue_pdf(2, 0.5, 1.0, x), [chgue_pdf(2, 0.5, 1.0, r) for r in x])


# -- spec and seeds ---------------------------------------------------------------


def test_ensemble_spec_forces_index():
    assert EnsembleSpec("classC", 2, nu=7.0).nu == 0.5
    assert EnsembleSpec("classD", 2).nu == -0.5
    assert EnsembleSpec("gue", 2, nu=3.0).kind == "GUE"
    with pytest.raises(ValueError):
        EnsembleSpec("GOE", 2)
    with pytest.raises(ValueError):
        EnsembleSpec("chGUE", 2, nu=-1.0)
    with pytest.raises(ValueError):
        EnsembleSpec("GUE", 0)
    with pytest.raises(ValueError):
        EnsembleSpec("GUE", 2, sigma2=0.0)


def test_seed_parsing(monkeypatch):
    assert parse_seed("0x1F") == 31
    assert parse_seed("42") == 42
    with pytest.raises(ValueError):
        parse_seed(-1)
    monkeypatch.setenv("RMT_SEED", "0x10")
    assert resolve_seed(None) == 16
    assert resolve_seed(3) == 3
    monkeypatch.delenv("RMT_SEED")
    assert resolve_seed(None) == 0


# -- samplers --------------------------------------------------------------------


def test_samplers_are_deterministic_and_ordered():
    a = sample_gue(4, 1.0, 11, size=50)
    assert np.array_equal(a, sample_gue(4, 1.0, 11, size=50))
    assert not np.array_equal(a, sample_gue(4, 1.0, 12, size=50))
    assert np.all(np.diff(a, axis=1) >= 0)
    for nu in [-0.5, 0.3, 2.0]:
        b = sample_chgue(3, nu, 0.7, "0xBEEF", size=50)
        assert np.array_equal(b, sample_chgue(3, nu, 0.7, 48879, size=50))
        assert np.all(b >= 0) and np.all(np.diff(b, axis=1) >= 0)
    assert sample_gue(3, 1.0, 5).shape == (3,)


def test_gue_single_point_is_scaled_normal():
    x = sample_gue(1, 2.5, 3, size=KS_SAMPLES)[:, 0]
    res = stats.kstest(x, stats.norm(scale=math.sqrt(2.5)).cdf)
    assert res.statistic < _ks_critical(len(x))


def test_gue_second_moment():
    N, s2 = 3, 0.8
    rep = mc_expectation(EnsembleSpec("GUE", N, sigma2=s2), lambda x: np.sum(x * x, axis=1), KS_SAMPLES, seed=1)
    assert rep.z(N * N * s2) < 3


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 2.0, 3.0])
def test_chgue_first_moment(nu):
    N, s2 = 3, 0.6
    rep = mc_expectation(EnsembleSpec("chGUE", N, nu=nu, sigma2=s2), lambda x: np.sum(x, axis=1), KS_SAMPLES, seed=2)
    assert rep.z(2 * s2 * N * (N + nu)) < 3


@pytest.mark.parametrize("N", [1, 2, 3])
def test_wishart_and_bidiagonal_routes_agree(N):
    spec = EnsembleSpec("chGUE", N, nu=1.0, sigma2=0.5)
    f = lambda x: np.stack([np.sum(x**k, axis=1) for k in (1, 2, 3)], axis=1)
    w = mc_expectation(spec, f, KS_SAMPLES, seed=3, method="wishart")
    b = mc_expectation(spec, f, KS_SAMPLES, seed=4, method="bidiagonal")
    z = np.abs(w.estimate - b.estimate) / np.hypot(w.stderr, b.stderr)
    assert np.all(z < 3), z


def test_wishart_requires_integer_index():
    with pytest.raises(ValueError):
        sample_chgue(2, 0.5, 1.0, 0, size=3, method="wishart")


def _gue_one_point(N, sigma2, x):
    """Density of a uniformly chosen eigenvalue, by Gauss-Hermite integration of the other N-1 points.

    The integrand is a polynomial times the Gaussian weight, so the rule is exact.
    """
    if N == 1:
        return gue_pdf(1, sigma2, np.array([[v] for v in x]))
    t, w = special.roots_hermite(2 * N)
    s = math.sqrt(2 * sigma2)
    grids = np.meshgrid(*([s * t] * (N - 1)), indexing="ij")
    weights = np.prod(np.meshgrid(*([w * s] * (N - 1)), indexing="ij"), axis=0).ravel()
    rest = np.stack([g.ravel() for g in grids], axis=1)
    out = []
    for v in x:
        pts = np.column_stack([np.full(len(rest), v), rest])
        vals = gue_pdf(N, sigma2, pts) * np.exp(np.sum(rest**2, axis=1) / (2 * sigma2))
        out.append(np.sum(weights * vals) / math.factorial(N))
    return np.array(out)


def _chgue_one_point(N, nu, sigma2, x):
    """Same for chGUE with generalized Gauss-Laguerre nodes."""
    if N == 1:
        return chgue_pdf(1, nu, sigma2, np.array([[v] for v in x]))
    t, w = special.roots_genlaguerre(2 * N, nu)
    s = 2 * sigma2
    grids = np.meshgrid(*([s * t] * (N - 1)), indexing="ij")
    weights = np.prod(np.meshgrid(*([w * s ** (nu + 1)] * (N - 1)), indexing="ij"), axis=0).ravel()
    rest = np.stack([g.ravel() for g in grids], axis=1)
    out = []
    for v in x:
        pts = np.column_stack([np.full(len(rest), v), rest])
        vals = chgue_pdf(N, nu, sigma2, pts) * np.exp(np.sum(rest, axis=1) / s) * np.prod(rest ** (-nu), axis=1)
        out.append(np.sum(weights * vals) / math.factorial(N))
    return np.array(out)


def _tabulated_cdf(density, lo, hi, n=4001):
    grid = np.linspace(lo, hi, n)
    cdf = integrate.cumulative_simpson(density(grid), x=grid, initial=0.0)
    return lambda x: np.interp(x, grid, cdf)


def _one_per_row(samples, seed):
    pick = np.random.default_rng(seed).integers(0, samples.shape[1], samples.shape[0])
    return samples[np.arange(samples.shape[0]), pick]


@pytest.mark.parametrize("N", [1, 2, 3])
def test_gue_sampler_matches_pdf_marginal(N):
    x = _one_per_row(sample_gue(N, 1.0, 20 + N, size=KS_SAMPLES), N)
    cdf = _tabulated_cdf(lambda g: _gue_one_point(N, 1.0, g), -10, 10)
    assert cdf(10.0) == pytest.approx(1.0, abs=1e-8)
    assert stats.kstest(x, cdf).statistic < _ks_critical(len(x))


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 2.0])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_chgue_sampler_matches_pdf_marginal(N, nu):
    x = _one_per_row(sample_chgue(N, nu, 0.5, 40 + N, size=KS_SAMPLES), N)
    if not float(nu).is_integer():
        # substitute x = u^2 to remove the fractional power at the origin
        dens = lambda u: 2 * u * _chgue_one_point(N, nu, 0.5, u * u)
        cdf_u = _tabulated_cdf(lambda g: dens(np.maximum(g, 1e-8)), 0, 8)
        cdf = lambda v: cdf_u(np.sqrt(v))
        top = cdf(64.0)
    else:
        cdf = _tabulated_cdf(lambda g: _chgue_one_point(N, nu, 0.5, g), 0, 60)
        top = cdf(60.0)
    assert top == pytest.approx(1.0, abs=1e-6)
    assert stats.kstest(x, cdf).statistic < _ks_critical(len(x))


# -- Monte Carlo engine ---------------------------------------------------------------


def test_mc_constant_integrand():
    rep = mc_expectation(EnsembleSpec("GUE", 2), lambda x: np.full(len(x), 2.5 - 1j), 1000, seed=0)
    assert rep.estimate == 2.5 - 1j and rep.stderr == 0
    rep = mc_expectation(EnsembleSpec("GUE", 2), lambda x: 3.0, 1000, seed=0)
    assert rep.estimate == 3.0 and rep.stderr == 0 and rep.samples == 1000


def test_mc_rejects_single_sample():
    with pytest.raises(ValueError):
        mc_expectation(EnsembleSpec("GUE", 2), lambda x: x[:, 0], 1, seed=0)


def test_mc_second_moment_gue_two():
    rep = mc_expectation(EnsembleSpec("GUE", 2, sigma2=1.0), lambda x: np.sum(x * x, axis=1), KS_SAMPLES, seed=7)
    assert rep.z(4.0) < 3


def test_mc_stderr_scales_as_inverse_root():
    spec = EnsembleSpec("chGUE", 2, nu=0.5, sigma2=1.0)
    f = lambda x: np.sum(x, axis=1)
    a = mc_expectation(spec, f, 50_000, seed=8)
    b = mc_expectation(spec, f, 100_000, seed=9)
    assert a.stderr / b.stderr == pytest.approx(math.sqrt(2), rel=0.2)


def test_mc_is_thread_count_independent():
    spec = EnsembleSpec("classD", 3, sigma2=0.7)
    f = lambda x: np.prod(1.2 - x, axis=1) + 1j * x[:, 0]
    base = mc_expectation(spec, f, 50_000, seed="0xabc", threads=1)
    for threads in (2, 4, 7):
        rep = mc_expectation(spec, f, 50_000, seed="0xabc", threads=threads)
        assert rep.estimate == base.estimate and rep.stderr == base.stderr


def test_mc_vectorized_and_scalar_agree():
    spec = EnsembleSpec("GUE", 2)
    a = mc_expectation(spec, lambda x: x[:, 1] - x[:, 0], 3000, seed=5)
    b = mc_expectation(spec, lambda row: row[1] - row[0], 3000, seed=5, vectorized=False)
    assert a.estimate == pytest.approx(b.estimate, rel=1e-14)


def test_mc_vector_valued_integrand():
    spec = EnsembleSpec("GUE", 1)
    rep = mc_expectation(spec, lambda x: np.column_stack([x[:, 0], x[:, 0] ** 2]), 20_000, seed=6)
    assert rep.estimate.shape == (2,) and np.all(rep.z([0.0, 1.0]) < 3)


def test_draw_matches_mc_streams():
    spec = EnsembleSpec("GUE", 2)
    x = draw(spec, 20_000, 4)
    rep = mc_expectation(spec, lambda b: b[:, 0], 20_000, seed=4)
    assert rep.estimate == pytest.approx(x[:, 0].mean(), rel=1e-12)


def test_samples_csv(tmp_path):
    x = np.array([[0.1, 1 / 3], [-2.0, 5.0]])
    text = write_samples_csv(tmp_path / "s.csv", x)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "index,x_1,x_2"
    assert lines == text.splitlines()
    back = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 1:], x)
