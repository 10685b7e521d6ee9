"""Monte Carlo checks of the time-shift equivalence.

Starting the noncolliding process from a random configuration drawn from
the GUE (Brownian motion) or chGUE (squared Bessel) law with variance
``sigma2`` gives the same process as starting from ``N delta_0`` and
shifting the clock by ``sigma2``.  Each check averages a quantity built from
the general-configuration kernel over sampled initial configurations and
compares with the closed form at the shifted time.

All grid points share the same initial-configuration draws (common random
numbers).  A report passes when every ``|z| <= Z_MAX``; grids of at least
``MIN_GRID_FOR_FRACTION`` points must also have ``FRACTION_WITHIN_2`` of
them within ``|z| <= 2``.
"""

from __future__ import annotations

import numpy as np

from .biorth import InitialConfig, corr_kernel, ext_hermite_kernel, ext_laguerre_kernel, kernel_batch, multitime_pdf, phi_plus_batch, phi_minus_batch
from .detkit import det, vandermonde_product
from .ensembles import EnsembleSpec, chgue_pdf, gue_pdf, mc_expectation, resolve_seed

__all__ = [
    "initial_law",
    "verify_onepoint",
    "verify_det_block",
    "verify_density_shift",
    "verify_spacetime",
    "Z_MAX",
]

Z_MAX = 3.0
FRACTION_WITHIN_2 = 0.95
MIN_GRID_FOR_FRACTION = 20


def initial_law(family, N, nu=0.0, sigma2=1.0, route=None) -> EnsembleSpec:
    """Ensemble of initial configurations.

    ``route`` may be ``"classC"`` / ``"classD"`` for squared Bessel with
    ``nu = +-1/2``.
    """
    fam = str(family).lower()
    if fam == "bm":
        return EnsembleSpec("GUE", N, sigma2=sigma2)
    if fam != "besq":
        raise ValueError("family must be 'bm' or 'besq'")
    if route is not None:
        spec = EnsembleSpec(route, N, sigma2=sigma2)
        if spec.nu != nu:
            raise ValueError(f"route {route} has nu = {spec.nu}, not {nu}")
        return spec
    return EnsembleSpec("chGUE", N, nu=nu, sigma2=sigma2)


def _report(op, params, grid, mc, exact):
    est = np.atleast_1d(np.asarray(mc.estimate, dtype=float))
    err = np.atleast_1d(np.asarray(mc.stderr, dtype=float))
    exact = np.atleast_1d(np.asarray(exact, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(err > 0, (est - exact) / err, np.where(est == exact, 0.0, np.inf))
    within2 = float(np.mean(np.abs(z) <= 2.0))
    ok = bool(np.all(np.abs(z) <= Z_MAX))
    if z.size >= MIN_GRID_FOR_FRACTION:
        ok = ok and within2 >= FRACTION_WITHIN_2
    return {
        "op": op,
        "params": {**params, "samples": mc.samples, "seed": mc.seed},
        "grid": np.asarray(grid, dtype=float).tolist(),
        "estimates": est.tolist(),
        "closed_form": exact.tolist(),
        "stderr": err.tolist(),
        "z": z.tolist(),
        "frac_within_2": within2,
        "pass": ok,
    }


def _extended(family, N, nu, T, x, y):
    if family == "bm":
        return ext_hermite_kernel(N, T, x, y)
    return ext_laguerre_kernel(N, nu, T, x, y)


def _params(family, N, nu, sigma2, t, **extra):
    return {"family": family, "N": N, "nu": nu if family == "besq" else None, "sigma2": sigma2, "t": t, **extra}


def verify_onepoint(family, N, nu, sigma2, t, grid, samples, seed=None, threads=1, route=None):
    """``E[K^Xi(t, x; t, x)]`` against the extended kernel at ``t + sigma2`` on a grid of ``x``."""
    family = str(family).lower()
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    spec = initial_law(family, N, nu, sigma2, route)

    def f(atoms):
        plus = phi_plus_batch(family, t, grid, atoms, nu)
        minus = phi_minus_batch(family, t, grid, atoms, nu)
        return np.einsum("sng,sng->sg", plus, minus)

    mc = mc_expectation(spec, f, samples, resolve_seed(seed), threads=threads)
    exact = _extended(family, N, nu, t + sigma2, grid, grid)
    return _report("onepoint", _params(family, N, nu, sigma2, t), grid, mc, exact)


def verify_det_block(family, N, nu, sigma2, t, points, samples, seed=None, threads=1, route=None):
    """``E det[K^Xi(t, x_j; t, x_k)]`` for each ``L``-tuple in ``points`` (shape ``(G, L)`` or ``(L,)``)."""
    family = str(family).lower()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    G, L = points.shape
    if L > N:
        raise ValueError("block size L must not exceed N")
    if any(np.unique(row).size != L for row in points):
        raise ValueError("points in a block must be distinct")
    spec = initial_law(family, N, nu, sigma2, route)

    def f(atoms):
        out = np.empty((atoms.shape[0], G))
        for g, row in enumerate(points):
            out[:, g] = det(kernel_batch(family, t, row, t, row, atoms, nu))
        return out

    mc = mc_expectation(spec, f, samples, resolve_seed(seed), threads=threads)
    exact = [det(_extended(family, N, nu, t + sigma2, row[:, None], row[None, :])) for row in points]
    return _report("det_block", _params(family, N, nu, sigma2, t, L=L), points, mc, exact)


def verify_density_shift(family, N, nu, sigma2, t, configs, samples, seed=None, threads=1, route=None):
    """Averaged single-time density from the random start against the density from ``N delta_0`` at ``t + sigma2``.

    ``configs`` are ordered test configurations, shape ``(G, N)`` or ``(N,)``.
    The report also carries the ensemble pdf at ``t + sigma2`` as a second
    closed form (``ensemble_pdf``).
    """
    family = str(family).lower()
    configs = np.atleast_2d(np.asarray(configs, dtype=float))
    if configs.shape[1] != N:
        raise ValueError("test configurations need N points")
    spec = initial_law(family, N, nu, sigma2, route)

    def f(atoms):
        out = np.empty((atoms.shape[0], configs.shape[0]))
        for g, y in enumerate(configs):
            plus = phi_plus_batch(family, t, y, atoms, nu)  # (S, n, k)
            out[:, g] = vandermonde_product(y) * det(plus)
        return out

    mc = mc_expectation(spec, f, samples, resolve_seed(seed), threads=threads)
    T = t + sigma2
    delta0 = InitialConfig.delta0(N)
    exact = [multitime_pdf(family, [T], [y], delta0, nu) for y in configs]
    if family == "bm":
        ensemble = [float(gue_pdf(N, T, y)) for y in configs]
    else:
        ensemble = [float(chgue_pdf(N, nu, T, y)) for y in configs]
    rep = _report("density_shift", _params(family, N, nu, sigma2, t), configs, mc, exact)
    rep["ensemble_pdf"] = ensemble
    return rep


def verify_spacetime(family, N, nu, sigma2, s, t, pairs, samples, seed=None, threads=1, route=None):
    """Two-time check with one point per time.

    For each ``(x, y)`` in ``pairs`` the ``2 x 2`` determinant of the kernel
    at ``(s, x)`` and ``(t, y)`` is averaged and compared with the same
    determinant of the ``N delta_0`` kernel at ``(s + sigma2, t + sigma2)``.
    """
    family = str(family).lower()
    if not 0 < s < t:
        raise ValueError("need 0 < s < t")
    pairs = np.atleast_2d(np.asarray(pairs, dtype=float))
    spec = initial_law(family, N, nu, sigma2, route)

    def f(atoms):
        out = np.empty((atoms.shape[0], pairs.shape[0]))
        for g, (x, y) in enumerate(pairs):
            kss = kernel_batch(family, s, [x], s, [x], atoms, nu)[:, 0, 0]
            kst = kernel_batch(family, s, [x], t, [y], atoms, nu)[:, 0, 0]
            kts = kernel_batch(family, t, [y], s, [x], atoms, nu)[:, 0, 0]
            ktt = kernel_batch(family, t, [y], t, [y], atoms, nu)[:, 0, 0]
            out[:, g] = kss * ktt - kst * kts
        return out

    mc = mc_expectation(spec, f, samples, resolve_seed(seed), threads=threads)
    delta0 = InitialConfig.delta0(N)
    S, T = s + sigma2, t + sigma2
    exact = []
    for x, y in pairs:
        k = np.array(
            [
                [corr_kernel(family, S, x, S, x, delta0, nu), corr_kernel(family, S, x, T, y, delta0, nu)],
                [corr_kernel(family, T, y, S, x, delta0, nu), corr_kernel(family, T, y, T, y, delta0, nu)],
            ]
        )
        exact.append(det(k))
    return _report("spacetime", _params(family, N, nu, sigma2, t, s=s), pairs, mc, exact)
