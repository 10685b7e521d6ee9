"""Biorthogonal functions, correlation kernels and multitime densities.

For an initial configuration ``xi = delta_{a_1} + .. + delta_{a_N}`` with
``a_1 <= .. <= a_N`` the ``+`` functions are contour integrals of the
transition density against ``1 / prod_{i<=n+1} (s - a_i)``.  By the residue
theorem this is the (confluent) divided difference
``g[a_1, .., a_{n+1}]`` of ``g(s) = p(t, x | s)``, computed here from exact
Taylor coefficients of ``g`` at each atom.

The ``-`` functions are monic polynomials.  With ``prod_{i<=n} (w - a_i) =
sum_m c_m w^m`` they reduce to moments of the backward kernel,

    phi^-_n(t, y) = sum_m c_m Hhat_m(y; t)           (Brownian motion)
    phi^-_n(t, y) = sum_m c_m Lhat^nu_m(y; t)        (squared Bessel)

since ``E[(y + i sqrt(t) Z)^m] = Hhat_m(y; t)`` for a standard normal ``Z``
and the ``m``-th moment of the negative-time squared Bessel kernel over the
negative half line is ``Lhat^nu_m(y; t)``.

Families are named ``"bm"`` and ``"besq"``; squared Bessel functions take
the index ``nu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .densities import bm_kernel, besq_kernel, besq_support_bound, integrate_half_line, km_det_besq, km_det_bm
from .detkit import det, vandermonde_product
from .specfun import _check_nu, bessel_g, hermite, laguerre, log_bessel_g, monic_hermite, monic_laguerre

__all__ = [
    "InitialConfig",
    "phi_plus",
    "phi_minus",
    "phi_nu_plus",
    "phi_nu_minus",
    "h_plus_det",
    "h_minus_det",
    "ext_hermite_kernel",
    "ext_laguerre_kernel",
    "corr_kernel",
    "corr_fn",
    "multitime_pdf",
    "entire_factor",
    "kernel_integral_form",
    "phi_plus_batch",
    "phi_minus_batch",
    "kernel_batch",
]

FAMILIES = ("bm", "besq")


def _family(family):
    fam = str(family).lower()
    if fam not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    return fam


@dataclass(frozen=True)
class InitialConfig:
    """Initial particle configuration as a sorted tuple of points with repeats.

    ``truncation(n)`` gives the first ``n`` points ``a_1 .. a_n``.
    """

    points: tuple

    def __post_init__(self):
        pts = tuple(sorted(float(p) for p in self.points))
        if not pts:
            raise ValueError("an initial configuration needs at least one point")
        if not all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)

    @classmethod
    def delta0(cls, N: int) -> InitialConfig:
        """All ``N`` particles at the origin."""
        return cls((0.0,) * int(N))

    @classmethod
    def from_atoms(cls, atoms, multiplicities) -> InitialConfig:
        pts = []
        for a, m in zip(atoms, multiplicities):
            if int(m) != m or m < 1:
                raise ValueError("multiplicities must be positive integers")
            pts.extend([float(a)] * int(m))
        return cls(tuple(pts))

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def atoms(self) -> tuple:
        return tuple(sorted(set(self.points)))

    @property
    def multiplicities(self) -> tuple:
        return tuple(self.points.count(a) for a in self.atoms)

    @property
    def is_delta0(self) -> bool:
        return all(p == 0.0 for p in self.points)

    @property
    def is_simple(self) -> bool:
        return len(self.atoms) == self.N

    def truncation(self, n: int) -> tuple:
        if not 0 <= n <= self.N:
            raise ValueError(f"truncation index must lie in [0, {self.N}]")
        return self.points[:n]


def _config(xi) -> InitialConfig:
    return xi if isinstance(xi, InitialConfig) else InitialConfig(tuple(np.atleast_1d(xi)))


def _check_n(n, xi):
    if int(n) != n or not 0 <= n < xi.N:
        raise ValueError(f"index n must satisfy 0 <= n <= N-1 = {xi.N - 1}")
    return int(n)


# -- Taylor coefficients of the transition densities in the start point --------


def _bm_taylor(t, x, a, K):
    """Coefficients ``c_k`` with ``p(t, x | a + h) = sum_k c_k h^k``, shape ``(K,) + x.shape``."""
    u = (a - x) / math.sqrt(2 * t)
    base = np.exp(-u * u) / math.sqrt(2 * math.pi * t)
    out = []
    for k in range(K):
        scale = (-1) ** k * (2 * t) ** (-0.5 * k) / math.factorial(k)
        out.append(base * scale * np.real(hermite(k, u)))
    return np.array(out)


def _besq_taylor(nu, t, x, a, K):
    """Coefficients of ``s -> p^nu(t, x | s)`` around ``s = a >= 0``.

    ``p^nu(t, x | s) = x^nu e^{-x/2t} (2t)^{-nu-1} e^{-s/2t} G_nu(kappa s)``
    with ``kappa = x / 4t^2``, and ``d^k/ds^k G_nu(kappa s) = kappa^k G_{nu+k}(kappa s)``.
    """
    if a < 0:
        raise ValueError("squared Bessel atoms must be nonnegative")
    tt = 2 * t
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(x)
    g_terms = []
    for k in range(K):
        p = nu + k
        with np.errstate(invalid="ignore"):
            lx = np.where(x == 0, 0.0 if p == 0 else (-np.inf if p > 0 else np.inf), p * logx)
        lg = log_bessel_g(p, x * a / (tt * tt))
        log_term = lx - k * math.log(tt * tt) + lg - (x + a) / tt - (nu + 1) * math.log(tt) - math.lgamma(k + 1)
        g_terms.append(np.exp(log_term))
    e_terms = [(-1.0 / tt) ** j / math.factorial(j) for j in range(K)]
    return np.array([sum(g_terms[k] * e_terms[j - k] for k in range(j + 1)) for j in range(K)])


def _inverse_factor_series(a, others, K):
    """Taylor coefficients at ``s = a`` of ``prod_b (s - b)^(-m_b)`` up to order ``K-1``."""
    series = np.zeros(K)
    series[0] = 1.0
    for b, m in others:
        d = a - b
        f = np.array([(-1) ** k * comb(m + k - 1, k, exact=True) / d ** (m + k) for k in range(K)])
        series = np.convolve(series, f)[:K]
    return series


def _residue_sum(taylor, points, x):
    """``(1 / 2 pi i) oint g(s) / prod (s - a) ds`` over the atoms of ``points``."""
    atoms = sorted(set(points))
    mult = {a: points.count(a) for a in atoms}
    total = 0.0
    for a in atoms:
        m = mult[a]
        others = [(b, mult[b]) for b in atoms if b != a]
        w = _inverse_factor_series(a, others, m)
        g = taylor(a, m)
        total = total + sum(g[k] * w[m - 1 - k] for k in range(m))
    return total


def _poly_coeffs(roots):
    """Ascending coefficients of ``prod (w - r)``."""
    c = np.array([1.0])
    for r in roots:
        c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
    return c


# -- phi functions ---------------------------------------------------------------


def phi_plus(n, t, x, xi, method="auto"):
    """``phi^+_n(t, x; xi)`` for Brownian motion.

    ``method`` is ``"residue"``, ``"closed"`` (only for ``xi = N delta_0``) or
    ``"auto"`` (closed form when available).
    """
    xi = _config(xi)
    n = _check_n(n, xi)
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if method == "auto":
        method = "closed" if xi.is_delta0 else "residue"
    if method == "closed":
        if not xi.is_delta0:
            raise ValueError("the closed form needs xi = N delta_0")
        u = x / math.sqrt(2 * t)
        log_pref = -0.5 * (n + 1) * math.log(t) - 0.5 * n * math.log(2.0) - math.lgamma(n + 1) - 0.5 * math.log(2 * math.pi)
        return (math.exp(log_pref) * np.real(hermite(n, u)) * np.exp(-u * u))[()]
    if method != "residue":
        raise ValueError(f"unknown method {method!r}")
    return np.asarray(_residue_sum(lambda a, K: _bm_taylor(t, x, a, K), list(xi.truncation(n + 1)), x))[()]


def phi_nu_plus(n, nu, t, x, xi, method="auto"):
    """``phi^{nu,+}_n(t, x; xi)`` for the squared Bessel process; methods as in :func:`phi_plus`."""
    _check_nu(nu)
    xi = _config(xi)
    n = _check_n(n, xi)
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    if method == "auto":
        method = "closed" if xi.is_delta0 else "residue"
    if method == "closed":
        if not xi.is_delta0:
            raise ValueError("the closed form needs xi = N delta_0")
        log_pref = -(n + 1) * math.log(t) - (n + nu + 1) * math.log(2.0) - math.lgamma(n + nu + 1)
        with np.errstate(divide="ignore"):
            xpow = np.where(x == 0, 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf), (x / t) ** nu)
        val = (-1) ** n * math.exp(log_pref) * xpow * np.exp(-x / (2 * t)) * np.real(laguerre(n, nu, x / (2 * t)))
        return np.asarray(val)[()]
    if method != "residue":
        raise ValueError(f"unknown method {method!r}")
    if min(xi.points) < 0:
        raise ValueError("squared Bessel configurations must be nonnegative")
    return np.asarray(_residue_sum(lambda a, K: _besq_taylor(nu, t, x, a, K), list(xi.truncation(n + 1)), x))[()]


def phi_minus(n, t, x, xi, method="auto"):
    """``phi^-_n(t, x; xi)``: the monic polynomial ``E[prod_{a in xi_n} (x + i sqrt(t) Z - a)]``.

    ``method="moment"`` expands in monic Hermite polynomials of variance
    ``t``; ``"closed"`` uses ``Hhat_n(x; t)`` for ``xi = N delta_0``.
    """
    xi = _config(xi)
    n = _check_n(n, xi)
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if method == "auto":
        method = "closed" if xi.is_delta0 else "moment"
    if method == "closed":
        if not xi.is_delta0:
            raise ValueError("the closed form needs xi = N delta_0")
        return np.real(monic_hermite(n, x, t))[()] if n else np.ones_like(x)[()]
    if method != "moment":
        raise ValueError(f"unknown method {method!r}")
    c = _poly_coeffs(xi.truncation(n))
    return np.asarray(sum(c[m] * np.real(monic_hermite(m, x, t)) for m in range(n + 1)))[()]


def _phi_nu_minus_quadrature(n, nu, t, x, xi):
    roots = xi.truncation(n)
    x = float(x)
    tau2 = 2 * t
    # the backward kernel decays like exp(-r / 2t) on the negative half line
    upper = tau2 * (80 + 4 * n) + 10 * t

    def f(r):
        # kernel over r^nu; the weight r^nu is applied by the quadrature rule
        dens = math.exp((x - r) / tau2) / tau2 ** (nu + 1) * float(bessel_g(nu, -x * r / (tau2 * tau2)))
        return dens * float(np.prod([-r - a for a in roots]))

    return integrate_half_line(f, upper, power=nu, rtol=1e-11)


def phi_nu_minus(n, nu, t, x, xi, method="auto"):
    """``phi^{nu,-}_n(t, x; xi)``, a monic polynomial of degree ``n`` in ``x``.

    ``method="moment"`` expands in monic Laguerre polynomials of variance
    ``t``; ``"quadrature"`` integrates the negative-time kernel over the
    negative half line; ``"closed"`` uses ``Lhat^nu_n(x; t)`` for
    ``xi = N delta_0``.
    """
    _check_nu(nu)
    xi = _config(xi)
    n = _check_n(n, xi)
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    if method == "auto":
        method = "closed" if xi.is_delta0 else "moment"
    if method == "closed":
        if not xi.is_delta0:
            raise ValueError("the closed form needs xi = N delta_0")
        return np.real(monic_laguerre(n, nu, x, t))[()] if n else np.ones_like(x)[()]
    if method == "moment":
        c = _poly_coeffs(xi.truncation(n))
        return np.asarray(sum(c[m] * np.real(monic_laguerre(m, nu, x, t)) for m in range(n + 1)))[()]
    if method == "quadrature":
        vals = [_phi_nu_minus_quadrature(n, nu, t, xv, xi) for xv in np.atleast_1d(x)]
        return np.asarray(vals).reshape(x.shape)[()]
    raise ValueError(f"unknown method {method!r}")


def _phi_pair(family, nu):
    fam = _family(family)
    if fam == "bm":
        return phi_plus, phi_minus
    return (lambda n, t, x, xi, method="auto": phi_nu_plus(n, nu, t, x, xi, method)), (
        lambda n, t, x, xi, method="auto": phi_nu_minus(n, nu, t, x, xi, method)
    )


def h_plus_det(family, t, y, xi, nu=0.0):
    """``det[phi^+_{j-1}(t, y_k; xi)]``."""
    xi = _config(xi)
    y = np.asarray(y, dtype=float)
    if y.shape != (xi.N,):
        raise ValueError("y must have N entries")
    plus, _ = _phi_pair(family, nu)
    m = np.array([plus(j, t, y, xi) for j in range(xi.N)])
    return float(det(m))


def h_minus_det(family, t, y, xi, nu=0.0, check=True, rtol=1e-8):
    """``det[phi^-_{j-1}(t, y_k; xi)]``, which equals ``h_N(y)`` for every ``t`` and ``xi``.

    Returns ``h_N(y)``; with ``check=True`` the determinant is also formed and
    compared.
    """
    xi = _config(xi)
    y = np.asarray(y, dtype=float)
    if y.shape != (xi.N,):
        raise ValueError("y must have N entries")
    h = float(vandermonde_product(y))
    if check:
        _, minus = _phi_pair(family, nu)
        m = np.array([np.broadcast_to(minus(j, t, y, xi), y.shape) for j in range(xi.N)])
        d = float(det(m))
        scale = max(1.0, float(np.max(np.abs(y)))) ** (xi.N * (xi.N - 1) / 2)
        if abs(d - h) > rtol * max(abs(h), abs(d), 1e-300 + 1e-14 * scale):
            raise ArithmeticError(f"h^- determinant {d} differs from h_N(y) = {h}")
    return h


# -- kernels ---------------------------------------------------------------------


def ext_hermite_kernel(N, T, x, y):
    """Extended Hermite kernel at equal times ``T``.

    ``exp(-x^2/2T) / sqrt(2 pi T) * sum_{n<N} H_n(x/sqrt(2T)) H_n(y/sqrt(2T)) / (2^n n!)``
    """
    if not T > 0:
        raise ValueError("T must be positive")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    u, v = x / math.sqrt(2 * T), y / math.sqrt(2 * T)
    total = np.zeros(x.shape)
    hu_prev, hu = np.zeros(x.shape), np.ones(x.shape)
    hv_prev, hv = np.zeros(x.shape), np.ones(x.shape)
    for n in range(N):
        total = total + hu * hv * math.exp(-n * math.log(2.0) - math.lgamma(n + 1))
        hu_prev, hu = hu, 2 * u * hu - 2 * n * hu_prev
        hv_prev, hv = hv, 2 * v * hv - 2 * n * hv_prev
    return (np.exp(-u * u) / math.sqrt(2 * math.pi * T) * total)[()]


def ext_laguerre_kernel(N, nu, T, x, y):
    """Extended Laguerre kernel at equal times ``T``.

    ``x^nu exp(-x/2T) / (2T)^(nu+1) * sum_{n<N} n!/Gamma(n+nu+1) L^nu_n(x/2T) L^nu_n(y/2T)``
    """
    _check_nu(nu)
    if not T > 0:
        raise ValueError("T must be positive")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("x and y must be nonnegative")
    u, v = x / (2 * T), y / (2 * T)
    total = np.zeros(x.shape)
    lu_prev, lu = np.zeros(x.shape), np.ones(x.shape)
    lv_prev, lv = np.zeros(x.shape), np.ones(x.shape)
    for n in range(N):
        total = total + lu * lv * math.exp(math.lgamma(n + 1) - math.lgamma(n + nu + 1))
        lu_prev, lu = lu, ((2 * n + 1 + nu - u) * lu - (n + nu) * lu_prev) / (n + 1)
        lv_prev, lv = lv, ((2 * n + 1 + nu - v) * lv - (n + nu) * lv_prev) / (n + 1)
    with np.errstate(divide="ignore"):
        xpow = np.where(x == 0, 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf), x**nu)
    return (xpow * np.exp(-u) / (2 * T) ** (nu + 1) * total)[()]


def _transition(family, nu, t, x, y):
    """``p(t, x | y)`` of the family."""
    if _family(family) == "bm":
        return np.real(bm_kernel(t, x, y))
    return besq_kernel(nu, t, x, y)


def corr_kernel(family, s, x, t, y, xi, nu=0.0):
    """Space-time correlation kernel ``K(s, x; t, y)`` for the process started at ``xi``.

    ``sum_{n<N} phi^+_n(s, x) phi^-_n(t, y) - 1(s > t) p(s - t, x | y)``.
    Supports ``xi`` with distinct points and ``xi = N delta_0``.
    """
    xi = _config(xi)
    if not (xi.is_simple or xi.is_delta0):
        raise ValueError("correlation kernels support distinct initial points or N delta_0 only")
    if not (s > 0 and t > 0):
        raise ValueError("times must be positive")
    plus, minus = _phi_pair(family, nu)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    total = sum(plus(n, s, x, xi) * minus(n, t, y, xi) for n in range(xi.N))
    if s > t:
        total = total - _transition(family, nu, s - t, x, y)
    return np.asarray(total)[()]


def corr_fn(family, blocks, xi, nu=0.0):
    """Multitime correlation function: determinant of the kernel over all (time, point) pairs.

    ``blocks`` is a sequence of ``(t_m, points_m)`` in increasing time.
    """
    times = [float(tb) for tb, _ in blocks]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("blocks must be strictly increasing in time")
    idx = [(tb, float(p)) for tb, pts in blocks for p in np.atleast_1d(pts)]
    m = np.array([[corr_kernel(family, s, x, t, y, xi, nu) for (t, y) in idx] for (s, x) in idx])
    return float(det(m))


def multitime_pdf(family, times, configs, xi, nu=0.0):
    """Multitime density ``h_N(x^(M)) prod_m f(t_{m+1}-t_m; x^(m+1) | x^(m)) h^+(t_1, x^(1); xi)``."""
    xi = _config(xi)
    times = [float(v) for v in times]
    if len(times) != len(configs) or not times:
        raise ValueError("need one configuration per time")
    if times[0] <= 0 or any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be positive and strictly increasing")
    configs = [np.asarray(c, dtype=float) for c in configs]
    fam = _family(family)
    value = h_plus_det(fam, times[0], configs[0], xi, nu)
    for m in range(len(times) - 1):
        dt = times[m + 1] - times[m]
        if fam == "bm":
            value *= km_det_bm(dt, configs[m + 1], configs[m])
        else:
            value *= km_det_besq(nu, dt, configs[m + 1], configs[m])
    return float(value * vandermonde_product(configs[-1]))


def entire_factor(xi, x, z):
    """``Phi(xi; x, z) = prod_{a in xi, a != x} (z - a) / (x - a)``."""
    xi = _config(xi)
    out = 1.0 + 0j * np.asarray(z)
    for a in xi.points:
        if a != x:
            out = out * (z - a) / (x - a)
    return out


def kernel_integral_form(family, s, x, t, y, xi, nu=0.0):
    """Kernel from its double-integral form, by quadrature over the auxiliary variable.

    For Brownian motion: ``sum_{a in xi} p(s, x | a) int_R dy' Phi(xi; a, i y') p(-t, i y' | y)``.
    For squared Bessel: ``sum_{a in xi} p(s, x | a) int_{R_-} dy' Phi(xi; a, y') p(-t, y' | y)``.
    The ``1(s > t)`` term is subtracted as in :func:`corr_kernel`.
    """
    from scipy import integrate

    xi = _config(xi)
    if not xi.is_simple:
        raise ValueError("the integral form is implemented for distinct initial points")
    fam = _family(family)
    total = 0.0
    for a in xi.points:
        if fam == "bm":
            w = 12.0 * math.sqrt(t)

            def f(v, part):
                val = entire_factor(xi, a, 1j * v) * bm_kernel(-t, 1j * v, y)
                return val.real if part == 0 else val.imag

            re = integrate.quad(f, -w, w, args=(0,), epsabs=0.0, epsrel=1e-12, limit=400)[0]
            total += float(np.real(bm_kernel(s, x, a))) * re
        else:
            upper = max(besq_support_bound(t, 0.0), 2 * t * (80 + 4 * xi.N))

            def g(r):
                return float(np.real(entire_factor(xi, a, -r))) * float(besq_kernel(nu, -t, -r, y))

            total += float(besq_kernel(nu, s, x, a)) * integrate.quad(g, 0.0, upper, epsabs=0.0, epsrel=1e-11, limit=400)[0]
    if s > t:
        total -= float(_transition(fam, nu, s - t, x, y))
    return total


# -- batched versions for Monte Carlo over initial configurations -----------------


def phi_plus_batch(family, t, x, atoms, nu=0.0):
    """``phi^+_n(t, x_g; xi_s)`` for distinct-point configurations, shape ``(S, N, G)``.

    ``atoms`` has shape ``(S, N)`` with distinct entries in each row; the
    simple-pole residue formula ``sum_j g(a_j) / prod_{i != j} (a_j - a_i)`` is used.
    """
    atoms = np.asarray(atoms, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    S, N = atoms.shape
    g = _transition(family, nu, t, x[None, None, :], atoms[:, :, None])  # (S, N, G)
    out = np.empty((S, N, x.size))
    for n in range(N):
        acc = np.zeros((S, x.size))
        for j in range(n + 1):
            denom = np.ones(S)
            for i in range(n + 1):
                if i != j:
                    denom = denom * (atoms[:, j] - atoms[:, i])
            acc += g[:, j, :] / denom[:, None]
        out[:, n, :] = acc
    return out


def phi_minus_batch(family, t, y, atoms, nu=0.0):
    """``phi^-_n(t, y_g; xi_s)``, shape ``(S, N, G)``."""
    atoms = np.asarray(atoms, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    S, N = atoms.shape
    fam = _family(family)
    if fam == "bm":
        basis = np.array([np.real(monic_hermite(m, y, t)) if m else np.ones_like(y) for m in range(N)])
    else:
        basis = np.array([np.real(monic_laguerre(m, nu, y, t)) if m else np.ones_like(y) for m in range(N)])
    out = np.empty((S, N, y.size))
    coeffs = np.zeros((S, N))
    coeffs[:, 0] = 1.0
    for n in range(N):
        out[:, n, :] = coeffs @ basis
        if n + 1 < N:
            shifted = np.zeros_like(coeffs)
            shifted[:, 1:] = coeffs[:, :-1]
            coeffs = shifted - atoms[:, n : n + 1] * coeffs
    return out


def kernel_batch(family, s, x, t, y, atoms, nu=0.0):
    """Kernel matrices ``K(s, x_g; t, y_h)`` for every configuration, shape ``(S, G, H)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    plus = phi_plus_batch(family, s, x, atoms, nu)
    minus = phi_minus_batch(family, t, y, atoms, nu)
    k = np.einsum("sng,snh->sgh", plus, minus)
    if s > t:
        k = k - _transition(family, nu, s - t, x[:, None], y[None, :])[None, :, :]
    return k
