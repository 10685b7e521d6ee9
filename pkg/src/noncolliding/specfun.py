"""Special functions and classical orthogonal polynomials.

Everything here works on scalars or numpy arrays and accepts complex
arguments unless noted.  Polynomials are evaluated by their three-term
recurrences; the explicit finite sums (``hermite_series``,
``laguerre_series``) are summed in exact rational arithmetic and kept as
independent routes for cross-checking.

Bessel functions are summed from their power series.  The summation stops
once a term drops below ``SERIES_RTOL`` times the partial sum, with a hard
cap of ``SERIES_MAX_TERMS`` terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, ive, jv

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 500
# beyond this G_mu(u) needs more terms than the cap allows
LARGE_ARGUMENT = 2.0e4
# alternating series for G_mu(-u) loses about exp(2 sqrt u) relative accuracy
ALTERNATING_LIMIT = 16.0

__all__ = [
    "PolyFamily",
    "hermite",
    "laguerre",
    "hermite_series",
    "laguerre_series",
    "monic_hermite",
    "monic_laguerre",
    "monic_recurrence",
    "bessel_i",
    "bessel_j",
    "bessel_g",
    "log_bessel_g",
    "log_gamma",
    "christoffel_darboux",
    "CoincidenceError",
]


class CoincidenceError(ValueError):
    """Raised when a ratio formula is evaluated at (nearly) coincident points."""


def _check_nu(nu):
    if not nu > -1:
        raise ValueError(f"index nu must satisfy nu > -1, got {nu}")


def _check_sigma2(sigma2):
    if not sigma2 > 0:
        raise ValueError(f"variance sigma2 must be positive, got {sigma2}")


@dataclass(frozen=True)
class PolyFamily:
    """Hermite or Laguerre family; ``nu`` is only meaningful for Laguerre."""

    kind: str
    nu: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("hermite", "laguerre"):
            raise ValueError(f"unknown polynomial family {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "laguerre":
            _check_nu(self.nu)
        else:
            object.__setattr__(self, "nu", 0.0)

    @classmethod
    def hermite(cls):
        return cls("hermite")

    @classmethod
    def laguerre(cls, nu=0.0):
        return cls("laguerre", nu)

    def __call__(self, n, x):
        if self.kind == "hermite":
            return hermite(n, x)
        return laguerre(n, self.nu, x)

    def cd_weight(self, n):
        """Weight of ``P_n(x) P_n(y)`` in the Christoffel-Darboux sum."""
        if self.kind == "hermite":
            return math.exp(-n * math.log(2.0) - math.lgamma(n + 1))
        return math.exp(math.lgamma(n + 1) - math.lgamma(n + self.nu + 1))


def _as_array(x):
    x = np.asarray(x)
    if x.dtype.kind not in "fc":
        x = x.astype(float)
    return x


def hermite(n, x):
    """Physicists' Hermite polynomial ``H_n(x)`` via ``H_{n+1} = 2x H_n - 2n H_{n-1}``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = _as_array(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev[()]
    cur = 2 * x
    for k in range(1, n):
        prev, cur = cur, 2 * x * cur - 2 * k * prev
    return cur[()]


def laguerre(n, nu, x):
    """Generalized Laguerre polynomial ``L_n^nu(x)`` via its three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    _check_nu(nu)
    x = _as_array(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev[()]
    cur = 1 + nu - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + nu - x) * cur - (k + nu) * prev) / (k + 1)
    return cur[()]


def _exact_horner(coefs, x):
    """``sum_k coefs[k] x^k`` in exact rational arithmetic, rounded once at the end.

    Float inputs are exact rationals, so the alternating sums lose nothing
    to cancellation; complex inputs are carried as rational ``(re, im)`` pairs.
    """
    z = complex(x)
    xr, xi = Fraction(z.real), Fraction(z.imag)
    re, im = Fraction(0), Fraction(0)
    for c in reversed(coefs):
        re, im = re * xr - im * xi + c, re * xi + im * xr
    return complex(float(re), float(im))


def _series_eval(coefs, x):
    x = _as_array(x)
    out = np.array([_exact_horner(coefs, v) for v in x.ravel()]).reshape(x.shape)
    return (out if x.dtype.kind == "c" else out.real)[()]


def hermite_series(n, x):
    """``H_n(x) = n! sum_k (-1)^k (2x)^(n-2k) / (k! (n-2k)!)``, summed exactly."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    coefs = [Fraction(0)] * (n + 1)
    for k in range(n // 2 + 1):
        coefs[n - 2 * k] = Fraction((-1) ** k * math.factorial(n) * 2 ** (n - 2 * k), math.factorial(k) * math.factorial(n - 2 * k))
    return _series_eval(coefs, x)


def laguerre_series(n, nu, x):
    """``L_n^nu(x) = sum_k (-1)^k Gamma(n+nu+1) x^k / (Gamma(k+nu+1) (n-k)! k!)``, summed exactly."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    _check_nu(nu)
    nu = Fraction(nu)
    coefs = []
    for k in range(n + 1):
        rising = math.prod((i + nu for i in range(k + 1, n + 1)), start=Fraction(1))
        coefs.append((-1) ** k * rising / (math.factorial(n - k) * math.factorial(k)))
    return _series_eval(coefs, x)


def monic_recurrence(family, sigma2):
    """Coefficients ``(b_l, c_l)`` of ``P_{l+1} = (a - b_l) P_l - c_l P_{l-1}``.

    ``family`` is a :class:`PolyFamily`; the monic polynomials are the
    ``monic_hermite`` / ``monic_laguerre`` scalings at variance ``sigma2``.
    """
    _check_sigma2(sigma2)
    if family.kind == "hermite":
        return (lambda l: 0.0), (lambda l: sigma2 * l)
    nu = family.nu
    return (lambda l: 2 * sigma2 * (2 * l + nu + 1)), (lambda l: 4 * sigma2 * sigma2 * l * (l + nu))


def _monic(family, ell, alpha, sigma2):
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    b, c = monic_recurrence(family, sigma2)
    alpha = _as_array(alpha)
    prev = np.ones_like(alpha)
    if ell == 0:
        return prev[()]
    cur = alpha - b(0)
    for l in range(1, ell):
        prev, cur = cur, (alpha - b(l)) * cur - c(l) * prev
    return cur[()]


def monic_hermite(ell, alpha, sigma2):
    """``(sigma2/2)^(ell/2) H_ell(alpha / sqrt(2 sigma2))``, monic in ``alpha``."""
    return _monic(PolyFamily.hermite(), ell, alpha, sigma2)


def monic_laguerre(ell, nu, alpha, sigma2):
    """``(-2 sigma2)^ell ell! L_ell^nu(alpha / (2 sigma2))``, monic in ``alpha``."""
    return _monic(PolyFamily.laguerre(nu), ell, alpha, sigma2)


def log_gamma(x):
    """``ln Gamma(x)`` for real ``x > 0``."""
    if np.ndim(x) == 0:
        if not x > 0:
            raise ValueError(f"log_gamma needs x > 0, got {x}")
        return math.lgamma(x)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma needs x > 0")
    return np.vectorize(math.lgamma, otypes=[float])(x)


def _principal_power(z, p):
    """``z**p`` with ``-pi < arg z <= pi``."""
    z = complex(z)
    if z == 0:
        return 0.0 if p > 0 else (1.0 if p == 0 else math.inf)
    return np.exp(p * np.log(z))


def _series(nu, w, sign):
    """``sum_n (sign * w)^n / (n! Gamma(n+nu+1))`` with the global stopping rule."""
    term = 1.0 / math.gamma(nu + 1) if nu + 1 < 171 else math.exp(-math.lgamma(nu + 1))
    total = term
    for n in range(1, SERIES_MAX_TERMS):
        term = term * sign * w / (n * (n + nu))
        total = total + term
        if abs(term) < SERIES_RTOL * abs(total):
            break
    return total


def bessel_i(nu, z):
    """Modified Bessel function ``I_nu(z)`` from its power series.

    ``z**nu`` uses the principal branch.  Complex support is validated on
    the positive real and imaginary axes, which is where the transition
    densities need it.
    """
    _check_nu(nu)
    if np.ndim(z):
        return np.vectorize(lambda v: bessel_i(nu, v), otypes=[complex])(z)
    z = complex(z)
    if z == 0:
        return complex(1.0 if nu == 0 else (0.0 if nu > 0 else math.inf))
    return complex(_principal_power(z / 2, nu) * _series(nu, (z / 2) ** 2, 1))


def bessel_j(nu, x):
    """Bessel function ``J_nu(x)`` for real ``x >= 0`` from its alternating series."""
    _check_nu(nu)
    if np.ndim(x):
        return np.vectorize(lambda v: bessel_j(nu, v), otypes=[float])(x)
    if x < 0:
        raise ValueError("bessel_j is implemented for x >= 0 only")
    if x == 0:
        return 1.0 if nu == 0 else (0.0 if nu > 0 else math.inf)
    return float((x / 2) ** nu * _series(nu, (x / 2) ** 2, -1))


def _n_terms(u_max):
    n = int(2.2 * math.sqrt(u_max) + 40)
    if n > SERIES_MAX_TERMS:
        raise OverflowError(
            f"series argument {u_max:.3g} needs more than {SERIES_MAX_TERMS} terms"
        )
    return n


def log_bessel_g(mu, u):
    """``log G_mu(u)`` for ``u >= 0`` where ``G_mu(u) = sum_n u^n / (n! Gamma(n+mu+1))``.

    ``G_mu(u) = u^(-mu/2) I_mu(2 sqrt(u))`` is the entire part of the modified
    Bessel function.  The sum is done in log space so that large arguments
    combined with small exponential prefactors do not overflow.
    """
    mu_arr = np.asarray(mu, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("log_bessel_g needs u >= 0; use bessel_g for negative arguments")
    mu_b, u_b = np.broadcast_arrays(mu_arr, u)
    big = u_b > LARGE_ARGUMENT
    if np.any(big):
        # past the series cap: scaled I_mu from scipy, log G = log ive(2 sqrt u) + 2 sqrt u - (mu/2) log u
        out = np.empty(u_b.shape, dtype=float)
        z = 2.0 * np.sqrt(u_b[big])
        out[big] = np.log(ive(mu_b[big], z)) + z - 0.5 * mu_b[big] * np.log(u_b[big])
        if np.any(~big):
            out[~big] = log_bessel_g(mu_b[~big], u_b[~big])
        return out[()]
    n_terms = _n_terms(float(u_b.max(initial=0.0)))
    n = np.arange(n_terms, dtype=float).reshape((-1,) + (1,) * u_b.ndim)
    with np.errstate(divide="ignore", invalid="ignore"):
        logu = np.log(u_b)
        logt = np.where(n == 0, 0.0, n * logu)
    logt = logt - gammaln(n + 1) - gammaln(n + mu_b + 1)
    peak = logt.max(axis=0)
    out = peak + np.log(np.exp(logt - peak).sum(axis=0))
    return out[()]


def bessel_g(mu, u):
    """``G_mu(u) = sum_n u^n / (n! Gamma(n+mu+1))`` for real ``u`` of either sign.

    For ``u < 0`` this is ``|u|^(-mu/2) J_mu(2 sqrt|u|)``.  The alternating
    series is summed directly down to ``u = -ALTERNATING_LIMIT``; past that
    point scipy's ``jv`` is used.
    """
    u = np.asarray(u, dtype=float)
    mu_b, u_b = np.broadcast_arrays(np.asarray(mu, dtype=float), u)
    out = np.empty(u_b.shape, dtype=float)
    pos = u_b >= 0
    if np.any(pos):
        out[pos] = np.exp(log_bessel_g(mu_b[pos], u_b[pos]))
    small = ~pos & (u_b >= -ALTERNATING_LIMIT)
    if np.any(small):
        un = u_b[small]
        mun = mu_b[small]
        n_terms = _n_terms(float(-un.min()))
        term = np.exp(-gammaln(mun + 1))
        total = term.copy()
        for k in range(1, n_terms):
            term = term * un / (k * (k + mun))
            total += term
        out[small] = total
    big = u_b < -ALTERNATING_LIMIT
    if np.any(big):
        # the alternating series cancels badly here; use J from scipy
        w = -u_b[big]
        out[big] = w ** (-0.5 * mu_b[big]) * jv(mu_b[big], 2.0 * np.sqrt(w))
    return out[()]


def christoffel_darboux(family, N, x, y, check=True, rtol=1e-10):
    """Christoffel-Darboux kernel ``sum_{n<N} w_n P_n(x) P_n(y)``.

    Hermite weights are ``1/(2^n n!)`` and Laguerre weights ``n!/Gamma(n+nu+1)``.
    The direct sum is returned.  With ``check=True`` it is compared against
    the two-by-two determinant ratio form and a :class:`CoincidenceError`
    is raised if ``x`` and ``y`` are too close for that form.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if isinstance(family, str):
        family = PolyFamily(family)
    total = sum(family.cd_weight(n) * family(n, x) * family(n, y) for n in range(N))
    if not check:
        return total
    scale = max(1.0, abs(x), abs(y))
    if abs(x - y) < 1e-8 * scale:
        raise CoincidenceError("ratio form of the Christoffel-Darboux kernel needs x != y")
    bracket = family(N, x) * family(N - 1, y) - family(N, y) * family(N - 1, x)
    if family.kind == "hermite":
        pref = math.exp(-N * math.log(2.0) - math.lgamma(N))
    else:
        pref = -math.exp(math.lgamma(N + 1) - math.lgamma(N + family.nu))
    ratio = pref * bracket / (x - y)
    err = abs(ratio - total) / max(abs(ratio), abs(total), 1e-300)
    if err > rtol:
        raise ArithmeticError(
            f"Christoffel-Darboux sum and ratio forms disagree (relative {err:.2e})"
        )
    return total
