"""Transition densities of Brownian motion and squared Bessel processes.

Both kernels are evaluated for signed time.  At negative time they are the
backward kernels that appear in the biorthogonal functions: the Brownian
kernel becomes a complex Gaussian and the squared Bessel kernel, with one
endpoint on the negative half line, turns into a real ``J``-Bessel
expression (the ``(-r)^(nu/2)`` phase and the ``I_nu`` phase at imaginary
argument cancel).

Notes
-----
Writing ``G_nu(u) = sum_n u^n / (n! Gamma(n+nu+1)) = u^(-nu/2) I_nu(2 sqrt u)``,

    p^nu(t, y | x) = y^nu exp(-(x+y)/2t) / (2t)^(nu+1) * G_nu(x y / 4 t^2)

for ``t > 0``.  This single expression covers the ``x = 0`` branch
(``G_nu(0) = 1/Gamma(nu+1)``), makes ``x^nu p`` visibly symmetric, and
continues to ``t < 0`` with one endpoint ``-r <= 0``:

    p^nu(-tau, -r | x) = r^nu exp((x-r)/2tau) / (2tau)^(nu+1) * G_nu(-x r / 4 tau^2).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .detkit import det
from .specfun import _check_nu, bessel_g, log_bessel_g

__all__ = [
    "DeltaMeasureError",
    "bm_kernel",
    "besq_kernel",
    "km_det_bm",
    "km_det_besq",
    "integrate_line",
    "integrate_half_line",
    "besq_support_bound",
]


class DeltaMeasureError(ValueError):
    """A transition density was requested at ``t = 0`` where it is a point mass."""


def _check_time(t):
    if t == 0:
        raise DeltaMeasureError("transition density at t = 0 is a delta measure")
    if not np.isfinite(t):
        raise ValueError("time must be finite")


def bm_kernel(t, y, x):
    """Brownian transition density ``(2 pi |t|)^(-1/2) exp(-(x-y)^2 / 2t)``.

    Parameters
    ----------
    t : float
        Signed time, nonzero.
    y, x : complex or array_like
        End and start points; broadcast against each other.
    """
    _check_time(t)
    y = np.asarray(y)
    x = np.asarray(x)
    out = np.exp(-((x - y) ** 2) / (2.0 * t)) / math.sqrt(2.0 * math.pi * abs(t))
    return out[()]


def besq_kernel(nu, t, y, x):
    """Transition density of the squared Bessel process of index ``nu``.

    Parameters
    ----------
    nu : float
        Index, ``nu > -1``.
    t : float
        Signed time, nonzero.
    y, x : float or array_like
        End and start points.  For ``t > 0`` both must be nonnegative.  For
        ``t < 0`` exactly one of each pair may be nonpositive, which is the
        backward kernel used by the ``-`` biorthogonal functions.

    Returns
    -------
    float or ndarray
        Real density value.
    """
    _check_nu(nu)
    _check_time(t)
    y, x = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
    if t > 0:
        if np.any(x < 0) or np.any(y < 0):
            raise ValueError("positive-time squared Bessel kernel needs x, y >= 0")
        tt = 2.0 * t
        with np.errstate(divide="ignore", invalid="ignore"):
            ylog = np.where(y == 0, 0.0 if nu == 0 else -np.inf * np.sign(nu), nu * np.log(y))
        logv = ylog - (x + y) / tt - (nu + 1) * math.log(tt) + log_bessel_g(nu, x * y / (tt * tt))
        return np.exp(logv)[()]
    # negative time: one endpoint at -r <= 0, the other q >= 0
    tau2 = -2.0 * t
    end_neg = y <= 0
    start_neg = x <= 0
    both = end_neg & start_neg & ~((y == 0) | (x == 0))
    if np.any(both) or np.any(~end_neg & ~start_neg):
        raise ValueError("negative-time squared Bessel kernel needs exactly one nonpositive endpoint")
    r = np.where(end_neg, -y, -x)
    q = np.where(end_neg, x, y)
    with np.errstate(divide="ignore"):
        rnu = np.where(r == 0, 1.0 if nu == 0 else (0.0 if nu > 0 else np.inf), r**nu)
    pref = rnu * np.exp((q - r) / tau2) / tau2 ** (nu + 1)
    return (pref * bessel_g(nu, -q * r / (tau2 * tau2)))[()]


def _check_pair(y, x, nonneg):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.ndim != 1 or y.shape != x.shape:
        raise ValueError("configurations must be one-dimensional and of equal size")
    for v in (x, y):
        s = np.sort(v)
        if np.any(np.diff(s) <= 0):
            raise ValueError("configurations must have distinct points")
        if nonneg and np.any(v < 0):
            raise ValueError("squared Bessel configurations must be nonnegative")
    return y, x


def km_det_bm(t, y, x):
    """Karlin-McGregor determinant ``det[p(t, y_j | x_k)]``."""
    if not t > 0:
        raise ValueError("Karlin-McGregor determinant needs t > 0")
    y, x = _check_pair(y, x, False)
    return float(np.real(det(bm_kernel(t, y[:, None], x[None, :]))))


def km_det_besq(nu, t, y, x):
    """Karlin-McGregor determinant ``det[p^nu(t, y_j | x_k)]``."""
    if not t > 0:
        raise ValueError("Karlin-McGregor determinant needs t > 0")
    y, x = _check_pair(y, x, True)
    return float(det(besq_kernel(nu, t, y[:, None], x[None, :])))


def besq_support_bound(t, x, tol_exp=80.0):
    """Point beyond which a squared Bessel density from ``x`` over time ``t`` is negligible.

    The density decays like ``exp(-(sqrt y - sqrt x)^2 / 2t)``; ``tol_exp = 80``
    puts the cutoff far below ``1e-14`` of the peak.
    """
    return (math.sqrt(max(x, 0.0)) + math.sqrt(tol_exp * t)) ** 2 + 10.0 * t


def integrate_line(f, center=0.0, width=1.0, rtol=1e-12):
    """``int_R f`` for a real integrand with Gaussian-type tails around ``center``.

    The range is truncated at ``center +- 12 width`` (scale of the decay)
    and split at the center; each piece goes to adaptive Gauss-Kronrod.
    """
    lo, hi = center - 12.0 * width, center + 12.0 * width
    total = 0.0
    for a, b in ((lo, center), (center, hi)):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400)
        total += val
    return total


def integrate_half_line(f, upper, power=0.0, rtol=1e-12):
    """``int_0^upper f(y) y^power dy`` with the algebraic endpoint weight handled exactly.

    ``power > -1`` covers the ``y^nu`` singularity of squared Bessel
    densities with ``-1 < nu < 0``.
    """
    if power == 0.0:
        val, _ = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=rtol, limit=400)
    else:
        val, _ = integrate.quad(f, 0.0, upper, weight="alg", wvar=(power, 0.0), epsabs=0.0, epsrel=rtol, limit=400)
    return val
