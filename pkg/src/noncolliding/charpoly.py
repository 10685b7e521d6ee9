"""Averages of products of characteristic polynomials.

For an ensemble with eigenvalue configuration ``Xi`` the quantity is
``M(m, alpha) = E[prod_{i<=m} prod_{X in Xi} (alpha_i - X)]``.  For even
``m = 2n`` two closed forms are available:

* the *pair form*, an ``n x n`` determinant of two-by-two Hermite (or
  Laguerre) brackets divided by ``alpha_j - alpha_{n+k}``, with an explicit
  factorial prefactor;
* the *monic form*, ``det[P_{N+j-1}(alpha_k)] / h_{2n}(alpha)`` with the
  monic Hermite or Laguerre polynomials ``P``.

Both forms are evaluated with Newton divided differences generated by the
three-term recurrence, which never subtract nearby polynomial values.  The
monic form also computes the direct determinant ratio and keeps whichever
has the smaller first-order rounding-error estimate.  The literal evaluations stay available through
``method``.  Prefactors are accumulated in log space.
"""

from __future__ import annotations

import math

import numpy as np

from .detkit import det, divided_difference_table, leja_order, rel_err, vandermonde_product
from .ensembles import EnsembleSpec, McReport, mc_expectation
from .specfun import (
    CoincidenceError,
    PolyFamily,
    _check_nu,
    _check_sigma2,
    monic_hermite,
    monic_laguerre,
    monic_recurrence,
)

__all__ = [
    "SEPARATION",
    "m_gue_pair_form",
    "m_gue_monic_form",
    "m_nu_pair_form",
    "m_nu_monic_form",
    "m_class",
    "closed_form",
    "mc_charpoly",
    "charpoly_product",
]

# points closer than SEPARATION * max(1, |alpha|) are rejected
SEPARATION = 1e-6


def _check_grid(alpha, n=None, even=True):
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if alpha.ndim != 1:
        raise ValueError("alpha must be one-dimensional")
    if even and (alpha.size < 2 or alpha.size % 2):
        raise ValueError("closed forms need an even number (>= 2) of points")
    if n is not None and alpha.size != 2 * n:
        raise ValueError(f"expected 2n = {2 * n} points, got {alpha.size}")
    return alpha


def _check_distinct(points, what="alpha"):
    scale = max(1.0, float(np.max(np.abs(points))))
    gaps = np.abs(points[:, None] - points[None, :])[np.triu_indices(points.size, 1)]
    if gaps.size and gaps.min() < SEPARATION * scale:
        raise CoincidenceError(f"{what} has (nearly) coincident points; closed forms need distinct values")


def _check_counts(n, N):
    if int(n) != n or n < 1 or int(N) != N or N < 1:
        raise ValueError("n and N must be positive integers")


def _pair_det(family, n, alpha, N, sigma2, method="newton"):
    """``det[bracket(alpha_j, alpha_{n+k}) / (alpha_j - alpha_{n+k})] / (h_n h_n)`` in monic scaling.

    ``method="literal"`` builds the brackets and divides by both Vandermonde
    products.  ``method="newton"`` uses the Christoffel-Darboux identity
    ``bracket / (a - b) = z_{L-1} sum_{m<L} P_m(a) P_m(b) / z_m`` with
    ``z_m = c_1 .. c_m`` from the monic recurrence, so the matrix is
    ``z_{L-1} Pa^T W Pb`` and both Vandermonde factors are absorbed by
    replacing ``Pa, Pb`` with their Newton divided-difference tables.
    """
    ell = N + n
    a, b = alpha[:n], alpha[n:]
    if method == "newton":
        rec = monic_recurrence(family, sigma2)
        c = rec[1]
        log_z = np.concatenate([[0.0], np.cumsum([math.log(c(l)) for l in range(1, ell)])])
        da = divided_difference_table(rec, list(range(ell)), a[leja_order(a)])
        db = divided_difference_table(rec, list(range(ell)), b[leja_order(b)])
        w = np.exp(log_z[-1] - log_z)
        return det(da.T @ (w[:, None] * db))
    if method != "literal":
        raise ValueError(f"unknown method {method!r}; expected 'newton' or 'literal'")
    if family.kind == "hermite":
        hi = monic_hermite(ell, alpha, sigma2)
        lo = monic_hermite(ell - 1, alpha, sigma2)
    else:
        hi = monic_laguerre(ell, family.nu, alpha, sigma2)
        lo = monic_laguerre(ell - 1, family.nu, alpha, sigma2)
    bracket = hi[:n, None] * lo[None, n:] - hi[None, n:] * lo[:n, None]
    m = bracket / (a[:, None] - b[None, :])
    return det(m) / (vandermonde_product(a) * vandermonde_product(b))


def m_gue_pair_form(n, alpha, N, sigma2, method="newton"):
    """GUE average from the ``n x n`` Hermite bracket determinant.

    ``gamma_{N,2n} sigma^(n(2N+n)) / (h_n h_n) * det[(H_{N+n}(a) H_{N+n-1}(b) - H_{N+n}(b) H_{N+n-1}(a)) / (a - b)]``
    with ``a = alpha_j``, ``b = alpha_{n+k}`` scaled by ``1/sqrt(2 sigma2)`` and
    ``gamma_{N,2n} = 2^(-n(2N+2n-1)/2) prod_{l=2}^n (N+n-l)! / (N+n-1)!``.
    """
    _check_counts(n, N)
    _check_sigma2(sigma2)
    alpha = _check_grid(alpha, n)
    _check_distinct(alpha)
    log_gamma = -0.5 * n * (2 * N + 2 * n - 1) * math.log(2.0) + sum(
        math.lgamma(N + n - l + 1) - math.lgamma(N + n) for l in range(2, n + 1)
    )
    log_sigma = 0.5 * n * (2 * N + n) * math.log(sigma2)
    # H_l(a / sqrt(2 s2)) = (2 / s2)^(l/2) Hhat_l(a), one bracket per row
    log_rescale = 0.5 * n * (2 * N + 2 * n - 1) * math.log(2.0 / sigma2)
    value = _pair_det(PolyFamily.hermite(), n, alpha, N, sigma2, method)
    return complex(math.exp(log_gamma + log_sigma + log_rescale) * value)


def _det_error(m, mag):
    """First-order relative rounding error of ``det(m)`` when entry ``(i, j)`` carries error ``eps * mag[i, j]``."""
    try:
        inv = np.linalg.inv(m)
    except np.linalg.LinAlgError:
        return np.inf
    return float(np.finfo(float).eps * np.sum(np.abs(inv.T) * (mag + np.abs(m))))


def _pointwise_table(family_rec, degrees, nodes):
    """Values ``P_d(x_k)`` and their running magnitudes from the monic recurrence."""
    b, c = family_rec
    prev = np.zeros(nodes.shape, dtype=complex)
    cur = np.ones(nodes.shape, dtype=complex)
    mprev = np.zeros(nodes.shape)
    mcur = np.ones(nodes.shape)
    vals, mags = {0: cur}, {0: mcur}
    for l in range(max(degrees)):
        prev, cur = cur, (nodes - b(l)) * cur - c(l) * prev
        mprev, mcur = mcur, np.abs(nodes - b(l)) * mcur + abs(c(l)) * mprev
        vals[l + 1], mags[l + 1] = cur, mcur
    return np.array([vals[d] for d in degrees]), np.array([mags[d] for d in degrees])


def _det_over_vandermonde(rec, degrees, nodes, method):
    """``det[P_{d_i}(x_k)] / h(x)`` for the monic recurrence ``rec``."""
    if method not in ("auto", "divided", "direct"):
        raise ValueError(f"unknown method {method!r}; expected 'auto', 'divided' or 'direct'")
    if method == "divided":
        return complex(det(divided_difference_table(rec, degrees, nodes)))
    vals, vals_mag = _pointwise_table(rec, degrees, nodes)
    d_dir = det(vals) / vandermonde_product(nodes)
    if method == "direct":
        return complex(d_dir)
    # the divided-difference determinant is exact in any node order but its
    # conditioning is not; point values win for widely spread nodes
    best, best_err = complex(d_dir), _det_error(vals, vals_mag)
    for order in _node_orders(nodes):
        table, table_mag = divided_difference_table(rec, degrees, nodes[order], magnitudes=True)
        err = _det_error(table, table_mag)
        if err < best_err:
            best, best_err = complex(det(table)), err
    return best


def _node_orders(nodes):
    ascending = np.lexsort((nodes.imag, nodes.real))
    return [np.arange(nodes.size), ascending, ascending[::-1], leja_order(nodes)]


def _monic_form(family, n, alpha, N, sigma2, method):
    return _det_over_vandermonde(monic_recurrence(family, sigma2), list(range(N, N + 2 * n)), alpha, method)


def m_gue_monic_form(n, alpha, N, sigma2, method="auto"):
    """GUE average ``det[Hhat_{N+j-1}(alpha_k; sigma2)] / h_{2n}(alpha)``.

    ``method="divided"`` evaluates the ratio as one determinant of Newton
    divided differences, ``"direct"`` forms both determinants, and
    ``"auto"`` (default) computes both and keeps the one with the smaller
    first-order rounding-error estimate.
    """
    _check_counts(n, N)
    _check_sigma2(sigma2)
    alpha = _check_grid(alpha, n)
    _check_distinct(alpha)
    return _monic_form(PolyFamily.hermite(), n, alpha, N, sigma2, method)


def m_nu_pair_form(n, alpha, N, nu, sigma2, method="newton"):
    """chGUE average (index ``nu``) from the ``n x n`` Laguerre bracket determinant.

    ``gamma^nu_{N,2n} (2 sigma2)^(n(2N+n)) / (h_n h_n) * det[bracket of L^nu_{N+n}, L^nu_{N+n-1} / (a - b)]``
    at arguments ``alpha / 2 sigma2``, with
    ``gamma^nu_{N,2n} = (-1)^n ((N+n)!/Gamma(N+n+nu))^(n-1) prod_{l=1}^{n-1} Gamma(N+nu+l) prod_{m=1}^{n+1} (N+m-1)!``.
    """
    _check_counts(n, N)
    _check_nu(nu)
    _check_sigma2(sigma2)
    alpha = _check_grid(alpha, n)
    _check_distinct(alpha)
    sign = (-1) ** n
    log_gamma = (
        (n - 1) * (math.lgamma(N + n + 1) - math.lgamma(N + n + nu))
        + sum(math.lgamma(N + nu + l) for l in range(1, n))
        + sum(math.lgamma(N + m) for m in range(1, n + 2))
    )
    log_sigma = n * (2 * N + n) * math.log(2 * sigma2)
    # L_l(a / 2 s2) = Lhat_l(a) / ((-2 s2)^l l!), one bracket per row
    sign *= (-1) ** n
    log_rescale = -n * ((2 * N + 2 * n - 1) * math.log(2 * sigma2) + math.lgamma(N + n + 1) + math.lgamma(N + n))
    value = _pair_det(PolyFamily.laguerre(nu), n, alpha, N, sigma2, method)
    return complex(sign * math.exp(log_gamma + log_sigma + log_rescale) * value)


def m_nu_monic_form(n, alpha, N, nu, sigma2, method="auto"):
    """chGUE average ``det[Lhat^nu_{N+j-1}(alpha_k; sigma2)] / h_{2n}(alpha)`` for any ``nu > -1``.

    Agrees with :func:`m_nu_pair_form` with unit factor; see ``method`` in
    :func:`m_gue_monic_form`.
    """
    _check_counts(n, N)
    _check_nu(nu)
    _check_sigma2(sigma2)
    alpha = _check_grid(alpha, n)
    _check_distinct(alpha)
    return _monic_form(PolyFamily.laguerre(nu), n, alpha, N, sigma2, method)


def _class_hermite_form(kind, n, alpha, N, sigma2):
    if kind == "C":
        degrees = [2 * N + 2 * j + 1 for j in range(2 * n)]
    else:
        degrees = [2 * (N + j) for j in range(2 * n)]
    # the form is even in each alpha_k; folding into Re > 0 keeps alpha_j + alpha_k away from 0
    alpha = np.where((alpha.real < 0) | ((alpha.real == 0) & (alpha.imag < 0)), -alpha, alpha)
    # h(alpha^2) = h(alpha) prod_{j<k} (alpha_j + alpha_k)
    iu = np.triu_indices(alpha.size, 1)
    denom = np.prod(alpha[iu[0]] + alpha[iu[1]])
    if kind == "C":
        denom = denom * np.prod(alpha)
    rec = monic_recurrence(PolyFamily.hermite(), sigma2)
    return _det_over_vandermonde(rec, degrees, alpha, "auto") / denom


def m_class(kind, n, alpha, N, sigma2, rtol=1e-9, return_both=False):
    """Class C or D average for ``N`` squared eigenvalues (``2N x 2N`` matrices).

    Both expressions are computed: the Laguerre form with ``nu = +-1/2`` at
    ``alpha^2`` and the odd (class C) or even (class D) Hermite form at
    ``alpha``.  They must agree to ``rtol``; the Hermite form is returned
    (with the Laguerre form too when ``return_both``).
    """
    kind = str(kind).upper().replace("CLASS", "")
    if kind not in ("C", "D"):
        raise ValueError("kind must be 'C' or 'D'")
    _check_counts(n, N)
    _check_sigma2(sigma2)
    alpha = _check_grid(alpha, n)
    sq = alpha * alpha
    _check_distinct(sq, "alpha^2")
    if kind == "C" and np.min(np.abs(alpha)) < SEPARATION * max(1.0, float(np.max(np.abs(alpha)))):
        raise CoincidenceError("the class C Hermite form divides by prod alpha_j; alpha_j = 0 is excluded")
    nu = 0.5 if kind == "C" else -0.5
    lag = m_nu_monic_form(n, sq, N, nu, sigma2)
    her = _class_hermite_form(kind, n, alpha, N, sigma2)
    err = rel_err(her, lag)
    if err > rtol:
        raise ArithmeticError(f"class {kind} Hermite and Laguerre forms disagree (relative {err:.2e})")
    return (her, lag) if return_both else her


def closed_form(spec: EnsembleSpec, alpha, form="monic"):
    """Closed-form average for an ensemble spec; ``form`` is ``"monic"`` or ``"pair"``.

    Class C/D always use :func:`m_class`.
    """
    alpha = _check_grid(alpha)
    n = alpha.size // 2
    if spec.kind == "GUE":
        f = m_gue_monic_form if form == "monic" else m_gue_pair_form
        return f(n, alpha, spec.N, spec.sigma2)
    if spec.kind == "chGUE":
        f = m_nu_monic_form if form == "monic" else m_nu_pair_form
        return f(n, alpha, spec.N, spec.nu, spec.sigma2)
    return m_class(spec.kind[-1], n, alpha, spec.N, spec.sigma2)


def charpoly_product(x, alpha, squared=False):
    """``prod_i prod_j (alpha_i - x_j)`` over the last axis of ``x``.

    With ``squared=True`` the factors are ``alpha_i^2 - x_j``, the class C/D
    characteristic polynomial written through squared eigenvalues.
    """
    x = np.asarray(x)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    a = alpha * alpha if squared else alpha
    out = np.prod(a[:, None, None] - x[None, ...], axis=(0, -1)) if x.ndim > 1 else np.prod(a[:, None] - x[None, :])
    if np.all(np.imag(alpha) == 0):
        out = np.real(out)
    return out


def mc_charpoly(spec: EnsembleSpec, alpha, samples, seed=None, threads=1) -> McReport:
    """Monte Carlo estimate of the characteristic-polynomial product average for any ``m``."""
    alpha = _check_grid(alpha, even=False)
    squared = spec.kind in ("classC", "classD")
    return mc_expectation(spec, lambda x: charpoly_product(x, alpha, squared), samples, seed, threads=threads)
