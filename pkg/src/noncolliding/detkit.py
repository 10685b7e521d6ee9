"""Small dense determinants and the classical determinant identities.

Covers the Vandermonde product, generalized Vandermonde determinants
``V^{p,q}``, the Cauchy determinant and the Ishikawa-type
identities that turn a determinant of two-by-two ratios into a single
generalized Vandermonde determinant.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "det",
    "rel_err",
    "vandermonde_product",
    "vandermonde_matrix",
    "gen_vandermonde_matrix",
    "gen_vandermonde_det",
    "cauchy_det",
    "cauchy_closed_form",
    "ishikawa_both_sides",
    "ishikawa_general_both_sides",
    "divided_difference_table",
    "leja_order",
]


def det(m):
    """Determinant of a square (or stacked square) complex matrix.

    LU with partial pivoting (LAPACK ``getrf``), so row-swap signs are exact.
    """
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"det needs a square matrix, got shape {m.shape}")
    if m.shape[-1] == 0:
        return np.ones(m.shape[:-2])[()]
    return np.linalg.det(m)[()]


def rel_err(a, b):
    """Relative discrepancy ``|a-b| / max(|a|, |b|, 1e-300)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return (np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300))[()]


def vandermonde_product(x, n=None):
    """``h_n(x) = prod_{j<k} (x_k - x_j)`` over the first ``n`` entries.

    Works on the last axis, so a stack of configurations gives a stack of
    products.
    """
    x = np.asarray(x)
    if n is None:
        n = x.shape[-1]
    if x.shape[-1] < n:
        raise ValueError("fewer points than requested")
    x = x[..., :n]
    out = np.ones(x.shape[:-1], dtype=np.result_type(x.dtype, float))
    for j in range(n):
        for k in range(j + 1, n):
            out = out * (x[..., k] - x[..., j])
    return out[()]


def vandermonde_matrix(x):
    x = np.asarray(x)
    return x[..., :, None] ** np.arange(x.shape[-1])


def gen_vandermonde_matrix(p, q, x, a):
    """The matrix ``V^{p,q}(x; a)`` with j-th row ``(1, x_j, .., x_j^{p-1}, a_j, a_j x_j, .., a_j x_j^{q-1})``."""
    x = np.asarray(x, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if p < 0 or q < 0:
        raise ValueError("p and q must be nonnegative")
    if x.shape != a.shape or x.shape[-1] != p + q:
        raise ValueError(f"need len(x) == len(a) == p + q = {p + q}")
    cols = [x**i for i in range(p)] + [a * x**i for i in range(q)]
    if not cols:
        return np.ones(x.shape[:-1] + (0, 0), dtype=complex)
    return np.stack(cols, axis=-1)


def gen_vandermonde_det(p, q, x, a=None):
    """``det V^{p,q}(x; a)``; ``V^{0,0}`` has determinant 1 by convention."""
    if a is None:
        if q:
            raise ValueError("coefficients a are required when q > 0")
        a = np.zeros_like(np.asarray(x, dtype=complex))
    if p + q == 0:
        return 1.0 + 0j
    return det(gen_vandermonde_matrix(p, q, x, a))


def _outer_diff(y, x):
    """Matrix ``D[j, k] = y_k - x_j``."""
    return np.asarray(y)[None, :] - np.asarray(x)[:, None]


def cauchy_det(x, y):
    """``det[1 / (x_j + y_k)]``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    s = x[:, None] + y[None, :]
    if np.any(s == 0):
        raise ZeroDivisionError("x_j + y_k vanishes for some pair")
    return det(1.0 / s)


def cauchy_closed_form(x, y):
    """``h_n(x) h_n(y) / prod_{j,k} (x_j + y_k)``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    return vandermonde_product(x) * vandermonde_product(y) / np.prod(x[:, None] + y[None, :])


def ishikawa_both_sides(n, x, y, a, b):
    """Both sides of the ``p = q = 0`` Ishikawa identity.

    Left: ``det[(b_k - a_j) / (y_k - x_j)]``.  Right:
    ``(-1)^{n(n-1)/2} / prod_{j,k} (y_k - x_j)`` times the ``2n x 2n``
    generalized Vandermonde determinant ``V^{n,n}((x, y); (a, b))``.
    """
    x, y, a, b = (np.asarray(v, dtype=complex) for v in (x, y, a, b))
    if not all(v.shape == (n,) for v in (x, y, a, b)):
        raise ValueError(f"x, y, a, b must all have length n = {n}")
    diff = _outer_diff(y, x)
    if np.any(diff == 0):
        raise ZeroDivisionError("some y_k coincides with some x_j")
    lhs = det((b[None, :] - a[:, None]) / diff)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    rhs = sign / np.prod(diff) * gen_vandermonde_det(n, n, np.r_[x, y], np.r_[a, b])
    return complex(lhs), complex(rhs)


def ishikawa_general_both_sides(n, p, q, x, y, a, b, z, c):
    """Both sides of the ``(p, q)`` generalization (only used for ``p + q <= 4``)."""
    x, y, a, b = (np.asarray(v, dtype=complex) for v in (x, y, a, b))
    z = np.asarray(z, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if z.shape != (p + q,) or c.shape != (p + q,):
        raise ValueError("z and c must have length p + q")
    diff = _outer_diff(y, x)
    if np.any(diff == 0):
        raise ZeroDivisionError("some y_k coincides with some x_j")
    m = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            m[j, k] = gen_vandermonde_det(p + 1, q + 1, np.r_[x[j], y[k], z], np.r_[a[j], b[k], c]) / diff[j, k]
    lhs = det(m)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    rhs = (
        sign
        / np.prod(diff)
        * gen_vandermonde_det(p, q, z, c) ** (n - 1)
        * gen_vandermonde_det(n + p, n + q, np.r_[x, y, z], np.r_[a, b, c])
    )
    return complex(lhs), complex(rhs)


def divided_difference_table(family_rec, degrees, nodes, magnitudes=False):
    """Newton divided differences of monic polynomials from their recurrence.

    ``family_rec = (b, c)`` defines ``P_{l+1} = (a - b_l) P_l - c_l P_{l-1}``
    with ``P_0 = 1``.  Returns ``D`` with ``D[i, k] = P_{degrees[i]}[nodes_0..nodes_k]``.
    Uses ``(a f)[x_0..x_k] = x_k f[x_0..x_k] + f[x_0..x_{k-1}]`` so no
    differences of nearby values are ever formed.

    ``det[P_{d_i}(x_k)] = h(x) det[D]``; this is how ratios of polynomial
    determinants to Vandermonde products are evaluated stably.

    With ``magnitudes=True`` a second table is returned, the same recursion
    run on absolute values.  ``eps * magnitudes`` bounds the rounding error
    of each entry to first order.
    """
    b, c = family_rec
    nodes = np.asarray(nodes, dtype=complex)
    lmax = max(degrees)

    def run(absolute):
        prev = np.zeros(nodes.shape, dtype=float if absolute else complex)
        cur = np.zeros_like(prev)
        cur[..., 0] = 1.0
        table = {0: cur}
        for l in range(lmax):
            shifted = np.zeros_like(cur)
            shifted[..., 1:] = cur[..., :-1]
            if absolute:
                nxt = np.abs(nodes - b(l)) * cur + shifted + abs(c(l)) * prev
            else:
                nxt = (nodes - b(l)) * cur + shifted - c(l) * prev
            prev, cur = cur, nxt
            table[l + 1] = cur
        return np.stack([table[d] for d in degrees], axis=-2)

    if magnitudes:
        return run(False), run(True)
    return run(False)


def leja_order(nodes):
    """Permutation putting ``nodes`` in Leja order (largest modulus first, then
    each next node maximizes the product of distances to those chosen).

    Newton divided differences are best conditioned in this order.
    """
    nodes = np.asarray(nodes, dtype=complex)
    left = list(range(nodes.size))
    first = max(left, key=lambda i: abs(nodes[i]))
    order = [first]
    left.remove(first)
    logd = np.log(np.abs(nodes - nodes[first]) + 1e-300)
    while left:
        nxt = max(left, key=lambda i: logd[i])
        order.append(nxt)
        left.remove(nxt)
        logd = logd + np.log(np.abs(nodes - nodes[nxt]) + 1e-300)
    return np.array(order, dtype=int)
