"""Simulation of noncolliding Brownian motion and noncolliding squared Bessel paths.

Two independent routes are provided.

``simulate_euler``
    Euler-Maruyama on the interacting SDEs; for ``nu >= -1/2`` the squared
    Bessel system is stepped in ``R = sqrt(X)``, where the noise is
    additive, and squared on output.  A step that breaks the ordering or
    moves particles too far relative to their gaps is redone as two half
    steps whose Brownian increments come from a Brownian-bridge split of
    the original one, up to ``MAX_HALVINGS`` levels deep; a step still out
    of order there is taken drift-implicitly, which keeps the ordering by
    construction.  The ``(2 nu + 1)/(2R)`` origin drift is taken
    implicitly (closed form).  For ``-1 < nu < -1/2`` that term would be
    attractive, so ``X`` is stepped directly (constant origin drift
    ``2(nu+1)``) and reflected at the origin.

``simulate_matrix``
    Eigenvalues of a matrix-valued Brownian motion started at zero: a GUE
    Hermitian matrix for Brownian motion, ``M^H M`` for a complex
    ``(N+nu) x N`` matrix for the squared Bessel case with integer ``nu``,
    and the class C / class D Hamiltonian matrices for ``nu = +-1/2``.
    Exact in law at each fixed time.

The SDEs are singular at collisions, so the Euler route cannot start from
``N delta_0``; :func:`warm_start` draws an exact state at a small time from
the matrix route to start from.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import DEFAULT_CHUNK, resolve_seed, stream_rng
from .specfun import _check_nu

__all__ = [
    "Trajectory",
    "simulate_euler",
    "simulate_matrix",
    "warm_start",
    "gap_statistics",
    "MAX_HALVINGS",
]

MAX_HALVINGS = 20
SHRINK_LIMIT = 0.5
FAMILIES = ("bm", "besq")


def _family(family):
    fam = str(family).lower()
    if fam not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}, got {family!r}")
    return fam


@dataclass
class Trajectory:
    """A batch of paths sampled at common times.

    ``paths`` has shape ``(P, len(times), N)``; ``states`` is the first path.
    """

    times: np.ndarray
    paths: np.ndarray
    family: str
    method: str
    nu: float = 0.0
    seed: int = 0
    dt: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.paths = np.asarray(self.paths, dtype=float)
        if self.paths.ndim == 2:
            self.paths = self.paths[None]
        if self.paths.shape[1] != self.times.size:
            raise ValueError("paths must have one state per time")
        if np.any(np.diff(self.times) <= 0) or self.times[0] < 0:
            raise ValueError("times must be strictly increasing from 0")

    @property
    def N(self) -> int:
        return self.paths.shape[2]

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    @property
    def states(self) -> np.ndarray:
        return self.paths[0]

    def at(self, t) -> np.ndarray:
        """All paths at output time ``t``, shape ``(P, N)``."""
        idx = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))
        if idx.size == 0:
            raise KeyError(f"time {t} is not an output time")
        return self.paths[:, idx[0], :]

    def to_csv(self, dest=None) -> str:
        """CSV rows ``t,x_1,...,x_N``, path-major (all times of path 0, then path 1, ...)."""
        buf = io.StringIO()
        buf.write(",".join(["t"] + [f"x_{j + 1}" for j in range(self.N)]) + "\n")
        for path in self.paths:
            for t, row in zip(self.times, path):
                buf.write(",".join(format(float(v), ".17g") for v in (t, *row)) + "\n")
        text = buf.getvalue()
        if dest is not None:
            with open(dest, "w", newline="") as fh:
                fh.write(text)
        return text

    def manifest(self) -> dict:
        return {
            "family": self.family,
            "method": self.method,
            "nu": self.nu,
            "N": self.N,
            "seed": self.seed,
            "dt": self.dt,
            "n_paths": self.n_paths,
            "n_times": int(self.times.size),
            "row_order": "path-major",
            **self.extra,
        }

    def write(self, csv_path, manifest_path=None):
        self.to_csv(csv_path)
        if manifest_path is not None:
            with open(manifest_path, "w") as fh:
                json.dump(self.manifest(), fh, indent=2)


# -- Euler-Maruyama ----------------------------------------------------------


def _inverse_gaps(x):
    diff = x[..., :, None] - x[..., None, :]
    n = x.shape[-1]
    with np.errstate(divide="ignore"):
        return np.where(np.eye(n, dtype=bool), 0.0, 1.0 / np.where(diff == 0, np.inf, diff))


def _interaction(fam, nu, x):
    """Explicitly stepped part of the drift in the Euler coordinates.

    ``"bm"``: ``sum_k 1/(x_j - x_k)``.  ``"besq"`` works with ``r = sqrt(X)``,
    whose drift ``(2 nu + 1)/(2 r_j) + sum_k [1/(r_j - r_k) + 1/(r_j + r_k)]``
    follows from Ito's formula; the origin acts through mirror images and the
    ``(2 nu + 1)/(2 r)`` term is stepped implicitly, so it is left out here.
    ``"besqx"`` (used for ``nu < -1/2``) works with ``X`` itself:
    ``2 (nu + 1) + 4 X_j sum_k 1/(X_j - X_k)``.
    """
    rep = _inverse_gaps(x).sum(axis=-1)
    if fam == "bm":
        return rep
    if fam == "besqx":
        return 2 * (nu + 1) + 4 * x * rep
    plus = x[..., :, None] + x[..., None, :]
    off = ~np.eye(x.shape[-1], dtype=bool)
    return rep + np.where(off, 1.0 / np.where(off, plus, 1.0), 0.0).sum(axis=-1)


def _neighbour_gap(x):
    gaps = np.diff(x, axis=-1)
    pad = np.full(x.shape[:-1] + (1,), np.inf)
    return np.minimum(np.concatenate([pad, gaps], axis=-1), np.concatenate([gaps, pad], axis=-1))


def _step(fam, nu, x, dw, h, strict=True):
    """One Euler step in the Euler coordinates and whether it is acceptable.

    For the squared Bessel family the origin term ``c/(2r)``, ``c = 2 nu + 1 >= 0``,
    is taken implicitly: ``y - h c/(2y) = z`` has the positive root
    ``(z + sqrt(z^2 + 2 h c)) / 2``, which is also the reflection when ``c = 0``.

    The hard condition is the ordering.  With ``strict=True`` a step is also
    rejected when it shrinks some gap below ``SHRINK_LIMIT`` of its old
    value or when the explicit drift moves a particle by more than half the
    distance to its nearest neighbour.  These only refine the time grid near
    close encounters; the Brownian path itself is sampled exactly by bridge
    splitting.
    """
    drift = _interaction(fam, nu, x)
    if fam == "besqx":
        # reflecting Euler step for the multiplicative noise 2 sqrt(X) dB
        y = np.abs(x + drift * h + 2 * np.sqrt(x) * dw)
    else:
        y = x + drift * h + dw
    if fam == "besq":
        y = 0.5 * (y + np.sqrt(y * y + 2 * h * (2 * nu + 1)))
    ok = np.all(np.isfinite(y), axis=-1)
    ok &= np.all(np.diff(y, axis=-1) > (SHRINK_LIMIT if strict else 0.0) * np.diff(x, axis=-1), axis=-1)
    if strict:
        ok &= np.all(np.abs(drift) * h <= 0.5 * _neighbour_gap(x), axis=-1)
    return y, ok


def _log_potential(fam, nu, y):
    """Value, gradient and Hessian of the log-interaction ``Phi`` whose gradient is the drift."""
    n = y.size
    d = y[:, None] - y[None, :]
    off = ~np.eye(n, dtype=bool)
    dd = np.where(off, d, 1.0)
    val = np.sum(np.log(np.abs(dd[off]))) / 2
    grad = np.where(off, 1.0 / dd, 0.0).sum(axis=1)
    hess = np.where(off, 1.0 / dd**2, 0.0)
    hess[np.diag_indices(n)] = -hess.sum(axis=1)
    if fam == "besq":
        c = 2 * nu + 1
        p = y[:, None] + y[None, :]
        pp = np.where(off, p, 1.0)
        val += np.sum(np.log(pp[off])) / 2 + 0.5 * c * np.sum(np.log(y))
        grad += np.where(off, 1.0 / pp, 0.0).sum(axis=1) + c / (2 * y)
        mh = np.where(off, -1.0 / pp**2, 0.0)
        hess += mh
        hess[np.diag_indices(n)] += mh.sum(axis=1) - c / (2 * y * y)
    return val, grad, hess


def _feasible(fam, y):
    return np.all(np.diff(y) > 0) and (fam == "bm" or y[0] >= (0 if fam == "besqx" else np.nextafter(0, 1)))


def _implicit_step(fam, nu, x, dw, h, iters=100):
    """Drift-implicit Euler step ``y = x + h grad Phi(y) + dw``.

    ``y`` minimizes ``|y - x - dw|^2 / 2 - h Phi(y)``, which is strictly
    convex on the ordered chamber (concave ``Phi``), so the solution is
    ordered.  Damped Newton from the feasible point ``x``.
    """
    if fam == "besqx":
        return None
    z = x + dw

    def obj(y):
        return 0.5 * np.sum((y - z) ** 2) - h * _log_potential(fam, nu, y)[0]

    y = x.copy()
    f = obj(y)
    for _ in range(iters):
        _, g, hs = _log_potential(fam, nu, y)
        grad = y - z - h * g
        if np.max(np.abs(grad)) <= 1e-15 * (1 + np.max(np.abs(y))):
            return y
        step = np.linalg.solve(np.eye(y.size) - h * hs, grad)
        lam = 1.0
        while lam > 1e-12:
            cand = y - lam * step
            if _feasible(fam, cand):
                fc = obj(cand)
                if fc <= f:
                    break
            lam *= 0.5
        else:
            return y
        if np.array_equal(cand, y):
            return y
        y, f = cand, fc
    return y


def _refine(fam, nu, x, dw, h, rng, depth, stats):
    """Advance one path over ``h`` with increment ``dw``, bisecting on rejection.

    At the deepest level only the ordering is enforced, and if the explicit
    step still breaks it the drift-implicit step is taken instead.
    """
    stats["max_depth"] = max(stats["max_depth"], depth)
    y, ok = _step(fam, nu, x, dw, h, strict=depth < MAX_HALVINGS)
    if ok:
        return y
    if depth >= MAX_HALVINGS:
        y = _implicit_step(fam, nu, x, dw, h)
        if y is None or not _feasible(fam, y):
            raise ArithmeticError(f"ordering still violated after {MAX_HALVINGS} step halvings")
        stats["implicit"] = stats.get("implicit", 0) + 1
        return y
    stats["halvings"] += 1
    # Brownian-bridge split of dw into two half-step increments
    first = 0.5 * dw + math.sqrt(h / 4.0) * rng.standard_normal(dw.shape)
    mid = _refine(fam, nu, x, first, h / 2, rng, depth + 1, stats)
    return _refine(fam, nu, mid, dw - first, h / 2, rng, depth + 1, stats)


def _check_start(fam, x0):
    if np.any(np.diff(x0, axis=-1) <= 0):
        raise ValueError("the Euler route needs a strictly ordered start; use warm_start for N delta_0")
    if fam == "besq" and np.any(x0 < 0):
        raise ValueError("squared Bessel start must be nonnegative")


def _output_steps(times, dt):
    steps = np.rint(np.asarray(times) / dt).astype(int)
    if np.any(np.abs(steps * dt - times) > 1e-9 * np.maximum(1.0, times)):
        raise ValueError("output times must be multiples of dt")
    return steps


def simulate_euler(family, N, nu, x0, dt, T, seed=None, n_paths=1, times=None, chunk_size=DEFAULT_CHUNK):
    """Euler-Maruyama paths of the noncolliding system.

    Parameters
    ----------
    family : {"bm", "besq"}
    N : int
    nu : float
        Squared Bessel index (ignored for ``"bm"``).
    x0 : array_like
        Strictly ordered start, shape ``(N,)`` or ``(n_paths, N)``.
    dt, T : float
        Step and horizon.
    seed : int, optional
        Chunk ``i`` of paths uses stream ``i``; refinement draws use stream
        ``2**32 + i``.
    times : array_like, optional
        Output times, multiples of ``dt``; default ``[0, T]``.
    """
    fam = _family(family)
    if fam == "besq":
        _check_nu(nu)
    if not dt > 0 or not T > 0:
        raise ValueError("dt and T must be positive")
    seed = resolve_seed(seed)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[-1] != N:
        raise ValueError("x0 must have N coordinates")
    x0 = np.broadcast_to(x0, (n_paths, N)).copy()
    _check_start(fam, x0)
    times = np.array([0.0, T] if times is None else times, dtype=float)
    if times[0] != 0.0:
        times = np.r_[0.0, times]
    out_steps = _output_steps(times, dt)
    n_steps = int(out_steps[-1])
    paths = np.empty((n_paths, times.size, N))
    stats = {"halvings": 0, "max_depth": 0, "implicit": 0}
    scheme = "besqx" if fam == "besq" and 2 * nu + 1 < 0 else fam
    for i, start in enumerate(range(0, n_paths, chunk_size)):
        stop = min(start + chunk_size, n_paths)
        rng = stream_rng(seed, i)
        fix_rng = stream_rng(seed, 2**32 + i)
        x = x0[start:stop].copy()
        paths[start:stop, 0] = x
        if scheme == "besq":
            x = np.sqrt(x)
        slot = 1
        sq = math.sqrt(dt)
        for k in range(1, n_steps + 1):
            dw = sq * rng.standard_normal(x.shape)
            y, ok = _step(scheme, nu, x, dw, dt)
            bad = np.flatnonzero(~ok)
            for b in bad:
                y[b] = _refine(scheme, nu, x[b], dw[b], dt, fix_rng, 0, stats)
            x = y
            while slot < times.size and out_steps[slot] == k:
                paths[start:stop, slot] = x * x if scheme == "besq" else x
                slot += 1
    return Trajectory(times, paths, fam, "euler", nu=float(nu), seed=seed, dt=float(dt), extra=stats)


# -- matrix-valued Brownian motion -------------------------------------------


def _hermitian_increment(rng, shape, n, var):
    g = rng.standard_normal(shape + (n, n)) + 1j * rng.standard_normal(shape + (n, n))
    return (g + np.conj(np.swapaxes(g, -1, -2))) * (0.5 * math.sqrt(var))


def _class_increment(rng, shape, N, var, kind):
    """Increment ``[[A, B], [B^H, -A^T]]`` with ``A`` GUE and ``B`` symmetric (C) or antisymmetric (D).

    Normalized so the squared positive eigenvalues have the chGUE law of
    index ``+1/2`` (C) or ``-1/2`` (D) with variance ``var``.
    """
    a = _hermitian_increment(rng, shape, N, var)
    # diagonal of B: real and imaginary parts N(0, var); off-diagonal: N(0, var/2)
    g = 0.5 * math.sqrt(var) * (rng.standard_normal(shape + (N, N)) + 1j * rng.standard_normal(shape + (N, N)))
    bt = np.swapaxes(g, -1, -2)
    b = g + bt if kind == "C" else g - bt
    top = np.concatenate([a, b], axis=-1)
    bottom = np.concatenate([np.conj(np.swapaxes(b, -1, -2)), -np.swapaxes(a, -1, -2)], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _matrix_route(fam, nu):
    if fam == "bm":
        return "gue"
    if nu == 0.5:
        return "C"
    if nu == -0.5:
        return "D"
    if float(nu).is_integer() and nu >= 0:
        return "wishart"
    raise ValueError("the matrix route needs a nonnegative integer nu or nu = +-1/2")


def _matrix_states(route, m, N):
    if route == "gue":
        return np.linalg.eigvalsh(m)
    if route == "wishart":
        s = np.linalg.svd(m, compute_uv=False)
        return np.sort(s * s, axis=-1)
    ev = np.linalg.eigvalsh(m)[..., N:]
    return np.sort(ev * ev, axis=-1)


def simulate_matrix(family, N, nu, times, seed=None, n_paths=1, chunk_size=DEFAULT_CHUNK, x0=None):
    """Eigenvalue paths of matrix-valued Brownian motion from ``N delta_0``.

    ``times`` are the output times (0 is prepended when missing).  For the
    squared Bessel family ``nu`` must be a nonnegative integer or ``+-1/2``.
    """
    fam = _family(family)
    if x0 is not None and np.any(np.asarray(x0) != 0):
        raise ValueError("the matrix route only starts from N delta_0")
    nu = 0.0 if fam == "bm" else float(nu)
    route = _matrix_route(fam, nu)
    seed = resolve_seed(seed)
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        times = np.r_[0.0, times]
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    paths = np.zeros((n_paths, times.size, N))
    for i, start in enumerate(range(0, n_paths, chunk_size)):
        p = min(start + chunk_size, n_paths) - start
        rng = stream_rng(seed, i)
        m = None
        for j in range(1, times.size):
            var = times[j] - times[j - 1]
            if route == "gue":
                inc = _hermitian_increment(rng, (p,), N, var)
            elif route == "wishart":
                rows = N + int(nu)
                inc = math.sqrt(var) * (rng.standard_normal((p, rows, N)) + 1j * rng.standard_normal((p, rows, N)))
            else:
                inc = _class_increment(rng, (p,), N, var, route)
            m = inc if m is None else m + inc
            paths[start : start + p, j] = _matrix_states(route, m, N)
    return Trajectory(times, paths, fam, "matrix", nu=nu, seed=seed, extra={"matrix": route})


def warm_start(family, N, nu, t_eps, seed=None, n_paths=1):
    """Exact states at time ``t_eps`` from ``N delta_0`` (matrix route), shape ``(n_paths, N)``.

    Starting :func:`simulate_euler` from these and shifting its clock by
    ``t_eps`` continues the process from ``N delta_0``.
    """
    return simulate_matrix(family, N, nu, [t_eps], seed=seed, n_paths=n_paths).paths[:, -1, :]


# -- summaries ---------------------------------------------------------------


def _mean_var_err(v):
    n = v.shape[0]
    mean = v.mean(axis=0)
    var = v.var(axis=0, ddof=1) if n > 1 else np.zeros_like(mean)
    return mean, var, np.sqrt(var / n)


def gap_statistics(traj: Trajectory) -> dict:
    """Per-time means, variances and standard errors of positions, adjacent gaps and squared gaps.

    Arrays are indexed ``[time, coordinate]``.
    """
    if traj.N < 2:
        raise ValueError("gap statistics need at least 2 particles")
    x = traj.paths
    gaps = np.diff(x, axis=-1)
    out = {"times": traj.times, "n_paths": traj.n_paths}
    for name, v in (("position", x), ("gap", gaps), ("gap2", gaps * gaps)):
        mean, var, err = _mean_var_err(v)
        out[f"{name}_mean"], out[f"{name}_var"], out[f"{name}_stderr"] = mean, var, err
    return out
