"""Eigenvalue laws of the Gaussian ensembles, exact samplers and the Monte Carlo engine.

Normalization contract
----------------------
GUE(N, s2)
    Hermitian ``H`` with real diagonal ``N(0, s2)`` and off-diagonal entries
    whose real and imaginary parts are ``N(0, s2/2)``, so ``E|H_jk|^2 = s2``.
chGUE(N, nu, s2)
    Squared singular values of an ``(N+nu) x N`` complex matrix with
    ``E|M_jk|^2 = 2 s2`` (real and imaginary parts ``N(0, s2)``).  A single
    point then has mean ``2 s2 (1+nu)``.
class C / class D
    The squared positive eigenvalues follow chGUE with ``nu = 1/2`` and
    ``nu = -1/2`` respectively and are sampled at that level.

Random streams
--------------
Every draw comes from a Philox generator keyed by
``SeedSequence(seed, spawn_key=(stream,))``.  Monte Carlo work is split into
fixed-size chunks, chunk ``i`` uses stream ``i``, and per-chunk
``(count, mean, M2)`` statistics are merged in a fixed binary tree.  The
estimate therefore does not depend on the number of worker threads.
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .detkit import vandermonde_product
from .specfun import _check_nu, _check_sigma2

__all__ = [
    "KINDS",
    "EnsembleSpec",
    "McReport",
    "gue_pdf",
    "chgue_pdf",
    "parse_seed",
    "resolve_seed",
    "stream_rng",
    "sample_gue",
    "sample_chgue",
    "sample_batch",
    "draw",
    "mc_expectation",
    "write_samples_csv",
    "DEFAULT_CHUNK",
]

KINDS = ("GUE", "chGUE", "classC", "classD")
_KIND_ALIASES = {k.lower(): k for k in KINDS} | {"c": "classC", "d": "classD"}
DEFAULT_CHUNK = 8192
DEFAULT_SEED = 0


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble kind, particle number, index and variance.

    ``nu`` is forced to ``1/2`` for class C and ``-1/2`` for class D; it is
    ignored for GUE.
    """

    kind: str
    N: int
    nu: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        _check_sigma2(self.sigma2)
        if kind == "classC":
            object.__setattr__(self, "nu", 0.5)
        elif kind == "classD":
            object.__setattr__(self, "nu", -0.5)
        elif kind == "GUE":
            object.__setattr__(self, "nu", 0.0)
        _check_nu(self.nu)

    @property
    def chiral(self) -> bool:
        return self.kind != "GUE"


@dataclass
class McReport:
    """Monte Carlo estimate with its standard error.

    For vector-valued integrands ``estimate`` and ``stderr`` are arrays.
    For complex integrands ``stderr`` is ``sqrt(E|f - mean|^2 / n)``.
    """

    estimate: complex | float | np.ndarray
    stderr: float | np.ndarray
    samples: int
    seed: int

    def z(self, exact):
        """``(estimate - exact) / stderr`` (modulus for complex values); 0 when both vanish."""
        diff = np.abs(np.asarray(self.estimate) - np.asarray(exact))
        se = np.asarray(self.stderr, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.inf))
        return out[()]

    def to_dict(self):
        return asdict(self)


# -- densities ---------------------------------------------------------------


def gue_pdf(N, sigma2, x):
    """Ordered-sector GUE eigenvalue density.

    ``sigma^(-N^2) / C_N * exp(-|x|^2 / 2 sigma2) * h_N(x)^2`` with
    ``C_N = (2 pi)^(N/2) prod_{j<=N} Gamma(j)``.  The expression is symmetric
    in ``x``, and integrates to one over ``x_1 <= .. <= x_N``.
    Works on the last axis of ``x``.
    """
    _check_sigma2(sigma2)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != N:
        raise ValueError(f"expected {N} points on the last axis")
    log_c = 0.5 * N * math.log(2 * math.pi) + sum(math.lgamma(j) for j in range(1, N + 1))
    log_pref = -0.5 * N * N * math.log(sigma2) - log_c
    h = vandermonde_product(x)
    return (np.exp(log_pref - np.sum(x * x, axis=-1) / (2 * sigma2)) * h * h)[()]


def chgue_pdf(N, nu, sigma2, x):
    """Ordered-sector density of chGUE squared singular values.

    ``sigma^(-2N(N+nu)) / C_N^nu * prod x_j^nu exp(-x_j / 2 sigma2) * h_N(x)^2``
    with ``C_N^nu = 2^(N(N+nu)) prod_{j<=N} Gamma(j) Gamma(j+nu)``.
    """
    _check_nu(nu)
    _check_sigma2(sigma2)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != N:
        raise ValueError(f"expected {N} points on the last axis")
    if np.any(x < 0):
        raise ValueError("chGUE points must be nonnegative")
    log_c = N * (N + nu) * math.log(2.0) + sum(math.lgamma(j) + math.lgamma(j + nu) for j in range(1, N + 1))
    log_pref = -N * (N + nu) * math.log(sigma2) - log_c
    h = vandermonde_product(x)
    with np.errstate(divide="ignore"):
        powers = np.prod(x**nu, axis=-1)
    return (powers * np.exp(log_pref - np.sum(x, axis=-1) / (2 * sigma2)) * h * h)[()]


# -- seeds and streams -------------------------------------------------------


def parse_seed(seed) -> int:
    """Accept an int, a decimal string or a ``0x`` hex string; return a 64-bit seed."""
    if isinstance(seed, (int, np.integer)):
        value = int(seed)
    else:
        text = str(seed).strip().lower()
        value = int(text, 16) if text.startswith("0x") else int(text, 10)
    if not 0 <= value < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    return value


def resolve_seed(seed=None) -> int:
    """``seed`` if given, else ``$RMT_SEED``, else 0."""
    if seed is None:
        env = os.environ.get("RMT_SEED")
        return parse_seed(env) if env else DEFAULT_SEED
    return parse_seed(seed)


def stream_rng(seed, stream: int = 0) -> np.random.Generator:
    """Independent Philox generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(parse_seed(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


# -- samplers ----------------------------------------------------------------


def _gue_batch(rng, n, N, sigma2):
    g = rng.standard_normal((n, N, N)) + 1j * rng.standard_normal((n, N, N))
    h = (g + np.conj(np.swapaxes(g, -1, -2))) * (0.5 * math.sqrt(sigma2))
    return np.linalg.eigvalsh(h)


def _wishart_batch(rng, n, N, nu, sigma2):
    rows = N + int(nu)
    m = math.sqrt(sigma2) * (rng.standard_normal((n, rows, N)) + 1j * rng.standard_normal((n, rows, N)))
    s = np.linalg.svd(m, compute_uv=False)
    return np.sort(s * s, axis=-1)


def _bidiagonal_batch(rng, n, N, nu, sigma2):
    # beta = 2 Laguerre model: diag chi_{2(N+nu-i)}, subdiag chi_{2(N-1-i)}
    b = np.zeros((n, N, N))
    diag_df = 2.0 * (N + nu - np.arange(N))
    b[:, np.arange(N), np.arange(N)] = np.sqrt(rng.chisquare(diag_df, size=(n, N)))
    if N > 1:
        sub_df = 2.0 * (N - 1 - np.arange(N - 1))
        b[:, np.arange(1, N), np.arange(N - 1)] = np.sqrt(rng.chisquare(sub_df, size=(n, N - 1)))
    s = np.linalg.svd(b, compute_uv=False)
    return np.sort(sigma2 * s * s, axis=-1)


def _chgue_method(nu, method):
    if method == "auto":
        return "wishart" if float(nu).is_integer() and nu >= 0 else "bidiagonal"
    if method == "wishart" and not (float(nu).is_integer() and nu >= 0):
        raise ValueError("the Wishart sampler needs a nonnegative integer nu")
    if method not in ("wishart", "bidiagonal"):
        raise ValueError(f"unknown chGUE sampler {method!r}")
    return method


def sample_batch(spec: EnsembleSpec, rng: np.random.Generator, size: int, method: str = "auto") -> np.ndarray:
    """``size`` independent ordered configurations, shape ``(size, N)``."""
    if spec.kind == "GUE":
        return _gue_batch(rng, size, spec.N, spec.sigma2)
    if _chgue_method(spec.nu, method) == "wishart":
        return _wishart_batch(rng, size, spec.N, spec.nu, spec.sigma2)
    return _bidiagonal_batch(rng, size, spec.N, spec.nu, spec.sigma2)


def sample_gue(N, sigma2, seed, size=None):
    """Ordered GUE eigenvalues; shape ``(N,)`` or ``(size, N)``."""
    out = draw(EnsembleSpec("GUE", N, sigma2=sigma2), 1 if size is None else size, seed)
    return out[0] if size is None else out


def sample_chgue(N, nu, sigma2, seed, size=None, method="auto"):
    """Ordered chGUE squared singular values.

    ``method`` is ``"wishart"`` (integer ``nu`` only), ``"bidiagonal"`` or
    ``"auto"`` (Wishart when possible).
    """
    out = draw(EnsembleSpec("chGUE", N, nu=nu, sigma2=sigma2), 1 if size is None else size, seed, method=method)
    return out[0] if size is None else out


def _chunks(samples, chunk_size):
    starts = range(0, samples, chunk_size)
    return [(i, min(chunk_size, samples - s)) for i, s in enumerate(starts)]


def draw(spec: EnsembleSpec, samples: int, seed, chunk_size: int = DEFAULT_CHUNK, method: str = "auto") -> np.ndarray:
    """All configurations of a seeded run, shape ``(samples, N)``.

    Uses the same chunk/stream layout as :func:`mc_expectation`.
    """
    seed = parse_seed(seed)
    parts = [sample_batch(spec, stream_rng(seed, i), n, method) for i, n in _chunks(samples, chunk_size)]
    return np.concatenate(parts, axis=0)


# -- Monte Carlo -------------------------------------------------------------


def _chunk_stats(values):
    values = np.asarray(values)
    mean = values.mean(axis=0)
    dev = values - mean
    m2 = np.sum((dev * np.conj(dev)).real, axis=0)
    return values.shape[0], mean, m2


def _merge(a, b):
    na, ma, m2a = a
    nb, mb, m2b = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    m2 = m2a + m2b + (delta * np.conj(delta)).real * (na * nb / n)
    return n, mean, m2


def _tree_reduce(stats):
    while len(stats) > 1:
        merged = [_merge(stats[i], stats[i + 1]) for i in range(0, len(stats) - 1, 2)]
        if len(stats) % 2:
            merged.append(stats[-1])
        stats = merged
    return stats[0]


def mc_expectation(
    spec: EnsembleSpec,
    f: Callable,
    samples: int,
    seed=None,
    threads: int = 1,
    vectorized: bool = True,
    chunk_size: int = DEFAULT_CHUNK,
    method: str = "auto",
) -> McReport:
    """Sample mean and standard error of ``f`` under the ensemble law.

    Parameters
    ----------
    spec : EnsembleSpec
    f : callable
        With ``vectorized=True`` it maps an ``(n, N)`` batch to an ``(n,)`` or
        ``(n, k)`` array; otherwise it maps one configuration to a scalar or a
        length-``k`` array.  Vector outputs share the same draws.
    samples : int
        At least 2.
    seed : int or str, optional
        Falls back to ``$RMT_SEED``.
    threads : int
        Worker threads.  The estimate is independent of this value.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    seed = resolve_seed(seed)

    def work(job):
        i, n = job
        x = sample_batch(spec, stream_rng(seed, i), n, method)
        vals = f(x) if vectorized else np.array([f(row) for row in x])
        vals = np.asarray(vals)
        if vals.ndim == 0:
            vals = np.full(n, vals[()])
        if vals.shape[0] != n:
            raise ValueError("integrand returned the wrong number of values")
        return _chunk_stats(vals)

    jobs = _chunks(samples, chunk_size)
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(work, jobs))
    else:
        stats = [work(j) for j in jobs]
    n, mean, m2 = _tree_reduce(stats)
    stderr = np.sqrt(m2 / (n - 1) / n)
    if np.iscomplexobj(mean) and np.all(np.imag(mean) == 0):
        mean = np.real(mean)
    if np.ndim(mean) == 0:
        mean = complex(mean) if np.iscomplexobj(mean) else float(mean)
        stderr = float(stderr)
    return McReport(estimate=mean, stderr=stderr, samples=n, seed=seed)


def write_samples_csv(dest, samples: np.ndarray):
    """Write configurations as CSV with header ``index,x_1,...,x_N`` and 17 significant digits.

    ``dest`` is a path or a text stream.  Returns the CSV text.
    """
    samples = np.atleast_2d(samples)
    buf = io.StringIO()
    buf.write(",".join(["index"] + [f"x_{j + 1}" for j in range(samples.shape[1])]) + "\n")
    for i, row in enumerate(samples):
        buf.write(",".join([str(i)] + [format(float(v), ".17g") for v in row]) + "\n")
    text = buf.getvalue()
    if hasattr(dest, "write"):
        dest.write(text)
    elif dest is not None:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return text
