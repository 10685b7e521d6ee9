"""Noncolliding Brownian motion and squared Bessel processes, their determinantal
structure, and characteristic-polynomial averages of Gaussian random matrices.

Modules
-------
specfun      Hermite/Laguerre polynomials, Bessel functions, Christoffel-Darboux sums.
detkit       Determinants, Vandermonde products, Cauchy and Ishikawa identities.
densities    Transition densities and Karlin-McGregor determinants.
ensembles    GUE / chGUE / class C, D laws, exact samplers, seeded Monte Carlo.
charpoly     Closed forms for averages of products of characteristic polynomials.
biorth       Biorthogonal functions and correlation kernels for general starts.
processes    Euler and matrix-valued simulation of the particle systems.
equivalence  Monte Carlo checks of the time-shift equivalence.
battery      Deterministic identity checks.
cli          Command-line front end.
"""

from .biorth import InitialConfig, corr_kernel, ext_hermite_kernel, ext_laguerre_kernel
from .charpoly import closed_form, m_class, m_gue_monic_form, m_gue_pair_form, m_nu_monic_form, m_nu_pair_form, mc_charpoly
from .ensembles import EnsembleSpec, mc_expectation, sample_chgue, sample_gue
from .processes import Trajectory, gap_statistics, simulate_euler, simulate_matrix, warm_start

__version__ = "0.1.0"
