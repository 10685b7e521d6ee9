"""Averages of products of characteristic polynomials.

Walks through the closed forms for E[prod_j det(alpha_j - H)] and checks
each one against a seeded Monte Carlo estimate.  Run:

    python demos/charpoly_averages.py
"""

import numpy as np

from noncolliding import EnsembleSpec, closed_form, m_class, m_gue_monic_form, m_gue_pair_form, mc_charpoly

SAMPLES = 100_000


def fmt(v, digits=6):
    v = complex(v)
    return f"{v.real:.{digits}g}" if abs(v.imag) <= 1e-12 * abs(v) else f"{v:.{digits}g}"


def show(label, spec, alpha):
    exact = closed_form(spec, alpha)
    rep = mc_charpoly(spec, alpha, SAMPLES, seed=1)
    print(f"{label:<34} exact {fmt(exact)}  mc {fmt(rep.estimate)} +- {rep.stderr:.2g}  z={rep.z(exact):.2f}")


def main():
    # A 1x1 GUE matrix with unit variance: E[(0 - h)(1 - h)] = E[h^2] = 1.
    show("GUE N=1, alpha=(0,1)", EnsembleSpec("GUE", 1, sigma2=1.0), [0.0, 1.0])

    # The same value appears for a chiral 1x1 matrix at sigma2 = 1/2.
    show("chGUE N=1, nu=0, alpha=(0,1)", EnsembleSpec("chGUE", 1, nu=0.0, sigma2=0.5), [0.0, 1.0])

    # Larger cases: the pair form (kernel determinant) and the monic form
    # (polynomial determinant over a Vandermonde) give the same number.
    alpha = np.array([0.3, 1.1, -0.7, 2.0])
    print(f"\npair vs monic, GUE N=4: {fmt(m_gue_pair_form(2, alpha, 4, 1.0), 13)} vs {fmt(m_gue_monic_form(2, alpha, 4, 1.0), 13)}")
    # with more factors the products grow heavy tails, so the Monte Carlo check stays at N=2
    show("GUE N=2, four points", EnsembleSpec("GUE", 2, sigma2=0.7), [0.4 + 0.3j, 1.3, 2.1, 0.9 - 0.2j])

    # Class C and D only see alpha^2; the Hermite and Laguerre expressions agree.
    for kind in ("C", "D"):
        her, lag = m_class(kind, 1, [0.8, 1.7], 3, 1.0, return_both=True)
        print(f"class {kind} N=3: Hermite form {fmt(her, 13)}, Laguerre form {fmt(lag, 13)}")
    # imaginary points keep the Monte Carlo products light-tailed
    show("class D N=3, imaginary points", EnsembleSpec("classD", 3), [0.8j, 1.7j])


if __name__ == "__main__":
    main()
