"""Noncolliding paths started from a random matrix ensemble.

Start N Brownian particles from the eigenvalues of a GUE matrix with
variance s2 and run them for time t.  The resulting one-point density and
multi-point correlations match those of paths started from the origin and
run for time s2 + t.  This script estimates both sides on a grid.  Run:

    python demos/time_shift.py
"""

import numpy as np

from noncolliding.equivalence import verify_density_shift, verify_onepoint


def table(rep, label):
    print(label)
    print(f"  {'point':>14} {'estimate':>11} {'closed form':>11} {'z':>6}")
    for g, e, c, z in zip(rep["grid"], rep["estimates"], rep["closed_form"], rep["z"]):
        print(f"  {str(np.round(g, 3)):>14} {e:11.5f} {c:11.5f} {z:6.2f}")
    print(f"  pass: {rep['pass']}\n")


def main():
    N, s2, t = 2, 0.5, 0.5
    table(verify_onepoint("bm", N, 0.0, s2, t, np.linspace(-2, 2, 5), 100_000, seed=1), "Brownian motion, density of particles")
    table(verify_onepoint("besq", N, 0.0, s2, t, np.linspace(0.25, 3, 5), 100_000, seed=2), "squared Bessel nu=0, density of particles")
    configs = [[-1.0, 0.5], [0.0, 1.0], [0.5, 2.0]]
    table(verify_density_shift("bm", N, 0.0, s2, t, configs, 100_000, seed=3), "Brownian motion, joint density at time t")


if __name__ == "__main__":
    main()
