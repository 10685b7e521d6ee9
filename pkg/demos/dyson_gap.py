"""Two simulators for Dyson's Brownian motion.

The matrix route diagonalizes a Hermitian Brownian motion; the Euler route
integrates the interacting SDEs from an exact state at a small time.  For
two particles started together, E[(X_2 - X_1)^2] = 6t.  Run:

    python demos/dyson_gap.py
"""

import numpy as np

from noncolliding import gap_statistics, simulate_euler, simulate_matrix, warm_start

PATHS = 5_000


def main():
    times = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    t_eps, dt = 0.01, 1e-3
    mx = gap_statistics(simulate_matrix("bm", 2, 0.0, times, seed=1, n_paths=PATHS))
    x0 = warm_start("bm", 2, 0.0, t_eps, seed=2, n_paths=PATHS)
    # the Euler clock starts at t_eps
    eu = gap_statistics(simulate_euler("bm", 2, 0.0, x0, dt, times[-1] - t_eps, seed=3, n_paths=PATHS, times=times - t_eps))
    print(f"{'t':>5} {'6t':>6} {'matrix':>16} {'euler':>16}")
    for k, t in enumerate(times):
        m, sm = mx["gap2_mean"][k + 1, 0], mx["gap2_stderr"][k + 1, 0]
        e, se = eu["gap2_mean"][k + 1, 0], eu["gap2_stderr"][k + 1, 0]
        print(f"{t:5.2f} {6 * t:6.2f} {m:8.3f} +- {sm:.3f} {e:8.3f} +- {se:.3f}")


if __name__ == "__main__":
    main()
