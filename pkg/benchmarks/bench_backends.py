"""Timing comparison of the Monte Carlo outage kernels.

Runs the same counter-based estimate through the numba njit loop and
the vectorised numpy fallback, checks the counts agree exactly, and
reports throughput.  Usage:

    python benchmarks/bench_backends.py [n_samples]
"""

import sys
import time

import numpy as np

from coopjam._kernels import _HAVE_NUMBA, mc_outage_count

SETTINGS = [
    ("n1m1", 2.0, np.array([1.5]), 0.1, np.array([0.1])),
    ("n3m2", 2.0, np.array([1.0, 1.0, 3.0]), 0.1, np.array([0.1, 0.1])),
    ("n4m4", 31.6, np.array([1.26, 1.59, 2.0, 2.51]), 0.1, np.full(4, 0.1)),
]


def run(n_samples: int):
    mu, nu = 2.0, 2.0 ** -1 - 1.0
    backends = ["numpy"] + (["numba"] if _HAVE_NUMBA else [])
    if _HAVE_NUMBA:
        # compile outside the timed region
        mc_outage_count(2.0, np.array([1.0]), 0.1, np.array([0.1]),
                        mu, nu, 0, 1000, backend="numba")
    for label, ps, p, sig2d, sig2e in SETTINGS:
        counts = {}
        print(f"{label}: N={p.size} M={sig2e.size} samples={n_samples:.0e}")
        for backend in backends:
            t0 = time.perf_counter()
            counts[backend] = mc_outage_count(ps, p, sig2d, sig2e, mu, nu,
                                              seed=123, n_samples=n_samples,
                                              backend=backend)
            dt = time.perf_counter() - t0
            print(f"  {backend:6s} {dt:7.2f}s  "
                  f"{n_samples / dt / 1e6:6.1f} M samples/s  "
                  f"p_out={counts[backend] / n_samples:.6f}")
        if len(counts) == 2 and counts["numpy"] != counts["numba"]:
            raise SystemExit(f"backend mismatch on {label}: {counts}")
    print("all backends agree" if _HAVE_NUMBA else "numba unavailable; "
          "only the numpy path was timed")


if __name__ == "__main__":
    run(int(float(sys.argv[1])) if len(sys.argv) > 1 else 2_000_000)
