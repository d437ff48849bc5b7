"""
Three ways to sample the reconstruction time
============================================

The naive engine draws coupons one at a time.  The continuous engine takes
the maximum of n exponential first-arrival times.  The coupled engine runs
the same Poisson clock and reads off the discrete count exactly, at O(n) cost
per trial whatever the path length.
"""
import time

from ppm_traceback import (
    PathParameters,
    build_distribution,
    exact_expected_time,
    simulate_continuous,
    simulate_discrete_coupled,
    simulate_discrete_naive,
    summarize,
)
from ppm_traceback.stats import ks_two_sample, two_sample_threshold

dist = build_distribution(PathParameters(10, 1.0))
exact = exact_expected_time(dist)
print(f"n=10 exact E(T) = E(D) = {exact:.4f}")

for engine in (simulate_discrete_naive, simulate_continuous, simulate_discrete_coupled):
    t0 = time.perf_counter()
    s = summarize(engine(dist, 100_000, seed=1))
    print(f"{engine.__name__:26s} mean {s.mean:8.4f} +- {s.std_error:.4f}  ({time.perf_counter() - t0:.2f} s)")

# Same law, different algorithms
a = simulate_discrete_naive(dist, 50_000, seed=2)
b = simulate_discrete_coupled(dist, 50_000, seed=3)
print(f"two-sample KS {ks_two_sample(a, b):.4f}, 1% threshold {two_sample_threshold(a.M, b.M):.4f}")

# The coupled engine at the scale of a real path
big = build_distribution(PathParameters(10_000, 1.0))
t0 = time.perf_counter()
s = summarize(simulate_discrete_coupled(big, 2000, seed=4))
print(f"n=10^4: mean {s.mean:.0f} packets from 2000 trials in {time.perf_counter() - t0:.1f} s")
