"""
Discrete count against continuous time
======================================

Packets arrive as a unit-rate Poisson stream, so the discrete count D and
the continuous time T share a mean and their CDFs are close.  The coupling
bounds sandwich P(D <= d) between shifted values of the exact continuous CDF.
"""
from ppm_traceback import PathParameters, build_distribution, coupling_bounds, limit_law, simulate_discrete_coupled, summarize

n = 10_000
dist = build_distribution(PathParameters(n, 1.0))
s = summarize(simulate_discrete_coupled(dist, 20_000, seed=3))
main = limit_law(n, 1.0).main_term
print(f"{'d':>10} {'lower':>7} {'ECDF':>7} {'upper':>7}")
for k in (-2, -1, 0, 1, 2):
    d = main + k * n
    lo, hi = coupling_bounds(d, dist)
    print(f"{d:10.0f} {lo:7.3f} {s.ecdf(d):7.3f} {hi:7.3f}")
