"""
Exact and limiting laws of the reconstruction time
==================================================

For finite n the continuous time has the product CDF prod(1 - exp(-p_i t)).
After centring by (e^lam / lam) n (ln n - ln ln n) and scaling by n it tends
to a Gumbel law.  The approach is slow: at n = 10^4 the two CDFs are still
about 0.066 apart.
"""
import numpy as np

from ppm_traceback import (
    PathParameters,
    build_distribution,
    exact_continuous_cdf,
    expected_time_asymptotic,
    expected_time_quadrature,
    gumbel_cdf,
    limit_law,
)
from ppm_traceback.theory import band_half_width

for n in (100, 1000, 10_000, 100_000):
    pred = limit_law(n, 1.0)
    dist = build_distribution(PathParameters(n, 1.0))
    t = np.linspace(pred.center - 3 * n, pred.center + 12 * n, 3001)
    gap = np.max(np.abs(exact_continuous_cdf(t, dist) - gumbel_cdf(pred.normalize(t), pred.limit_law)))
    main, err = expected_time_asymptotic(n, 1.0)
    print(f"n={n:>6}  E(T)={expected_time_quadrature(dist):12.1f}  main term={main:12.1f} +- {err:8.1f}  "
          f"sup gap={gap:.4f}  band half-width={band_half_width(n):.4f}")

pred = limit_law(10_000, 1.0)
print("raw limit law at n = 10^4:", pred.raw_law)

# Marking probability: the cost coefficient e^lam / lam is smallest at lam = 1
for lam in (0.5, 1.0, 2.0):
    print(f"lambda={lam}: main term {expected_time_asymptotic(10_000, lam)[0]:.0f}")
