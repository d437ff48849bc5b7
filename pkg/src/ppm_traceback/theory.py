"""Exact and asymptotic predictions for the reconstruction time.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .attack_model import CouponDistribution
from .distributions import EULER_GAMMA, GumbelParams, gumbel_cdf

__all__ = [
    "TheoryPrediction",
    "exact_continuous_cdf",
    "expected_time_asymptotic",
    "limit_law",
    "band_half_width",
    "cdf_band",
    "normalized_band",
    "exact_expected_time",
    "expected_time_quadrature",
    "coupling_bounds",
]

BAND_CONSTANT = 0.25
MAX_EXACT_N = 25


@dataclass(frozen=True)
class TheoryPrediction:
    """Leading-order prediction for (n, lambda).

    ``limit_law`` describes ``(raw - center) / scale``; ``raw_law`` is the same
    law pushed back to packets (or time units).
    """

    n: int
    lam: float
    main_term: float
    error_scale: float
    limit_law: GumbelParams
    center: float
    scale: float

    @property
    def normalization(self) -> tuple[float, float]:
        return self.center, self.scale

    @property
    def raw_law(self) -> GumbelParams:
        return self.limit_law.affine(self.scale, self.center)

    def normalize(self, raw):
        return (np.asarray(raw, dtype=float) - self.center) / self.scale

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda": self.lam,
            "main_term": self.main_term,
            "error_scale": self.error_scale,
            "center": self.center,
            "scale": self.scale,
            "limit_law": self.limit_law.to_dict(),
            "raw_law": self.raw_law.to_dict(),
        }


def _check_asymptotic_args(n, lam):
    if n < 3:
        raise ValueError(f"asymptotic expansion needs n >= 3 (ln ln n > 0), got n={n}")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")


def exact_continuous_cdf(t, dist: CouponDistribution, block: int = 256):
    """P(T <= t) = prod_i (1 - exp(-p_i t)) for the finite path, no asymptotics.

    Accepts a scalar or an array of times; negative times map to 0.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    rates = dist.rates
    out = np.zeros(t_arr.shape)
    flat_t = t_arr.ravel()
    flat_out = out.reshape(-1)
    positive = np.flatnonzero(flat_t > 0)
    for a in range(0, positive.size, block):
        idx = positive[a:a + block]
        x = np.multiply.outer(flat_t[idx], rates)
        # log(1 - e^-x) without cancellation for small x
        log_terms = np.log(-np.expm1(-x))
        flat_out[idx] = np.exp(log_terms.sum(axis=1))
    return float(out[0]) if np.ndim(t) == 0 else out


def expected_time_asymptotic(n: int, lam: float) -> tuple[float, float]:
    """Main term and error scale of the expected reconstruction time.

    main = (e^lam / lam) n (ln n - ln ln n + gamma - ln lam),
    error = n ln ln n / ln n.
    """
    _check_asymptotic_args(n, lam)
    ln_n = math.log(n)
    lnln_n = math.log(ln_n)
    main = math.exp(lam) / lam * n * (ln_n - lnln_n + EULER_GAMMA - math.log(lam))
    return main, n * lnln_n / ln_n


def limit_law(n: int, lam: float) -> TheoryPrediction:
    _check_asymptotic_args(n, lam)
    coef = math.exp(lam) / lam
    ln_n = math.log(n)
    center = coef * n * (ln_n - math.log(ln_n))
    main, err = expected_time_asymptotic(n, lam)
    law = GumbelParams(-coef * math.log(lam), coef)
    return TheoryPrediction(n, float(lam), main, err, law, center, float(n))


def band_half_width(n: int, constant: float = BAND_CONSTANT) -> float:
    if n < 3:
        raise ValueError("band needs n >= 3")
    ln_n = math.log(n)
    return constant * math.log(ln_n) / ln_n


def cdf_band(t, n: int, lam: float = 1.0):
    """Limit-law CDF of the raw count, shifted up and down by 0.25 ln ln n / ln n.

    Only the lambda = 1 raw-scale form is defined here; use
    ``normalized_band`` for other lambda.  Returns ``(lower, upper)`` clamped
    to [0, 1].
    """
    if lam != 1.0:
        raise ValueError("cdf_band is defined for lambda = 1 only; use normalized_band")
    pred = limit_law(n, 1.0)
    return normalized_band(pred.normalize(t), n, 1.0, BAND_CONSTANT)


def normalized_band(t_norm, n: int, lam: float, constant: float):
    """Limit-law CDF of the normalized variable +- constant * ln ln n / ln n."""
    law = limit_law(n, lam).limit_law
    centre = np.asarray(gumbel_cdf(np.asarray(t_norm, dtype=float), law))
    h = band_half_width(n, constant)
    lower = np.clip(centre - h, 0.0, 1.0)
    upper = np.clip(centre + h, 0.0, 1.0)
    if np.ndim(t_norm) == 0:
        return float(lower), float(upper)
    return lower, upper


def exact_expected_time(dist: CouponDistribution) -> float:
    """E(max_i Exp(p_i)) by inclusion-exclusion over all non-empty subsets.

    The sum  sum_S (-1)^(|S|+1) / sum_{i in S} p_i  has 2^n terms.  Subsets of
    the first (up to 16) rates are tabulated once; the remaining rates are
    walked in Gray-code order, so each step changes the running rate sum by a
    single add or subtract and the inner sum is one vector operation.
    """
    rates = np.asarray(dist.rates, dtype=float)
    n = rates.size
    if n > MAX_EXACT_N:
        raise ValueError(f"inclusion-exclusion needs 2^n terms; refusing n={n} > {MAX_EXACT_N}")
    if np.any(rates <= 0):
        raise ValueError("all real coupon probabilities must be positive")

    low, high = rates[: min(n, 16)], rates[min(n, 16):]
    sums = np.zeros(1)
    parity = np.ones(1)  # (-1)^|S|
    for r in low:
        sums = np.concatenate([sums, sums + r])
        parity = np.concatenate([parity, -parity])

    total = -np.sum(parity[1:] / sums[1:])
    h, h_parity, mask = 0.0, 1.0, 0
    for k in range(1, 1 << high.size):
        bit = (k & -k).bit_length() - 1
        if mask >> bit & 1:
            h -= high[bit]
        else:
            h += high[bit]
        mask ^= 1 << bit
        h_parity = -h_parity
        total -= h_parity * np.sum(parity / (sums + h))
    return float(total)


def expected_time_quadrature(dist: CouponDistribution) -> float:
    """E(T) as the integral of P(T > t) over [0, t_max], for any n.

    P(T > t) <= n exp(-p_min t), so past t_max = (ln n + 40) / p_min the
    remainder is below e^-40 / p_min.  The range is cut into pieces one mean
    waiting time of the rarest coupon wide, which keeps adaptive quadrature
    away from the flat tail where it loses accuracy.
    """
    rates = np.asarray(dist.rates, dtype=float)
    if np.any(rates <= 0):
        raise ValueError("all real coupon probabilities must be positive")
    width = 1.0 / rates.min()
    edges = np.arange(0.0, (math.log(rates.size) + 40.0) * width + width, width)

    def survival(t):
        return 1.0 - exact_continuous_cdf(t, dist)

    return float(math.fsum(integrate.quad(survival, a, b, limit=200)[0] for a, b in zip(edges[:-1], edges[1:])))


def coupling_bounds(d, dist: CouponDistribution):
    """Bounds on P(D <= d) from the Poisson-stream coupling.

    lower = F_T(d - d^(3/4)) - (d - d^(3/4))^(-1/3)
    upper = F_T(d + d^(3/4)) + (d + d^(3/4))^(-1/3)
    both clamped to [0, 1].
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(~np.isfinite(d_arr)) or np.any(d_arr <= 1.0):
        raise ValueError("coupling bounds need finite d with d - d^(3/4) > 0, i.e. d > 1")
    below = d_arr - d_arr**0.75
    above = d_arr + d_arr**0.75
    lower = np.clip(exact_continuous_cdf(below, dist) - below ** (-1.0 / 3.0), 0.0, 1.0)
    upper = np.clip(exact_continuous_cdf(above, dist) + above ** (-1.0 / 3.0), 0.0, 1.0)
    if np.ndim(d) == 0:
        return float(lower), float(upper)
    return lower, upper
