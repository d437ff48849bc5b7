"""Sample summaries, Kolmogorov-Smirnov distances and Gumbel fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .distributions import EULER_GAMMA, GumbelParams

__all__ = [
    "DegenerateSampleError",
    "FitConvergenceError",
    "SampleSummary",
    "summarize",
    "running_moments",
    "ks_distance",
    "ks_two_sample",
    "dkw_bound",
    "two_sample_threshold",
    "fit_gumbel_moments",
    "gumbel_from_moments",
    "fit_gumbel_mle",
    "gumbel_mle_residual",
    "gumbel_loglik",
    "band_excess",
]

MLE_RESIDUAL_TOL = 1e-8


class DegenerateSampleError(ValueError):
    """Sample has zero spread, so no scale parameter can be estimated."""


class FitConvergenceError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _values(sample) -> np.ndarray:
    values = getattr(sample, "values", sample)
    return np.asarray(values, dtype=float).ravel()


def running_moments(values, chunk: int = 1 << 16) -> tuple[int, float, float]:
    """Single pass count / mean / sum of squared deviations.

    Chunks are merged with the pairwise update of Chan, Golub and LeVeque, so
    no raw sum of squares is ever formed.
    """
    count, mean, m2 = 0, 0.0, 0.0
    for a in range(0, len(values), chunk):
        block = values[a:a + chunk]
        nb = block.size
        mb = float(block.mean())
        m2b = float(np.sum((block - mb) ** 2))
        delta = mb - mean
        total = count + nb
        mean += delta * nb / total
        m2 += m2b + delta * delta * count * nb / total
        count = total
    return count, mean, m2


@dataclass(frozen=True)
class SampleSummary:
    M: int
    mean: float
    variance: float
    min: float
    max: float
    sorted_values: np.ndarray = field(repr=False)

    def ecdf(self, x):
        """Right-continuous empirical CDF, P_hat(X <= x)."""
        out = np.searchsorted(self.sorted_values, x, side="right") / self.M
        return float(out) if np.ndim(out) == 0 else out

    def ecdf_left(self, x):
        """Left limit of the empirical CDF, P_hat(X < x)."""
        out = np.searchsorted(self.sorted_values, x, side="left") / self.M
        return float(out) if np.ndim(out) == 0 else out

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.M)

    def to_dict(self) -> dict:
        return {"M": self.M, "mean": self.mean, "variance": self.variance, "min": self.min, "max": self.max}


def summarize(sample) -> SampleSummary:
    values = _values(sample)
    if values.size < 2:
        raise ValueError("need at least two values to estimate a variance")
    if not np.all(np.isfinite(values)):
        raise ValueError("sample contains non-finite values")
    count, mean, m2 = running_moments(values)
    ordered = np.sort(values)
    ordered.setflags(write=False)
    mean = min(max(mean, ordered[0]), ordered[-1])
    return SampleSummary(count, mean, m2 / (count - 1), float(ordered[0]), float(ordered[-1]), ordered)


def _sorted(sample) -> np.ndarray:
    if isinstance(sample, SampleSummary):
        return sample.sorted_values
    return np.sort(_values(sample))


def ks_distance(sample, cdf) -> float:
    """sup_x |ECDF(x) - cdf(x)| for a continuous reference ``cdf``.

    Evaluated at every distinct sample value against both the value of the
    ECDF there and its left limit, which is exact in the presence of ties.
    """
    x = _sorted(sample)
    if x.size == 0:
        raise ValueError("empty sample")
    support, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / x.size
    left = right - counts / x.size
    f = np.asarray(cdf(support), dtype=float)
    return float(max(np.max(right - f), np.max(f - left)))


def ks_two_sample(a, b) -> float:
    """sup_x |ECDF_a(x) - ECDF_b(x)|."""
    xa, xb = _sorted(a), _sorted(b)
    if xa.size == 0 or xb.size == 0:
        raise ValueError("empty sample")
    pooled = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, pooled, side="right") / xa.size
    fb = np.searchsorted(xb, pooled, side="right") / xb.size
    return float(np.max(np.abs(fa - fb)))


def dkw_bound(M: int, alpha: float = 0.01) -> float:
    """Dvoretzky-Kiefer-Wolfowitz radius: P(sup|ECDF - F| > eps) <= alpha."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * M))


def two_sample_threshold(m: int, n: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value sqrt(ln(2/alpha)/2) * sqrt((m+n)/(mn))."""
    return math.sqrt(math.log(2.0 / alpha) / 2.0) * math.sqrt((m + n) / (m * n))


def gumbel_from_moments(mean: float, variance: float) -> GumbelParams:
    if not variance > 0:
        raise DegenerateSampleError("zero variance: Gumbel scale undefined")
    beta = math.sqrt(6.0 * variance) / math.pi
    return GumbelParams(mean - EULER_GAMMA * beta, beta)


def fit_gumbel_moments(summary) -> GumbelParams:
    """Method-of-moments fit: the fitted law reproduces the sample mean and variance."""
    if not isinstance(summary, SampleSummary):
        summary = summarize(summary)
    return gumbel_from_moments(summary.mean, summary.variance)


def _weights(centered, beta):
    # shift by the smallest value so every weight is in (0, 1]
    z = (centered - centered.min()) / beta
    return np.exp(-z)


def gumbel_mle_residual(values, beta: float) -> float:
    """beta - mean(x) + sum x e^(-x/beta) / sum e^(-x/beta), computed on centred data."""
    x = _values(values)
    centered = x - x.mean()
    w = _weights(centered, beta)
    return beta + float(np.dot(centered, w) / w.sum())


def gumbel_loglik(values, params: GumbelParams, average: bool = True) -> float:
    x = _values(values)
    z = (x - params.mu) / params.beta
    ll = -math.log(params.beta) * x.size - float(np.sum(z)) - float(np.sum(np.exp(-z)))
    return ll / x.size if average else ll


def fit_gumbel_mle(sample, max_expansions: int = 20) -> GumbelParams:
    """Maximum-likelihood Gumbel fit.

    The scale solves  beta = mean(x) - sum x e^(-x/beta) / sum e^(-x/beta);
    Brent's method runs on a bracket grown from [b0/10, 10 b0] around the
    moments estimate b0.  The location follows in closed form,
    mu = -beta ln(mean(e^(-x/beta))).
    """
    x = _values(sample)
    if x.size < 2:
        raise ValueError("need at least two values")
    if x.max() == x.min():
        raise DegenerateSampleError("constant sample: Gumbel scale undefined")
    centered = x - x.mean()
    beta0 = gumbel_from_moments(0.0, float(np.var(centered, ddof=1))).beta

    def g(beta):
        w = _weights(centered, beta)
        return beta + float(np.dot(centered, w) / w.sum())

    lo, hi = beta0 / 10.0, beta0 * 10.0
    g_lo, g_hi = g(lo), g(hi)
    expansions = 0
    while g_lo * g_hi > 0:
        if expansions >= max_expansions:
            raise FitConvergenceError(
                "could not bracket the Gumbel MLE scale equation",
                {"bracket": (lo, hi), "residuals": (g_lo, g_hi), "beta0": beta0},
            )
        lo, hi = lo / 10.0, hi * 10.0
        g_lo, g_hi = g(lo), g(hi)
        expansions += 1

    beta, info = brentq(g, lo, hi, xtol=1e-15 * beta0, rtol=4 * np.finfo(float).eps,
                        maxiter=500, full_output=True, disp=False)
    residual = abs(g(beta)) / beta
    if not info.converged or residual >= MLE_RESIDUAL_TOL:
        raise FitConvergenceError(
            "Gumbel MLE did not converge",
            {"beta": beta, "relative_residual": residual, "iterations": info.iterations, "flag": info.flag},
        )
    w = _weights(centered, beta)
    shift = x.mean() + centered.min()
    mu = shift - beta * math.log(float(w.mean()))
    return GumbelParams(float(mu), float(beta))


def band_excess(sample, band) -> tuple[float, float]:
    """How far the ECDF escapes a band of increasing continuous curves.

    ``band(x)`` returns ``(lower, upper)``.  Returns ``(above, below)``: the
    largest amount the ECDF rises over ``upper`` and the largest amount
    ``lower`` rises over the ECDF.  Both are <= 0 when the ECDF stays inside.
    Since the ECDF is flat between jumps, checking the jump points (value
    against ``upper``, left limit against ``lower``) covers every x.
    """
    x = _sorted(sample)
    if x.size == 0:
        raise ValueError("empty sample")
    support, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / x.size
    left = right - counts / x.size
    lower, upper = band(support)
    return float(np.max(right - upper)), float(np.max(lower - left))
