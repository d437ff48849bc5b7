"""Probability kernels: the Gumbel law plus the samplers used by the engines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EULER_GAMMA",
    "GumbelParams",
    "gumbel_cdf",
    "gumbel_pdf",
    "gumbel_quantile",
    "gumbel_mean",
    "gumbel_variance",
    "open_uniform",
    "sample_gumbel",
    "sample_exponential",
    "sample_poisson",
    "sample_geometric",
]

EULER_GAMMA = 0.5772156649015329

_TWO53 = float(2**53)


@dataclass(frozen=True)
class GumbelParams:
    """Location/scale pair of a (maximum) Gumbel law, F(x) = exp(-exp(-(x - mu)/beta))."""

    mu: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.beta)):
            raise ValueError(f"Gumbel parameters must be finite, got mu={self.mu}, beta={self.beta}")
        if self.beta <= 0:
            raise ValueError(f"Gumbel scale must be > 0, got beta={self.beta}")

    def mean(self) -> float:
        return gumbel_mean(self)

    def variance(self) -> float:
        return gumbel_variance(self)

    def affine(self, a: float, b: float) -> "GumbelParams":
        """Law of a*X + b for a > 0."""
        if a <= 0:
            raise ValueError("affine map must have a > 0")
        return GumbelParams(a * self.mu + b, a * self.beta)

    def to_dict(self) -> dict:
        return {"mu": self.mu, "beta": self.beta}


def _check_finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("gumbel_cdf argument must be finite")
    return x


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def gumbel_cdf(x, params: GumbelParams):
    x = _check_finite(x)
    z = (x - params.mu) / params.beta
    with np.errstate(over="ignore"):
        return _scalar_or_array(np.exp(-np.exp(-z)))


def gumbel_pdf(x, params: GumbelParams):
    x = _check_finite(x)
    z = (x - params.mu) / params.beta
    with np.errstate(over="ignore"):
        return _scalar_or_array(np.exp(-z - np.exp(-z)) / params.beta)


def gumbel_quantile(q, params: GumbelParams):
    """Inverse CDF, mu - beta * ln(-ln q), for q strictly inside (0, 1)."""
    q = np.asarray(q, dtype=float)
    if np.any(~np.isfinite(q)) or np.any((q <= 0.0) | (q >= 1.0)):
        raise ValueError("quantile level must lie in the open interval (0, 1)")
    return _scalar_or_array(params.mu - params.beta * np.log(-np.log(q)))


def gumbel_mean(params: GumbelParams) -> float:
    return params.mu + params.beta * EULER_GAMMA


def gumbel_variance(params: GumbelParams) -> float:
    return params.beta**2 * math.pi**2 / 6.0


def open_uniform(rng: np.random.Generator, size=None):
    """Uniform draws on the open interval (0, 1): 53-bit grid shifted by half a step."""
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return (k + 0.5) / _TWO53


def sample_gumbel(params: GumbelParams, rng: np.random.Generator, size=None):
    u = open_uniform(rng, size)
    return params.mu - params.beta * np.log(-np.log(u))


def sample_exponential(rate: float, rng: np.random.Generator, size=None):
    if not (rate > 0 and math.isfinite(rate)):
        raise ValueError(f"exponential rate must be a positive finite number, got {rate}")
    return rng.standard_exponential(size) / rate


def sample_poisson(mean: float, rng: np.random.Generator, size=None):
    # numpy: multiplication method below mean 10, PTRS transformed rejection above
    if not (mean >= 0 and math.isfinite(mean)):
        raise ValueError(f"Poisson mean must be finite and >= 0, got {mean}")
    return rng.poisson(mean, size)


def sample_geometric(success_prob: float, rng: np.random.Generator, size=None):
    """Number of Bernoulli trials up to and including the first success."""
    if not (0.0 < success_prob <= 1.0):
        raise ValueError(f"success probability must be in (0, 1], got {success_prob}")
    return rng.geometric(success_prob, size)
