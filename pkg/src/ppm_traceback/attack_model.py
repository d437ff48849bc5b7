"""Attack-path parameters and the coupon probabilities they induce.

A single attacker sits ``n`` hops from the victim and every router on the path
marks a forwarded packet with probability ``p = lambda / n``.  Coupon type ``i``
(1 <= i <= n) is a packet whose surviving mark was written by the router at
distance ``i``, i.e. a mark whose distance counter reads ``i - 1``.  Index 0 is
the dummy coupon: a packet that reaches the victim unmarked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PathParameters",
    "CouponDistribution",
    "build_distribution",
    "cost_coefficient",
    "optimal_lambda",
]


@dataclass(frozen=True)
class PathParameters:
    n: int
    lam: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"path length n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        lam = float(self.lam)
        if not (math.isfinite(lam) and lam > 0):
            raise ValueError(f"lambda must be a positive finite number, got {self.lam!r}")
        if lam > self.n:
            raise ValueError(f"lambda={lam} exceeds n={self.n}: marking probability would exceed 1")
        object.__setattr__(self, "lam", lam)

    @property
    def p(self) -> float:
        """Per-router marking probability."""
        return self.lam / self.n


@dataclass(frozen=True)
class CouponDistribution:
    """Probabilities of coupon types 0..n (0 is the dummy / unmarked packet)."""

    params: PathParameters
    probabilities: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.shape != (self.params.n + 1,):
            raise ValueError("probability vector must have length n + 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def rates(self) -> np.ndarray:
        """Probabilities of the real coupon types 1..n."""
        return self.probabilities[1:]

    @property
    def dummy(self) -> float:
        return float(self.probabilities[0])


def build_distribution(params: PathParameters) -> CouponDistribution:
    n, p = params.n, params.p
    # exponents taken from log1p(-p): a running product of the rounded 1 - p
    # drifts by ~n ulps, enough to break normalization at n ~ 1e6
    log_q = math.log1p(-p) if p < 1.0 else -math.inf
    probs = np.empty(n + 1)
    with np.errstate(invalid="ignore"):
        probs[1:] = p * np.exp(np.arange(n) * log_q)
    probs[1] = p
    probs[0] = math.exp(n * log_q)
    return CouponDistribution(params, probs)


def cost_coefficient(lam: float) -> float:
    """Leading factor e^lambda / lambda of the expected reconstruction time."""
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    return math.exp(lam) / lam


def optimal_lambda() -> float:
    # d/dlam e^lam/lam = e^lam (lam - 1) / lam^2 vanishes only at lam = 1
    return 1.0
