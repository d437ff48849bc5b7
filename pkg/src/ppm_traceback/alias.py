"""Walker/Vose alias table for O(1) categorical sampling."""
from __future__ import annotations

import numpy as np

__all__ = ["AliasTable"]


class AliasTable:
    """Alias table over outcomes ``0..K-1``.

    Built once in O(K) with Vose's small/large worklists; each draw then costs
    one uniform column pick and one biased coin.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        k = w.size
        scaled = w * (k / total)
        prob = np.ones(k)
        alias = np.arange(k, dtype=np.int64)

        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            prob[s] = scaled[s]
            alias[s] = g
            scaled[g] -= 1.0 - scaled[s]
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # leftovers are 1 up to rounding
        for i in small + large:
            prob[i] = 1.0
            alias[i] = i

        self.prob = prob
        self.alias = alias
        self.size = k

    def implied_probabilities(self) -> np.ndarray:
        """Outcome probabilities the table actually realizes."""
        out = self.prob / self.size
        np.add.at(out, self.alias, (1.0 - self.prob) / self.size)
        return out

    def sample(self, rng: np.random.Generator, size=None):
        col = rng.integers(0, self.size, size=size)
        coin = rng.random(size=size)
        return np.where(coin < self.prob[col], col, self.alias[col])
