"""Monte Carlo engines for the reconstruction time.

Three engines sample the completion statistic for a ``CouponDistribution``:

* ``simulate_discrete_naive`` draws coupons one at a time (alias table) until
  every real type has appeared and records the number of draws ``D``.
* ``simulate_continuous`` returns ``T = max_i Exp(p_i)`` over the real types.
* ``simulate_discrete_coupled`` samples ``D`` exactly in O(n) per trial by
  embedding the draws in a unit-rate Poisson stream: type ``i`` first arrives
  at ``A_i ~ Exp(p_i)``, the stream completes at ``T = max_{i>=1} A_i``, and
  every type seen by then contributes one first arrival plus
  ``Poisson(p_i (T - A_i))`` repeats.

Every trial draws from its own generator keyed by ``(seed, trial_index)``, so
results do not depend on how trials are split across workers.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .alias import AliasTable
from .attack_model import CouponDistribution

__all__ = [
    "MODELS",
    "DISCRETE_MODELS",
    "TrialSample",
    "trial_rng",
    "run_trials",
    "resolve_workers",
    "simulate_discrete_naive",
    "simulate_continuous",
    "simulate_discrete_coupled",
    "simulate",
]

MODELS = ("discrete-naive", "continuous", "discrete-coupled", "packet-level")
DISCRETE_MODELS = ("discrete-naive", "discrete-coupled", "packet-level")


@dataclass
class TrialSample:
    model: str
    n: int
    lam: float
    values: np.ndarray = field(repr=False)
    seed: int

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        self.values = np.asarray(self.values)

    @property
    def M(self) -> int:
        return int(self.values.size)

    @property
    def is_discrete(self) -> bool:
        return self.model in DISCRETE_MODELS


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial; depends only on the seed and trial index."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def resolve_workers(workers) -> int:
    if workers is None or workers == "auto":
        return os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    return workers


def _run_chunk(kernel, context, seed, start, stop, dtype):
    out = np.empty(stop - start, dtype=dtype)
    for j, trial in enumerate(range(start, stop)):
        out[j] = kernel(context, trial_rng(seed, trial))
    return out


def run_trials(kernel, context, M: int, seed: int, workers=1, dtype=np.int64) -> np.ndarray:
    """Evaluate ``kernel(context, rng)`` for trials ``0..M-1``, ordered by trial index."""
    if M < 1:
        raise ValueError("number of trials M must be >= 1")
    workers = resolve_workers(workers)
    if workers == 1 or M < 2 * workers:
        return _run_chunk(kernel, context, seed, 0, M, dtype)
    n_chunks = min(M, 4 * workers)
    bounds = np.linspace(0, M, n_chunks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_chunk, kernel, context, seed, int(a), int(b), dtype)
            for a, b in zip(bounds[:-1], bounds[1:])
        ]
        return np.concatenate([f.result() for f in futures])


def _require_positive_rates(dist: CouponDistribution):
    if not np.all(dist.rates > 0):
        raise ValueError("some real coupon type has probability 0; collection never completes")


def _draw_chunk_size(dist: CouponDistribution) -> int:
    # roughly the expected completion count, so a single chunk usually suffices
    guess = (math.log(dist.n) + 1.0) / dist.rates.min()
    return int(min(max(guess, 16), 1 << 22))


@dataclass
class _NaiveContext:
    table: AliasTable
    n: int
    chunk: int


def collect_until_complete(draw_batch, n: int, rng) -> int:
    """Count draws until every type in 1..n has appeared.

    ``draw_batch(rng)`` returns the next batch of coupon indices (0 = dummy).
    """
    seen = np.zeros(n + 1, dtype=bool)
    seen[0] = True
    missing = n
    offset = 0
    while True:
        batch = draw_batch(rng)
        types, first = np.unique(batch, return_index=True)
        fresh = ~seen[types]
        if fresh.any():
            new_types = types[fresh]
            seen[new_types] = True
            missing -= new_types.size
            if missing == 0:
                return offset + int(first[fresh].max()) + 1
        offset += batch.size


def _naive_trial(ctx: _NaiveContext, rng) -> int:
    return collect_until_complete(lambda g: ctx.table.sample(g, ctx.chunk), ctx.n, rng)


@dataclass
class _RaceContext:
    rates: np.ndarray
    inv_rates: np.ndarray
    dummy: float


def _continuous_trial(ctx: _RaceContext, rng) -> float:
    return float((rng.standard_exponential(ctx.rates.size) * ctx.inv_rates).max())


def _coupled_trial(ctx: _RaceContext, rng) -> int:
    e = rng.standard_exponential(ctx.rates.size + 1)
    arrivals = e[1:] * ctx.inv_rates
    t_done = arrivals.max()
    count = ctx.rates.size
    # repeats of all types superpose into a single Poisson count
    repeat_mean = float(np.dot(ctx.rates, t_done - arrivals))
    if ctx.dummy > 0:
        a0 = e[0] / ctx.dummy
        if a0 <= t_done:
            count += 1
            repeat_mean += ctx.dummy * (t_done - a0)
    return count + int(rng.poisson(max(repeat_mean, 0.0)))


def _race_context(dist: CouponDistribution) -> _RaceContext:
    _require_positive_rates(dist)
    rates = np.array(dist.rates)
    return _RaceContext(rates, 1.0 / rates, dist.dummy)


def simulate_discrete_naive(dist: CouponDistribution, M: int, seed: int = 0, workers=1) -> TrialSample:
    _require_positive_rates(dist)
    ctx = _NaiveContext(AliasTable(dist.probabilities), dist.n, _draw_chunk_size(dist))
    values = run_trials(_naive_trial, ctx, M, seed, workers, np.int64)
    return TrialSample("discrete-naive", dist.n, dist.params.lam, values, seed)


def simulate_continuous(dist: CouponDistribution, M: int, seed: int = 0, workers=1) -> TrialSample:
    values = run_trials(_continuous_trial, _race_context(dist), M, seed, workers, np.float64)
    return TrialSample("continuous", dist.n, dist.params.lam, values, seed)


def simulate_discrete_coupled(dist: CouponDistribution, M: int, seed: int = 0, workers=1) -> TrialSample:
    values = run_trials(_coupled_trial, _race_context(dist), M, seed, workers, np.int64)
    return TrialSample("discrete-coupled", dist.n, dist.params.lam, values, seed)


def simulate(model: str, dist: CouponDistribution, M: int, seed: int = 0, workers=1, **kwargs) -> TrialSample:
    """Dispatch on the model name used by the experiment runner."""
    if model == "discrete-naive":
        return simulate_discrete_naive(dist, M, seed, workers)
    if model == "continuous":
        return simulate_continuous(dist, M, seed, workers)
    if model == "discrete-coupled":
        return simulate_discrete_coupled(dist, M, seed, workers)
    if model == "packet-level":
        from .edge_sampling import simulate_packet_level

        return simulate_packet_level(dist.params, M, seed, workers, **kwargs)
    raise ValueError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
