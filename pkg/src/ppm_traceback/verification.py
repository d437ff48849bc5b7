"""One-shot verification harness behind ``ppm-traceback verify``.

Each check reproduces one of the headline claims at a configurable scale and
returns a ``CheckResult``.  ``full`` is the n = 10^4, M = 10^5 scale of the
published simulation; ``quick`` drops to n = 10^3, M = 10^4, replaces the
published sample means by exact finite-n values, and widens the statistical
tolerances (4 standard errors, 0.1 % significance).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .attack_model import PathParameters, build_distribution
from .distributions import GumbelParams, gumbel_cdf, gumbel_mean, gumbel_quantile, gumbel_variance, sample_gumbel
from .edge_sampling import simulate_packet_level, transmit_packets
from .simulators import simulate_continuous, simulate_discrete_coupled, simulate_discrete_naive, trial_rng
from .stats import (
    dkw_bound,
    fit_gumbel_mle,
    gumbel_from_moments,
    gumbel_mle_residual,
    ks_distance,
    ks_two_sample,
    summarize,
    band_excess,
    two_sample_threshold,
)
from .theory import (
    band_half_width,
    cdf_band,
    coupling_bounds,
    exact_continuous_cdf,
    exact_expected_time,
    expected_time_quadrature,
    limit_law,
)

__all__ = ["Scale", "FULL", "QUICK", "CheckResult", "run_checks", "format_table"]

# published sample means (discrete, continuous) at n = 10^4, lambda = 1, M = 10^5
REFERENCE_DISCRETE_MEAN = 207945.0
REFERENCE_CONTINUOUS_MEAN = 207885.0
MOMENTS_FIT_MEAN = 207945.0
MOMENTS_FIT_BETA = 24506.0
MOMENTS_FIT_MU = 193800.0


@dataclass(frozen=True)
class Scale:
    name: str
    n: int
    M: int
    equivalence_M: int
    packet_M: int
    packets: int
    exact_n: int
    exact_M: int
    draws: int
    k_se: float
    alpha: float


FULL = Scale("full", 10_000, 100_000, 100_000, 10_000, 1_000_000, 10, 1_000_000, 1_000_000, 3.0, 0.01)
QUICK = Scale("quick", 1_000, 10_000, 10_000, 2_000, 100_000, 10, 100_000, 200_000, 4.0, 0.001)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion}. {self.name}: {self.detail}"


class _Runs:
    """Lazily computed large samples shared between checks."""

    def __init__(self, scale: Scale, seed: int, workers):
        self.scale, self.seed, self.workers = scale, seed, workers
        self.dist = build_distribution(PathParameters(scale.n, 1.0))
        self._cache = {}

    def _get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def continuous(self):
        return self._get("c", lambda: simulate_continuous(self.dist, self.scale.M, self.seed, self.workers))

    @property
    def coupled(self):
        return self._get("d", lambda: simulate_discrete_coupled(self.dist, self.scale.M, self.seed + 1, self.workers))

    @property
    def expected_time(self):
        return self._get("et", lambda: expected_time_quadrature(self.dist))


def check_expected_time(runs: _Runs) -> CheckResult:
    s = runs.scale
    theory = limit_law(s.n, 1.0)
    rows, ok = [], True
    if s.name == "full":
        targets = {"continuous": REFERENCE_CONTINUOUS_MEAN, "discrete-coupled": REFERENCE_DISCRETE_MEAN}
    else:
        targets = {"continuous": runs.expected_time, "discrete-coupled": runs.expected_time}
    for label, sample in (("continuous", runs.continuous), ("discrete-coupled", runs.coupled)):
        summ = summarize(sample)
        near_target = abs(summ.mean - targets[label]) <= s.k_se * summ.std_error
        near_theory = abs(summ.mean - theory.main_term) <= theory.error_scale
        ok &= near_target and near_theory
        rows.append(f"{label} mean={summ.mean:.0f} (target {targets[label]:.0f} +- {s.k_se:g}*{summ.std_error:.0f}, "
                    f"|mean-{theory.main_term:.0f}|={abs(summ.mean - theory.main_term):.0f} <= {theory.error_scale:.0f})")
    return CheckResult(1, "expected reconstruction time", ok, "; ".join(rows))


def check_mean_equality(runs: _Runs) -> CheckResult:
    s = runs.scale
    a, b = summarize(runs.coupled), summarize(runs.continuous)
    gap = abs(a.mean - b.mean)
    tol = s.k_se * math.sqrt(a.variance / a.M + b.variance / b.M)
    ok = gap <= tol
    rows = [f"n={s.n}: |D-T| means gap {gap:.1f} <= {tol:.1f}"]
    dist = build_distribution(PathParameters(s.exact_n, 1.0))
    exact = exact_expected_time(dist)
    for label, sim in (("continuous", simulate_continuous), ("discrete-coupled", simulate_discrete_coupled)):
        summ = summarize(sim(dist, s.exact_M, runs.seed + 7, runs.workers))
        close = abs(summ.mean - exact) <= s.k_se * summ.std_error
        ok &= close
        rows.append(f"n={s.exact_n} {label} {summ.mean:.4f} vs exact {exact:.4f} (tol {s.k_se * summ.std_error:.4f})")
    return CheckResult(2, "E(D) = E(T)", ok, "; ".join(rows))


def check_limit_band(runs: _Runs) -> CheckResult:
    s = runs.scale
    theory = limit_law(s.n, 1.0)
    normalized = theory.normalize(runs.coupled.values)
    half = band_half_width(s.n)
    ks = ks_distance(normalized, lambda x: gumbel_cdf(x, theory.limit_law))
    above, below = band_excess(runs.coupled.values, lambda x: cdf_band(x, s.n))
    ok = ks <= half and above <= 0 and below <= 0
    detail = (f"KS(D', Gumbel(0,e))={ks:.4f} <= {half:.4f}; ECDF above upper band by {max(above, 0):.4f}, "
              f"below lower band by {max(below, 0):.4f}")
    return CheckResult(3, "limit law band", ok, detail, values={"ks": ks, "above": above, "below": below})


def check_exact_cdf(runs: _Runs) -> CheckResult:
    s = runs.scale
    summ = summarize(runs.continuous)
    ks = ks_distance(summ, lambda x: exact_continuous_cdf(x, runs.dist))
    bound = dkw_bound(s.M, s.alpha)
    return CheckResult(4, "exact finite-n CDF", ks <= bound, f"KS={ks:.5f} <= DKW {bound:.5f}")


def check_engine_equivalence(runs: _Runs) -> CheckResult:
    s = runs.scale
    ok, rows = True, []
    for n, lam in ((2, 1.0), (3, 1.0), (8, 0.5)):
        dist = build_distribution(PathParameters(n, lam))
        a = simulate_discrete_naive(dist, s.equivalence_M, runs.seed + 11, runs.workers)
        b = simulate_discrete_coupled(dist, s.equivalence_M, runs.seed + 13, runs.workers)
        ks, thr = ks_two_sample(a, b), two_sample_threshold(a.M, b.M, s.alpha)
        ok &= ks <= thr
        rows.append(f"naive~coupled n={n} lambda={lam:g}: {ks:.4f} <= {thr:.4f}")
    params = PathParameters(8, 1.0)
    a = simulate_packet_level(params, s.packet_M, runs.seed + 17, runs.workers)
    b = simulate_discrete_naive(build_distribution(params), s.packet_M, runs.seed + 19, runs.workers)
    ks, thr = ks_two_sample(a, b), two_sample_threshold(a.M, b.M, s.alpha)
    ok &= ks <= thr
    rows.append(f"packet~naive n=8: {ks:.4f} <= {thr:.4f}")
    return CheckResult(5, "engine equivalence", ok, "; ".join(rows))


def check_marking_law(runs: _Runs) -> CheckResult:
    s = runs.scale
    params = PathParameters(16, 1.0)
    marked, _, _, distance = transmit_packets(params, trial_rng(runs.seed + 23, 0), s.packets)
    observed = np.bincount(np.where(marked, distance + 1, 0), minlength=17)
    expected = build_distribution(params).probabilities * s.packets
    stat = float(np.sum((observed - expected) ** 2 / expected))
    crit = float(chi2.ppf(1 - s.alpha, 16))
    return CheckResult(6, "protocol marking law", stat <= crit, f"chi2={stat:.2f} <= {crit:.2f} (16 dof)")


def check_coupling(runs: _Runs) -> CheckResult:
    s = runs.scale
    theory = limit_law(s.n, 1.0)
    summ = summarize(runs.coupled)
    ok, rows = True, []
    for k in (-2, -1, 0, 1, 2):
        d = theory.main_term + k * s.n
        lo, hi = coupling_bounds(d, runs.dist)
        f = summ.ecdf(d)
        ok &= lo <= f <= hi
        rows.append(f"d=main{k:+d}n: {lo:.3f}<={f:.3f}<={hi:.3f}")
    return CheckResult(7, "coupling bounds", ok, "; ".join(rows))


def check_estimators(runs: _Runs) -> CheckResult:
    s = runs.scale
    variance = (MOMENTS_FIT_BETA * math.pi / math.sqrt(6.0)) ** 2
    mom = gumbel_from_moments(MOMENTS_FIT_MEAN, variance)
    mom_ok = (abs(mom.mu - MOMENTS_FIT_MU) <= 0.5e-4 * MOMENTS_FIT_MU
              and abs(mom.beta - MOMENTS_FIT_BETA) <= 0.5e-4 * MOMENTS_FIT_BETA)
    truth = GumbelParams(0.0, math.e)
    x = sample_gumbel(truth, trial_rng(runs.seed + 29, 0), s.draws)
    mle = fit_gumbel_mle(x)
    mle_ok = abs(mle.mu - truth.mu) <= 0.01 * truth.beta and abs(mle.beta / truth.beta - 1) <= 0.01
    residuals = [abs(gumbel_mle_residual(x, mle.beta)) / mle.beta]
    for sample in (runs.coupled, runs.continuous):
        fit = fit_gumbel_mle(sample)
        residuals.append(abs(gumbel_mle_residual(sample.values, fit.beta)) / fit.beta)
    res_ok = max(residuals) < 1e-8
    detail = (f"moments -> ({mom.mu:.1f}, {mom.beta:.1f}); MLE on Gumbel(0,e) -> ({mle.mu:.4f}, {mle.beta:.4f}); "
              f"max MLE residual {max(residuals):.1e}")
    return CheckResult(8, "Gumbel estimators", mom_ok and mle_ok and res_ok, detail)


def check_kernels(runs: _Runs) -> CheckResult:
    s = runs.scale
    ok, rows = True, []
    rng = trial_rng(runs.seed + 31, 0)
    for params in (GumbelParams(0.0, math.e), GumbelParams(190008.0, 27183.0)):
        x = sample_gumbel(params, rng, s.draws)
        m_err = abs(x.mean() / gumbel_mean(params) - 1)
        v_err = abs(x.var(ddof=1) / gumbel_variance(params) - 1)
        ok &= m_err <= 0.01 and v_err <= 0.01
        rows.append(f"Gumbel({params.mu:g},{params.beta:g}) mean err {m_err:.2%}, var err {v_err:.2%}")
    q = np.concatenate([np.logspace(-6, -1, 200), np.linspace(0.1, 0.9, 200), 1 - np.logspace(-6, -1, 200)])
    law = GumbelParams(0.0, math.e)
    rt = float(np.max(np.abs(gumbel_cdf(gumbel_quantile(q, law), law) - q)))
    ok &= rt < 1e-10
    rows.append(f"quantile round trip {rt:.1e}")
    return CheckResult(9, "distribution kernels", ok, "; ".join(rows))


CHECKS = (
    check_expected_time,
    check_mean_equality,
    check_limit_band,
    check_exact_cdf,
    check_engine_equivalence,
    check_marking_law,
    check_coupling,
    check_estimators,
    check_kernels,
)


def run_checks(scale: Scale = FULL, seed: int = 20240101, workers=1, echo=None) -> list[CheckResult]:
    runs = _Runs(scale, seed, workers)
    results = []
    for check in CHECKS:
        started = time.perf_counter()
        result = check(runs)
        result.seconds = time.perf_counter() - started
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'#':>2}  {'check':<{width}}  result  seconds"]
    for r in results:
        lines.append(f"{r.criterion:>2}  {r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:7.1f}")
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)
