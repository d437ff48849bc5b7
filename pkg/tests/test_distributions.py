import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppm_traceback.distributions import (
    EULER_GAMMA,
    GumbelParams,
    gumbel_cdf,
    gumbel_mean,
    gumbel_pdf,
    gumbel_quantile,
    gumbel_variance,
    open_uniform,
    sample_exponential,
    sample_geometric,
    sample_gumbel,
    sample_poisson,
)
from ppm_traceback.stats import dkw_bound, ks_two_sample


def bisect_inverse(f, q, lo, hi, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_euler_gamma():
    assert EULER_GAMMA == pytest.approx(0.57721566490153286, abs=1e-15)


class TestGumbelParams:
    def test_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            GumbelParams(0.0, 0.0)
        with pytest.raises(ValueError):
            GumbelParams(0.0, -1.0)
        with pytest.raises(ValueError):
            GumbelParams(float("nan"), 1.0)

    def test_moments(self):
        p = GumbelParams(2.0, 3.0)
        assert p.mean() == pytest.approx(2.0 + 3.0 * EULER_GAMMA)
        assert p.variance() == pytest.approx(9.0 * math.pi**2 / 6.0)


class TestGumbelCdf:
    def test_at_location(self):
        for beta in (0.1, 1.0, 27183.0):
            assert gumbel_cdf(5.0, GumbelParams(5.0, beta)) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_median(self):
        p = GumbelParams(1.5, 2.0)
        assert gumbel_cdf(p.mu - p.beta * math.log(math.log(2.0)), p) == pytest.approx(0.5, rel=1e-14)

    def test_limits(self):
        p = GumbelParams(0.0, 1.0)
        assert gumbel_cdf(1e6, p) == 1.0
        assert gumbel_cdf(-1e6, p) == 0.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            gumbel_cdf(float("inf"), GumbelParams(0.0, 1.0))
        with pytest.raises(ValueError):
            gumbel_cdf(float("nan"), GumbelParams(0.0, 1.0))

    def test_monotone_in_x_and_mu(self):
        x = np.linspace(-10, 30, 1001)
        f = gumbel_cdf(x, GumbelParams(0.0, math.e))
        assert np.all(np.diff(f) >= 0)
        mus = np.linspace(-5, 5, 21)
        vals = [gumbel_cdf(1.0, GumbelParams(m, 2.0)) for m in mus]
        assert np.all(np.diff(vals) < 0)

    def test_pdf_integrates_to_cdf_increment(self):
        from scipy.integrate import quad

        p = GumbelParams(1.0, 2.5)
        area = quad(lambda v: gumbel_pdf(v, p), -3.0, 7.0)[0]
        assert area == pytest.approx(gumbel_cdf(7.0, p) - gumbel_cdf(-3.0, p), rel=1e-10)


class TestGumbelQuantile:
    def test_inverse_of_location(self):
        assert gumbel_quantile(math.exp(-1.0), GumbelParams(0.0, 1.0)) == pytest.approx(0.0, abs=1e-15)

    def test_median(self):
        assert gumbel_quantile(0.5, GumbelParams(0.0, 1.0)) == pytest.approx(0.366512920581664, rel=1e-12)

    def test_against_bisection(self):
        p = GumbelParams(0.0, math.e)
        oracle = bisect_inverse(lambda x: gumbel_cdf(x, p), 0.9, -50.0, 100.0)
        assert oracle == pytest.approx(6.1172, abs=5e-4)
        assert gumbel_quantile(0.9, p) == pytest.approx(oracle, rel=1e-12)

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, q):
        with pytest.raises(ValueError):
            gumbel_quantile(q, GumbelParams(0.0, 1.0))

    def test_round_trip_grid(self):
        q = np.concatenate([np.logspace(-6, -1, 500), np.linspace(0.1, 0.9, 500), 1 - np.logspace(-6, -1, 500)])
        p = GumbelParams(190008.0, 27183.0)
        assert np.max(np.abs(gumbel_cdf(gumbel_quantile(q, p), p) - q)) < 1e-10

    @given(
        q=st.floats(1e-6, 1 - 1e-6),
        loc_in_scales=st.floats(-1e3, 1e3),
        beta=st.floats(1e-3, 1e5),
    )
    def test_round_trip_property(self, q, loc_in_scales, beta):
        # |mu|/beta bounded: beyond ~1e5 the absolute spacing of x alone exceeds 1e-10 in z
        p = GumbelParams(loc_in_scales * beta, beta)
        assert abs(gumbel_cdf(gumbel_quantile(q, p), p) - q) < 1e-10


class TestMoments:
    def test_standard(self):
        assert gumbel_mean(GumbelParams(0.0, 1.0)) == pytest.approx(0.577216, abs=1e-6)

    def test_raw_limit_law_mean(self):
        # Gumbel(190008, 27183) has mean close to the asymptotic main term 205699
        assert gumbel_mean(GumbelParams(190008.0, 27183.0)) == pytest.approx(205699.0, abs=1.0)

    def test_variance_against_samples(self):
        p = GumbelParams(0.0, math.e)
        x = sample_gumbel(p, np.random.default_rng(7), 10**7)
        assert gumbel_variance(p) == pytest.approx(12.1545, abs=1e-4)
        assert x.var() == pytest.approx(gumbel_variance(p), rel=0.01)


class TestSamplers:
    def test_open_uniform_excludes_endpoints(self, rng):
        u = open_uniform(rng, 10**6)
        assert u.min() > 0.0 and u.max() < 1.0

    def test_exponential_mean(self, rng):
        assert sample_exponential(1.0, rng, 10**6).mean() == pytest.approx(1.0, abs=0.01)
        assert sample_exponential(4.0, rng, 10**6).mean() == pytest.approx(0.25, abs=0.0025)

    def test_gumbel_mean(self, rng):
        assert sample_gumbel(GumbelParams(0.0, 1.0), rng, 10**6).mean() == pytest.approx(EULER_GAMMA, abs=0.01)

    @pytest.mark.parametrize("mean", [0.5, 7.0, 29.0, 31.0, 500.0])
    def test_poisson_variance(self, rng, mean):
        x = sample_poisson(mean, rng, 10**6)
        assert x.var() == pytest.approx(mean, rel=0.03)
        assert x.mean() == pytest.approx(mean, rel=0.01)

    def test_poisson_zero_mean(self, rng):
        assert np.all(sample_poisson(0.0, rng, 100) == 0)

    def test_geometric(self, rng):
        x = sample_geometric(0.25, rng, 10**6)
        assert x.min() >= 1
        assert x.mean() == pytest.approx(4.0, rel=0.01)
        assert np.all(sample_geometric(1.0, rng, 10) == 1)

    @pytest.mark.parametrize(
        "call",
        [
            lambda r: sample_exponential(0.0, r),
            lambda r: sample_exponential(-1.0, r),
            lambda r: sample_poisson(-1.0, r),
            lambda r: sample_geometric(0.0, r),
            lambda r: sample_geometric(1.5, r),
        ],
    )
    def test_invalid_parameters(self, rng, call):
        with pytest.raises(ValueError):
            call(rng)

    def test_deterministic_given_state(self):
        a = sample_gumbel(GumbelParams(0, 1), np.random.default_rng(3), 100)
        b = sample_gumbel(GumbelParams(0, 1), np.random.default_rng(3), 100)
        assert np.array_equal(a, b)

    def test_affine_closure(self):
        m = 10**5
        base = GumbelParams(1.0, 2.0)
        a, b = 3.0, -4.0
        transformed = a * sample_gumbel(base, np.random.default_rng(1), m) + b
        direct = sample_gumbel(base.affine(a, b), np.random.default_rng(2), m)
        # two independent samples of the same law; DKW radius for each side
        assert ks_two_sample(transformed, direct) < 2 * dkw_bound(m, 0.01)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_poisson_thinning_first_arrivals(seed):
    """First arrivals of each type in a marked unit-rate stream are Exp(p_i)."""
    from scipy.stats import chi2

    rng = np.random.default_rng(seed)
    probs = np.array([0.5, 0.3, 0.2])
    trials, events = 4000, 80
    times = np.cumsum(rng.standard_exponential((trials, events)), axis=1)
    types = rng.choice(3, size=(trials, events), p=probs)
    stat_total, dof = 0.0, 0
    for i, p in enumerate(probs):
        hit = types == i
        first = np.where(hit.any(axis=1), times[np.arange(trials), hit.argmax(axis=1)], np.inf)
        # 8 equiprobable bins of Exp(p)
        edges = -np.log(1 - np.linspace(0, 1, 9)[1:-1]) / p
        counts = np.bincount(np.searchsorted(edges, first), minlength=8)
        expected = trials / 8
        stat_total += np.sum((counts - expected) ** 2 / expected)
        dof += 7
    assert stat_total < chi2.ppf(0.999, dof)
