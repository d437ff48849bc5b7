"""Reconstruction time of an attack path under probabilistic edge-sampling marking.

The victim of a single-source flood collects edge marks until every link of
the n-hop attack path has been seen.  With marking probability p = lambda / n
this is a coupon collector with geometric coupon probabilities; the package
simulates it three ways, evaluates the exact and limiting laws, and fits
Gumbel distributions to the results.
"""
from .attack_model import CouponDistribution, PathParameters, build_distribution, cost_coefficient, optimal_lambda
from .distributions import (
    EULER_GAMMA,
    GumbelParams,
    gumbel_cdf,
    gumbel_mean,
    gumbel_pdf,
    gumbel_quantile,
    gumbel_variance,
    sample_exponential,
    sample_geometric,
    sample_gumbel,
    sample_poisson,
)
from .edge_sampling import PacketMark, ReconstructionState, run_reconstruction, simulate_packet_level, transmit_packet
from .simulators import (
    TrialSample,
    simulate,
    simulate_continuous,
    simulate_discrete_coupled,
    simulate_discrete_naive,
)
from .stats import (
    SampleSummary,
    fit_gumbel_mle,
    fit_gumbel_moments,
    ks_distance,
    ks_two_sample,
    summarize,
)
from .theory import (
    TheoryPrediction,
    cdf_band,
    coupling_bounds,
    exact_continuous_cdf,
    exact_expected_time,
    expected_time_asymptotic,
    expected_time_quadrature,
    limit_law,
)

__version__ = "0.1.0"
