"""Bayesian prediction by averaging over models, with the plug-in shortcut for comparison."""

from transduct.binomial import (
    BinomialParams,
    PriorSample,
    TailComparison,
    beta_binomial_log_pmf,
    beta_binomial_moments,
    beta_binomial_predictive,
    beta_posterior_log_density,
    binomial_log_pmf,
    binomial_moments,
    plug_in_predictive,
    sequential_predict,
    tail_and_overconfidence,
)
from transduct.distributions import MomentPair, PredictiveDistribution
from transduct.engine import (
    ModelSpace,
    abductive_predictive,
    binomial_grid_space,
    normal_grid_space,
    outlier_mixture_grid_space,
    posterior,
    posterior_predictive,
    predictive_moments,
    prior_predictive,
    tabulated_space,
)
from transduct.errors import (
    BoundaryPriorError,
    DomainError,
    ImpossibleDataError,
    ScenarioError,
    UndefinedOverconfidenceError,
)
from transduct.families import MixtureParams, NormalParams, mixture_outlier_log_likelihood
from transduct.numerics import ln_choose, ln_gamma, ln_gamma_ratio, log_sum_exp, stable_tail_sum

__version__ = "0.1.0"
