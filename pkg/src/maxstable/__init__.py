"""Semiparametric Bayesian inference for multivariate max-stable distributions.

Angular measures are Bernstein-polynomial mixtures on the unit simplex;
the package provides exact densities and simulation for the induced
max-stable laws, shape-constrained priors with empirical-Bayes margin
estimates, a trans-dimensional posterior sampler, Monte Carlo distance
metrics, and a consistency-experiment harness.  A command line front end
lives in maxstable.cli (console script: maxstable).
"""

__version__ = "0.1.0"

from .angular import (
    AngularBP,
    AngularHist2,
    PickandsBP2,
    PickandsBS2,
    angular_density,
    angular_mean,
    bp_pickands_to_weights2,
    bs_to_pickands2,
    complete_vertex_masses,
    degree_elevate,
    independence_model,
    pickands,
    pickands_bs_to_hist2,
    uniform_model,
    validate_bp,
    weights_to_pickands2,
)
from .core import (
    MarginSpec,
    ModelSpec,
    Partition,
    exponent_V,
    log_density,
    log_density_simple,
    log_likelihood,
    neg_V_I,
    partition_probability,
)
from .errors import (
    CapabilityError,
    ConfigError,
    ConstraintError,
    CorruptArtifactError,
    DomainError,
    InfeasibleWeightsError,
    MaxStableError,
    StructuralError,
    SupportError,
)
from .inference import (
    Chain,
    SamplerConfig,
    posterior_mean_model,
    posterior_summary,
    run_mcmc,
)
from .metrics import (
    ExperimentConfig,
    MCDistance,
    MetricReport,
    angular_cdf2,
    hellinger_mc,
    kl_mc,
    ks_angular2,
    l1_angular,
    run_experiment,
)
from .priors import (
    DegreePrior,
    EBEstimates,
    PriorConfig,
    compute_eb,
    degree_sample,
    weights_sample,
)
from .simulate import (
    SeededRng,
    block_maxima,
    example_attractor,
    example_norming,
    gen_example,
    sample_maxstable,
    sample_simple_maxstable,
)

__all__ = [
    "__version__",
    # angular measures
    "AngularBP", "AngularHist2", "PickandsBP2", "PickandsBS2",
    "angular_density", "angular_mean", "bp_pickands_to_weights2",
    "bs_to_pickands2", "complete_vertex_masses", "degree_elevate",
    "independence_model", "pickands", "pickands_bs_to_hist2",
    "uniform_model", "validate_bp", "weights_to_pickands2",
    # densities and likelihood
    "MarginSpec", "ModelSpec", "Partition", "exponent_V", "log_density",
    "log_density_simple", "log_likelihood", "neg_V_I",
    "partition_probability",
    # errors
    "CapabilityError", "ConfigError", "ConstraintError",
    "CorruptArtifactError", "DomainError", "InfeasibleWeightsError",
    "MaxStableError", "StructuralError", "SupportError",
    # posterior sampling
    "Chain", "SamplerConfig", "posterior_mean_model", "posterior_summary",
    "run_mcmc",
    # metrics and experiments
    "ExperimentConfig", "MCDistance", "MetricReport", "angular_cdf2",
    "hellinger_mc", "kl_mc", "ks_angular2", "l1_angular", "run_experiment",
    # priors
    "DegreePrior", "EBEstimates", "PriorConfig", "compute_eb",
    "degree_sample", "weights_sample",
    # simulation
    "SeededRng", "block_maxima", "example_attractor", "example_norming",
    "gen_example", "sample_maxstable", "sample_simple_maxstable",
]
