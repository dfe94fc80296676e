"""relikit: reliability analytics with dynamic covariates and sequential
Bayesian accelerated-life-test planning."""

__version__ = "0.1.0"
