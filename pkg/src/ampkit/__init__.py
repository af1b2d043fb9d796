"""Approximate message passing solvers, state evolution and an experiment harness.

Modules
-------
model
    Priors, measurement matrices and problem instances.
denoise
    Scalar denoisers and the divergence-free wrapper.
solve
    ISTA, FISTA, AMP-LASSO, Bayes-optimal AMP, OAMP, VAMP and memory AMP.
se
    State-evolution predictors and the spectral model they share.
diag
    Gaussianity, orthogonality and equivalence diagnostics.
experiments, cli
    Config-driven experiment runs and the ``ampkit`` command.
"""
from . import denoise, diag, model, se, solve, spectral
from .exceptions import (
    ConfigError,
    DegenerateDenoiserError,
    DegenerateSampleError,
    InvalidArgumentError,
    UnsupportedPriorError,
)
from .model import (
    BernoulliGaussian,
    Conditioned,
    Discrete,
    IidGaussian,
    LaplaceLasso,
    ProblemInstance,
    qpsk_real,
    synthesize,
)
from .solve import SolverConfig, SolverTrace, Status, run_solver

__version__ = "0.1.0"

__all__ = [
    "denoise",
    "diag",
    "model",
    "se",
    "solve",
    "spectral",
    "BernoulliGaussian",
    "Conditioned",
    "Discrete",
    "IidGaussian",
    "LaplaceLasso",
    "ProblemInstance",
    "qpsk_real",
    "synthesize",
    "SolverConfig",
    "SolverTrace",
    "Status",
    "run_solver",
    "ConfigError",
    "DegenerateDenoiserError",
    "DegenerateSampleError",
    "InvalidArgumentError",
    "UnsupportedPriorError",
]
