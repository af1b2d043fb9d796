"""Iterative solvers sharing one ``run(instance, cfg, ...) -> SolverTrace`` interface."""
from __future__ import annotations

from typing import Optional

from ..exceptions import InvalidArgumentError
from ..model import PriorSpec, ProblemInstance
from ..spectral import SpectralModel
from ._base import ALGORITHMS, DIVERGENCE_NMSE, W_CHOICES, SolverConfig, SolverTrace, Status
from .bayes import require_bayes_prior, run_bayes_amp
from .general import GeneralTrace, run_general_recursion
from .lasso import run_amp_lasso, run_fista, run_ista
from .memory import run_mamp
from .orthogonal import VampState, linear_stage_gains, run_oamp, run_vamp

__all__ = [
    "ALGORITHMS",
    "W_CHOICES",
    "DIVERGENCE_NMSE",
    "SolverConfig",
    "SolverTrace",
    "Status",
    "VampState",
    "GeneralTrace",
    "run_ista",
    "run_fista",
    "run_amp_lasso",
    "run_bayes_amp",
    "run_oamp",
    "run_vamp",
    "run_mamp",
    "run_general_recursion",
    "run_solver",
    "needs_prior",
    "linear_stage_gains",
    "require_bayes_prior",
]

_LASSO = {"ISTA": run_ista, "FISTA": run_fista, "AmpLasso": run_amp_lasso}
_BAYES = {"BayesAmp": run_bayes_amp, "OAMP": run_oamp, "VAMP": run_vamp}


def needs_prior(algorithm: str) -> bool:
    """Whether ``algorithm`` requires a prior with an MMSE denoiser."""
    return algorithm not in _LASSO


def run_solver(
    instance: ProblemInstance,
    cfg: SolverConfig,
    prior: Optional[PriorSpec] = None,
    spectral: Optional[SpectralModel] = None,
) -> SolverTrace:
    """Dispatch on ``cfg.algorithm``."""
    if cfg.algorithm in _LASSO:
        return _LASSO[cfg.algorithm](instance, cfg)
    if prior is None:
        raise InvalidArgumentError(f"{cfg.algorithm} needs a prior")
    if cfg.algorithm in _BAYES:
        return _BAYES[cfg.algorithm](instance, cfg, prior)
    return run_mamp(instance, cfg, prior, spectral)
