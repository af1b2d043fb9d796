"""Bayes-optimal AMP with per-component variances."""
from __future__ import annotations

import numpy as np

from ..denoise import VAR_FLOOR, mmse_denoise
from ..exceptions import UnsupportedPriorError
from ..model import BernoulliGaussian, Discrete, PriorSpec, ProblemInstance
from ._base import SolverConfig, SolverTrace, _Recorder, check_instance

__all__ = ["run_bayes_amp", "require_bayes_prior"]


def require_bayes_prior(prior: PriorSpec):
    if not isinstance(prior, (BernoulliGaussian, Discrete)):
        raise UnsupportedPriorError(f"{type(prior).__name__} has no MMSE denoiser")


def run_bayes_amp(instance: ProblemInstance, cfg: SolverConfig, prior: PriorSpec) -> SolverTrace:
    """Bayes-optimal AMP.

    Per iteration::

        V = (H*H) v
        Z = H x - V (y - Z_prev) / (sigma_w2 + V_prev)
        Sigma = 1 / ((H*H)^T (1 / (sigma_w2 + V)))
        r = x + Sigma * H^T ((y - Z) / (sigma_w2 + V))
        x, v = posterior mean and variance at (r, Sigma)

    Starts from ``x = 0``, ``v`` equal to the prior second moment and
    ``Z_prev = y``. ``tau2`` records the average of ``Sigma``.
    """
    check_instance(instance)
    require_bayes_prior(prior)
    H, y, s2 = instance.H, instance.y, instance.sigma_w2
    H2 = H * H
    rec = _Recorder(instance, cfg)
    x_hat = np.zeros(instance.n)
    v = np.full(instance.n, prior.second_moment)
    Z_prev = y.copy()
    V_prev = np.zeros(instance.m)  # only multiplies y - Z_prev = 0 at t = 1
    while True:
        V = H2 @ v
        Z = H @ x_hat - V * (y - Z_prev) / (s2 + V_prev)
        prec = 1.0 / (s2 + V)
        Sigma = 1.0 / np.maximum(H2.T @ prec, 1e-300)
        resid = (y - Z) * prec
        r = x_hat + Sigma * (H.T @ resid)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(Sigma))):
            rec.record(np.full(instance.n, np.nan), inputs=r, residual=y - Z)
            break
        post = mmse_denoise(prior, r, np.maximum(Sigma, VAR_FLOOR))
        x_hat, v = post.mean, post.var
        Z_prev, V_prev = Z, V
        if not rec.record(x_hat, inputs=r, residual=y - Z, tau2=float(np.mean(Sigma)), v_hat=float(np.mean(v))):
            break
    return rec.finish()
