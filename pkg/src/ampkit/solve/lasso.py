"""LASSO solvers: ISTA, FISTA and AMP with an adaptive soft threshold."""
from __future__ import annotations

import numpy as np

from ..denoise import soft_threshold
from ..model import ProblemInstance
from ._base import SolverConfig, SolverTrace, _Recorder, check_instance

__all__ = ["run_ista", "run_fista", "run_amp_lasso"]


def run_ista(instance: ProblemInstance, cfg: SolverConfig) -> SolverTrace:
    """Proximal gradient descent with a fixed step.

    ``r = x + a H^T (y - H x)``, ``x <- soft(r, a * lam)``, from ``x = 0``.
    """
    check_instance(instance)
    H, y = instance.H, instance.y
    a, lam = cfg.step_size, cfg.lam
    rec = _Recorder(instance, cfg)
    x_hat = np.zeros(instance.n)
    while True:
        z = y - H @ x_hat
        r = x_hat + a * (H.T @ z)
        x_hat = soft_threshold(r, a * lam).mean
        if not rec.record(x_hat, inputs=r, residual=z):
            break
    return rec.finish()


def run_fista(instance: ProblemInstance, cfg: SolverConfig) -> SolverTrace:
    """ISTA step taken from the extrapolated point
    ``x^(t-1) + (t - 2)/(t + 1) * (x^(t-1) - x^(t-2))``, with zero history.
    """
    check_instance(instance)
    H, y = instance.H, instance.y
    a, lam = cfg.step_size, cfg.lam
    rec = _Recorder(instance, cfg)
    x_prev = np.zeros(instance.n)
    x_prev2 = np.zeros(instance.n)
    t = 0
    while True:
        t += 1
        point = x_prev + (t - 2.0) / (t + 1.0) * (x_prev - x_prev2)
        z = y - H @ point
        r = point + a * (H.T @ z)
        x_new = soft_threshold(r, a * lam).mean
        x_prev2, x_prev = x_prev, x_new
        if not rec.record(x_new, inputs=r, residual=z):
            break
    return rec.finish()


def run_amp_lasso(instance: ProblemInstance, cfg: SolverConfig) -> SolverTrace:
    """AMP for LASSO with threshold ``lam + tau_hat``.

    ``z = y - H x + z_prev <eta'> / alpha``, ``x <- soft(x + H^T z, lam + tau_hat)``
    and ``tau_hat <- (lam + tau_hat) <eta'> / alpha``. Starts from ``x = 0``,
    ``z_prev = 0`` and ``tau_hat = lam / alpha``. ``tau2`` records the
    empirical ``||z||^2 / M``, an estimate of the input-noise variance.
    """
    check_instance(instance)
    H, y = instance.H, instance.y
    alpha, lam = instance.alpha, cfg.lam
    rec = _Recorder(instance, cfg)
    x_hat = np.zeros(instance.n)
    z = np.zeros(instance.m)
    onsager = 0.0
    tau_hat = lam / alpha
    while True:
        z = y - H @ x_hat + z * onsager / alpha
        r = x_hat + H.T @ z
        gamma = lam + tau_hat
        out = soft_threshold(r, gamma)
        x_hat = out.mean
        onsager = out.avg_deriv
        ok = rec.record(x_hat, inputs=r, residual=z, tau2=float(z @ z) / instance.m, v_hat=tau_hat, threshold=gamma)
        tau_hat = gamma * onsager / alpha
        if not ok:
            break
    return rec.finish()
