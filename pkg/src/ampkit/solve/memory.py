"""Memory AMP: OAMP-like estimation without a matrix inverse."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..denoise import VAR_FLOOR, combined_variance, mmse_denoise
from ..exceptions import DegenerateDenoiserError, InvalidArgumentError
from ..model import PriorSpec, ProblemInstance
from ..se import V_TABLE_FLOOR, damp_row
from ..spectral import MemoryCoefficients, SpectralModel, build_spectral_model
from ._base import SolverConfig, SolverTrace, Status, _Recorder, check_instance
from .bayes import require_bayes_prior

__all__ = ["run_mamp"]


def run_mamp(
    instance: ProblemInstance,
    cfg: SolverConfig,
    prior: PriorSpec,
    spectral: Optional[SpectralModel] = None,
) -> SolverTrace:
    """Memory AMP.

    Linear stage with ``B = lambda_dag I - H H^T``::

        z = theta_t B z_prev + xi_t (y - H x_t)
        r = (H^T z + sum_i p_{t,i} x_i) / eps_t

    followed by the divergence-free MMSE stage of OAMP. Cross-variances of
    the estimates come from the residuals,
    ``v_ij = (z_i^T z_j / N - alpha sigma_w2) / w_0``. The new estimate
    (and with it the residual) is damped with ``beta1`` and the new
    diagonal variance with ``beta2``.

    The recursion runs on the rescaled system ``H / sqrt(lambda_dag)``,
    which leaves every iterate unchanged but keeps matrix powers bounded.
    ``spectral`` defaults to the model of ``H`` with depth ``2 * max_iters``.
    """
    check_instance(instance)
    require_bayes_prior(prior)
    T = cfg.max_iters
    if spectral is None:
        spectral = build_spectral_model(instance.H, 2 * T)
    if spectral.n != instance.n or spectral.m != instance.m:
        raise InvalidArgumentError("spectral model does not match H")
    beta1, beta2 = cfg.damping
    n, alpha = instance.n, instance.alpha
    c = np.sqrt(spectral.lambda_dagger)
    Hs = instance.H / c
    ys = instance.y / c
    s2 = instance.sigma_w2 / spectral.lambda_dagger
    w0 = spectral.w_scaled[0]

    coef = MemoryCoefficients(spectral, instance.sigma_w2)
    rec = _Recorder(instance, cfg)
    xs = [np.zeros(n)]
    zt = [ys.copy()]
    vtab = np.zeros((T + 1, T + 1))
    vtab[0, 0] = max((zt[0] @ zt[0] / n - alpha * s2) / w0, V_TABLE_FLOOR)
    z = np.zeros(instance.m)
    t = 0
    while True:
        t += 1
        if 2 * t - 2 > spectral.depth:
            rec.warn(f"spectral depth {spectral.depth} exhausted at iteration {t}")
            break
        xi, p, eps, tau2 = coef.advance(vtab)
        theta = coef.theta[-1]
        z = theta * (z - Hs @ (Hs.T @ z)) + xi * zt[-1]
        memory = np.asarray(xs).T @ p
        r = (Hs.T @ z + memory) / eps
        if not (np.isfinite(tau2) and tau2 > 0 and np.all(np.isfinite(r))):
            rec.record(np.full(n, np.nan), inputs=r, residual=zt[-1] * c, tau2=tau2)
            break
        post = mmse_denoise(prior, r, tau2)
        v_mmse = max(post.avg_var, VAR_FLOOR)
        try:
            v_ext = combined_variance(v_mmse, tau2)
        except DegenerateDenoiserError as exc:
            rec.record(post.mean, inputs=r, residual=zt[-1] * c, tau2=tau2, v_hat=np.nan, x_df=xs[-1], xi=xi)
            rec.stop(Status.CONVERGED, f"iteration {t}: {exc}; stopped at the variance floor")
            break
        x_df = v_ext * (post.mean / v_mmse - r / tau2)
        x_new = beta1 * x_df + (1.0 - beta1) * xs[-1]
        z_new = ys - Hs @ x_new
        ok = rec.record(post.mean, inputs=r, residual=zt[-1] * c, tau2=tau2, v_hat=v_ext, x_df=x_new, xi=xi)
        if not ok or t >= T:
            break
        xs.append(x_new)
        zt.append(z_new)
        gram = np.asarray(zt) @ z_new
        row = damp_row((gram / n - alpha * s2) / w0, vtab[t - 1, t - 1], beta2)
        vtab[t, : t + 1] = row
        vtab[: t + 1, t] = row
    for msg in coef.warnings:
        rec.trace.warnings.append(msg)
    k = len(xs)
    rec.trace.v_table = vtab[:k, :k].copy()
    return rec.finish()
