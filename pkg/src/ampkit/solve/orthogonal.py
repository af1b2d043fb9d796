"""Orthogonal AMP and vector AMP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..denoise import VAR_FLOOR, combined_variance, mmse_denoise
from ..exceptions import DegenerateDenoiserError
from ..model import PriorSpec, ProblemInstance
from ._base import SolverConfig, SolverTrace, Status, _Recorder, check_instance
from .bayes import require_bayes_prior

__all__ = ["run_oamp", "run_vamp", "VampState", "linear_stage_gains"]


def linear_stage_gains(s: np.ndarray, snr_inv: float, choice: str) -> np.ndarray:
    """Per-singular-value gains ``g`` of ``W = V diag(g) U^T``.

    ``MF``: ``g = s``; ``PseudoInverse``: ``g = 1/s`` on the non-zero
    singular values; ``LMMSE``: ``g = s / (s^2 + snr_inv)``.
    """
    if choice == "MF":
        return s.copy()
    if choice == "PseudoInverse":
        out = np.zeros_like(s)
        nz = s > s.max() * 1e-12
        out[nz] = 1.0 / s[nz]
        return out
    return s / (s * s + snr_inv)


def run_oamp(instance: ProblemInstance, cfg: SolverConfig, prior: PriorSpec) -> SolverTrace:
    """Orthogonal AMP with a de-correlated linear stage.

    With ``W = N / Tr(W_hat H) * W_hat`` (so ``Tr(I - W H) = 0``)::

        r    = x + W (y - H x)
        tau2 = v (N sum(g^2 s^2) / T^2 - 1) + sigma_w2 N sum(g^2) / T^2,   T = sum(g s)
        x_mmse, v_mmse = posterior mean / average variance at (r, tau2)
        v    = (1/v_mmse - 1/tau2)^-1
        x    = v (x_mmse / v_mmse - r / tau2)

    which for LMMSE reduces to ``tau2 = v (N / T - 1)``. All products with
    ``W_hat`` go through one thin SVD of ``H``. Starts from ``x = 0`` and
    ``v`` equal to the prior second moment. The reported estimate is
    ``x_mmse``; the divergence-free iterate is kept in ``extras["x_df"]``.
    """
    check_instance(instance)
    require_bayes_prior(prior)
    H, y, s2 = instance.H, instance.y, instance.sigma_w2
    n = instance.n
    U, s, Vt = np.linalg.svd(H, full_matrices=False)
    rec = _Recorder(instance, cfg)
    x_hat = np.zeros(n)
    v = prior.second_moment
    while True:
        z = y - H @ x_hat
        g = linear_stage_gains(s, s2 / v, cfg.w_choice)
        T = float(g @ s)
        scale = n / T
        r = x_hat + scale * (Vt.T @ (g * (U.T @ z)))
        tau2 = v * (n * float((g * s) @ (g * s)) / T**2 - 1.0) + s2 * n * float(g @ g) / T**2
        if not (np.isfinite(tau2) and tau2 > 0 and np.all(np.isfinite(r))):
            rec.record(np.full(n, np.nan), inputs=r, residual=z, tau2=tau2)
            break
        post = mmse_denoise(prior, r, tau2)
        v_mmse = max(post.avg_var, VAR_FLOOR)
        try:
            v_new = combined_variance(v_mmse, tau2)
        except DegenerateDenoiserError as exc:
            rec.record(post.mean, inputs=r, residual=z, tau2=tau2, v_hat=np.nan, x_df=x_hat, v_mmse=v_mmse, decorrelation=0.0)
            rec.stop(Status.CONVERGED, f"iteration {len(rec.trace)}: {exc}; stopped at the variance floor")
            break
        x_new = v_new * (post.mean / v_mmse - r / tau2)
        # Tr(I - W H) relative to N; zero by construction of the scaling
        decor = (n - scale * T) / n
        ok = rec.record(
            post.mean, inputs=r, residual=z, tau2=tau2, v_hat=v_new, x_df=x_new, v_mmse=v_mmse, decorrelation=decor
        )
        x_hat, v = x_new, v_new
        if not ok:
            break
    return rec.finish()


@dataclass
class VampState:
    """State of one vector-AMP sweep."""

    r1: np.ndarray
    r2: np.ndarray
    gamma1: float
    gamma2: float
    x1: np.ndarray
    x2: np.ndarray
    v1: float
    v2: float


def run_vamp(instance: ProblemInstance, cfg: SolverConfig, prior: PriorSpec) -> SolverTrace:
    """Vector AMP with direct (Cholesky) solves in the linear stage::

        x1 = (H^T H / s2 + I / g2)^-1 (H^T y / s2 + r2 / g2)
        v1 = Tr[(H^T H / s2 + I / g2)^-1] / N
        g1 = (1/v1 - 1/g2)^-1,   r1 = g1 (x1 / v1 - r2 / g2)
        x2 = E{x | r1, g1},      v2 = mean Var{x | r1, g1}
        g2 = (1/v2 - 1/g1)^-1,   r2 = g2 (x2 / v2 - r1 / g1)

    Starts from ``r2 = 0`` and ``g2`` equal to the prior second moment.
    ``inputs`` holds ``r1``, ``tau2`` holds ``g1``, ``v_hat`` holds the new
    ``g2`` and ``extras["states"]`` the full :class:`VampState` per sweep.
    """
    check_instance(instance)
    require_bayes_prior(prior)
    H, y, s2 = instance.H, instance.y, instance.sigma_w2
    n = instance.n
    HtH = H.T @ H / s2
    Hty = H.T @ y / s2
    eye = np.eye(n)
    rec = _Recorder(instance, cfg)
    r2 = np.zeros(n)
    g2 = prior.second_moment
    while True:
        try:
            c = linalg.cho_factor(HtH + eye / g2, lower=True)
        except linalg.LinAlgError:
            rec.record(np.full(n, np.nan), residual=y - H @ r2)
            break
        x1 = linalg.cho_solve(c, Hty + r2 / g2)
        Linv = linalg.solve_triangular(c[0], eye, lower=True)
        v1 = float(np.sum(Linv * Linv)) / n
        g1 = 1.0 / (1.0 / v1 - 1.0 / g2)
        if not (np.isfinite(g1) and g1 > 0):
            rec.record(np.full(n, np.nan), residual=y - H @ r2, tau2=g1)
            rec.warn("gamma1 left (0, inf)")
            break
        r1 = g1 * (x1 / v1 - r2 / g2)
        post = mmse_denoise(prior, r1, g1)
        v2 = max(post.avg_var, VAR_FLOOR)
        resid = y - H @ r2
        if not v2 < g1:
            rec.record(post.mean, inputs=r1, residual=resid, tau2=g1, v_hat=np.nan)
            rec.stop(Status.CONVERGED, f"iteration {len(rec.trace)}: v2 >= gamma1; stopped at the variance floor")
            break
        g2_new = 1.0 / (1.0 / v2 - 1.0 / g1)
        r2_new = g2_new * (post.mean / v2 - r1 / g1)
        state = VampState(r1=r1, r2=r2_new, gamma1=g1, gamma2=g2_new, x1=x1, x2=post.mean, v1=v1, v2=v2)
        ok = rec.record(post.mean, inputs=r1, residual=resid, tau2=g1, v_hat=g2_new, states=state)
        r2, g2 = r2_new, g2_new
        if not ok:
            break
    return rec.finish()
