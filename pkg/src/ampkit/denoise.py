"""Scalar denoisers applied component-wise inside the solvers.

Each denoiser returns a :class:`DenoiserResult` holding the per-component
output, per-component posterior variance and per-component derivative with
respect to the input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .exceptions import DegenerateDenoiserError, InvalidArgumentError, UnsupportedPriorError
from .model import BernoulliGaussian, Discrete, PriorSpec

__all__ = [
    "VAR_FLOOR",
    "DenoiserResult",
    "soft_threshold",
    "bg_mmse",
    "discrete_mmse",
    "mmse_denoise",
    "combined_variance",
    "divergence_free",
]

#: Lower clamp for effective noise and posterior variances.
VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class DenoiserResult:
    mean: np.ndarray
    var: np.ndarray
    deriv: np.ndarray

    @property
    def avg_var(self) -> float:
        return float(np.mean(self.var))

    @property
    def avg_deriv(self) -> float:
        return float(np.mean(self.deriv))


def soft_threshold(r, gamma) -> DenoiserResult:
    """``sign(r) * max(|r| - gamma, 0)``; derivative 0 at the kink.

    The result carries zero posterior variance (there is no posterior).
    """
    r = np.asarray(r, dtype=float)
    if np.any(np.asarray(gamma) < 0):
        raise InvalidArgumentError("threshold must be >= 0")
    mag = np.abs(r) - gamma
    mean = np.sign(r) * np.maximum(mag, 0.0)
    deriv = (mag > 0).astype(float)
    return DenoiserResult(mean=mean, var=np.zeros_like(mean), deriv=deriv)


def _check_tau2(tau2):
    tau2 = np.asarray(tau2, dtype=float)
    if np.any(~(tau2 > 0)):
        raise InvalidArgumentError("tau2 must be > 0")
    return np.maximum(tau2, VAR_FLOOR)


def bg_mmse(r, tau2, rho: float, mu: float = 0.0) -> DenoiserResult:
    """Posterior mean/variance for ``rho*N(mu, 1/rho) + (1-rho)*delta`` under
    ``r = x + sqrt(tau2) * z``.

    ``tau2`` may be a scalar or a per-component array.
    """
    r = np.asarray(r, dtype=float)
    tau2 = _check_tau2(tau2)
    if not (0.0 < rho <= 1.0):
        raise InvalidArgumentError("rho must lie in (0, 1]")
    vx = 1.0 / rho
    s2 = vx * tau2 / (vx + tau2)
    m = (mu * tau2 + r * vx) / (vx + tau2)
    if rho < 1.0:
        # log-odds of slab vs spike
        log_slab = np.log(rho) - 0.5 * np.log(vx + tau2) - 0.5 * (r - mu) ** 2 / (vx + tau2)
        log_spike = np.log1p(-rho) - 0.5 * np.log(tau2) - 0.5 * r**2 / tau2
        pi = expit(log_slab - log_spike)
        dlog = -(r - mu) / (vx + tau2) + r / tau2
    else:
        pi = np.ones_like(r)
        dlog = np.zeros_like(r)
    mean = pi * m
    var = pi * s2 + pi * (1.0 - pi) * m**2
    deriv = pi * (1.0 - pi) * dlog * m + pi * s2 / tau2
    return DenoiserResult(mean=mean, var=np.maximum(var, 0.0), deriv=deriv)


def discrete_mmse(r, tau2, prior: Discrete) -> DenoiserResult:
    """Posterior mean/variance for a finite alphabet (log-sum-exp stabilised)."""
    r = np.asarray(r, dtype=float)
    tau2 = _check_tau2(tau2)
    levels = np.asarray(prior.levels)
    with np.errstate(divide="ignore"):
        logp = np.log(np.asarray(prior.probs))
    logits = logp[None, :] - (r[..., None] - levels[None, :]) ** 2 / (2.0 * np.asarray(tau2)[..., None])
    w = np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))
    mean = w @ levels
    var = np.maximum(w @ levels**2 - mean**2, 0.0)
    return DenoiserResult(mean=mean, var=var, deriv=var / tau2)


def mmse_denoise(prior: PriorSpec, r, tau2) -> DenoiserResult:
    """Dispatch to the MMSE denoiser matching ``prior``."""
    if isinstance(prior, BernoulliGaussian):
        return bg_mmse(r, tau2, prior.rho, prior.mu)
    if isinstance(prior, Discrete):
        return discrete_mmse(r, tau2, prior)
    raise UnsupportedPriorError(f"no MMSE denoiser for {type(prior).__name__}")


def combined_variance(v_mmse: float, tau2: float) -> float:
    """Extrinsic variance ``(1/v_mmse - 1/tau2)^-1``; requires ``tau2 > v_mmse``."""
    v_mmse = max(v_mmse, VAR_FLOOR)
    if not tau2 > v_mmse:
        raise DegenerateDenoiserError(f"tau2={tau2:.3e} <= posterior variance {v_mmse:.3e}")
    return 1.0 / (1.0 / v_mmse - 1.0 / tau2)


def divergence_free(inner: DenoiserResult, r, tau2: float) -> np.ndarray:
    """Divergence-free output built from an MMSE denoiser evaluated at ``(r, tau2)``.

    Returns ``v * (mean / v_mmse - r / tau2)`` with ``v = (1/v_mmse - 1/tau2)^-1``;
    the empirical average derivative of this map is zero.
    """
    v_mmse = max(inner.avg_var, VAR_FLOOR)
    v = combined_variance(v_mmse, tau2)
    return v * (inner.mean / v_mmse - np.asarray(r, dtype=float) / tau2)
