"""State-evolution predictors for AMP, OAMP and memory AMP.

Scalar expectations over ``R = X + tau * Z`` are evaluated by adaptive
quadrature on the exact mixture density of ``R``: both supported priors make
``R`` a finite Gaussian mixture, so ``E{f(R)} = sum_k w_k E{f(c_k + s_k Z)}``.
Memory AMP uses Monte Carlo for its joint-Gaussian cross terms.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, linalg
from scipy.stats import norm

from .denoise import VAR_FLOOR, combined_variance, mmse_denoise, soft_threshold
from .exceptions import DegenerateDenoiserError, InvalidArgumentError, UnsupportedPriorError
from .model import BernoulliGaussian, Discrete, PriorSpec, sample_prior
from .spectral import MemoryCoefficients, SpectralModel

logger = logging.getLogger(__name__)

__all__ = [
    "SeTrace",
    "marginal_mixture",
    "expect_over_input",
    "mmse_error",
    "soft_threshold_error",
    "amp_se",
    "amp_lasso_se",
    "oamp_se",
    "mamp_se",
    "damp_row",
]

#: Lower clamp for the diagonal of the cross-variance table.
V_TABLE_FLOOR = 1e-10


# ------------------------------------------------------------ quadrature ---


def marginal_mixture(prior: PriorSpec, tau2: float):
    """Components ``(weight, centre, std)`` of the density of ``X + sqrt(tau2) Z``."""
    if isinstance(prior, BernoulliGaussian):
        comps = [(1.0 - prior.rho, 0.0, tau2), (prior.rho, prior.mu, prior.slab_var + tau2)]
    elif isinstance(prior, Discrete):
        comps = [(p, lv, tau2) for lv, p in zip(prior.levels, prior.probs)]
    else:
        raise UnsupportedPriorError(f"no state evolution for {type(prior).__name__}")
    return [(w, c, np.sqrt(v)) for w, c, v in comps if w > 0]


def expect_over_input(prior: PriorSpec, tau2: float, func) -> float:
    """``E{func(R)}`` for ``R = X + sqrt(tau2) Z`` with ``X ~ prior``.

    ``func`` maps a scalar to a scalar. Break points near the origin at
    multiples of ``tau`` let the integrator resolve the spike of sparse
    posteriors at small ``tau2``.
    """
    tau = np.sqrt(tau2)
    marks = np.concatenate([[0.0], np.outer([1.0, -1.0], [0.5, 1, 2, 3, 4, 6, 8]).ravel() * tau])
    total = 0.0
    for w, c, s in marginal_mixture(prior, tau2):
        lo, hi = c - 12.0 * s, c + 12.0 * s
        pts = sorted(p for p in marks if lo < p < hi)

        def dens(r, c=c, s=s):
            return func(r) * np.exp(-0.5 * ((r - c) / s) ** 2) / (np.sqrt(2.0 * np.pi) * s)

        val, _ = integrate.quad(dens, lo, hi, points=pts or None, limit=400, epsabs=1e-15, epsrel=1e-11)
        total += w * val
    return float(total)


def mmse_error(prior: PriorSpec, tau2: float) -> float:
    """``E{(E[X|R] - X)^2}``, the MMSE of the scalar channel at noise ``tau2``."""
    tau2 = max(float(tau2), VAR_FLOOR)
    return expect_over_input(prior, tau2, lambda r: mmse_denoise(prior, np.array([r]), tau2).var[0])


def soft_threshold_error(prior: PriorSpec, tau2: float, gamma: float):
    """Return ``(E{(soft(R, gamma) - X)^2}, E{soft'(R, gamma)})``.

    Uses ``E{(eta(R) - X)^2} = E{(eta(R) - E[X|R])^2} + mmse``.
    """
    tau2 = max(float(tau2), VAR_FLOOR)

    def sq(r):
        post = mmse_denoise(prior, np.array([r]), tau2)
        return (soft_threshold(np.array([r]), gamma).mean[0] - post.mean[0]) ** 2 + post.var[0]

    err = expect_over_input(prior, tau2, sq)
    deriv = sum(w * (norm.sf((gamma - c) / s) + norm.cdf((-gamma - c) / s)) for w, c, s in marginal_mixture(prior, tau2))
    return err, float(deriv)


# ------------------------------------------------------------------ trace ---


@dataclass
class SeTrace:
    """Per-iteration state-evolution output.

    ``mse_pred[t]`` predicts the MSE of the denoiser output at iteration
    ``t + 1``. ``xi_tables`` and ``v_table`` are filled for memory AMP only.
    """

    second_moment: float
    tau2: list = field(default_factory=list)
    v_hat: list = field(default_factory=list)
    mse_pred: list = field(default_factory=list)
    xi_tables: list = field(default_factory=list)
    v_table: Optional[np.ndarray] = None
    status: str = "Running"
    message: str = ""

    @property
    def nmse_db(self) -> np.ndarray:
        return 10.0 * np.log10(np.asarray(self.mse_pred, dtype=float) / self.second_moment)

    def __len__(self):
        return len(self.mse_pred)


def _second_moment(prior):
    if isinstance(prior, (BernoulliGaussian, Discrete)):
        return prior.second_moment
    raise UnsupportedPriorError(f"no state evolution for {type(prior).__name__}")


#: Relative change of the SE state below which the recursion is at its fixed point.
SE_FIXED_TOL = 1e-12


def _settled(old: float, new: float) -> bool:
    return abs(new - old) <= SE_FIXED_TOL * abs(old)


def _hold(trace: SeTrace, iters: int):
    """Repeat the last entry up to ``iters`` once the recursion is stationary."""
    while len(trace.mse_pred) < iters:
        trace.tau2.append(trace.tau2[-1])
        trace.mse_pred.append(trace.mse_pred[-1])
        trace.v_hat.append(trace.v_hat[-1])
    trace.status = "Converged"


def _check_common(sigma_w2, iters):
    if not sigma_w2 > 0:
        raise InvalidArgumentError("sigma_w2 must be > 0")
    if iters < 1:
        raise InvalidArgumentError("iters must be >= 1")


# -------------------------------------------------------------------- AMP ---


def amp_se(prior: PriorSpec, sigma_w2: float, alpha: float, iters: int) -> SeTrace:
    """Scalar recursion ``tau2 <- sigma_w2 + mmse(tau2) / alpha``.

    Starts from ``tau2 = sigma_w2 + E[X^2] / alpha`` (all-zero first estimate).
    Once ``tau2`` is stationary the remaining iterations repeat it.
    """
    _check_common(sigma_w2, iters)
    if not alpha > 0:
        raise InvalidArgumentError("alpha must be > 0")
    ex2 = _second_moment(prior)
    trace = SeTrace(second_moment=ex2)
    tau2 = sigma_w2 + ex2 / alpha
    for _ in range(iters):
        mse = mmse_error(prior, tau2)
        trace.tau2.append(tau2)
        trace.mse_pred.append(mse)
        trace.v_hat.append(mse)
        new = sigma_w2 + mse / alpha
        if _settled(tau2, new):
            _hold(trace, iters)
            break
        tau2 = new
    return trace


def amp_lasso_se(prior: PriorSpec, sigma_w2: float, alpha: float, lam: float, iters: int) -> SeTrace:
    """Recursion for AMP with the adaptive soft threshold ``lam + tau_hat``.

    ``tau_hat`` follows the solver's update ``(lam + tau_hat) <eta'> / alpha``
    with ``<eta'>`` replaced by its expectation.
    """
    _check_common(sigma_w2, iters)
    ex2 = _second_moment(prior)
    trace = SeTrace(second_moment=ex2)
    tau2 = sigma_w2 + ex2 / alpha
    tau_hat = lam / alpha
    for _ in range(iters):
        gamma = lam + tau_hat
        mse, d = soft_threshold_error(prior, tau2, gamma)
        trace.tau2.append(tau2)
        trace.mse_pred.append(mse)
        trace.v_hat.append(tau_hat)
        new_hat = gamma * d / alpha
        new = sigma_w2 + mse / alpha
        if _settled(tau2, new) and _settled(tau_hat, new_hat):
            _hold(trace, iters)
            break
        tau2, tau_hat = new, new_hat
    return trace


# ------------------------------------------------------------------- OAMP ---


def oamp_se(prior: PriorSpec, sigma_w2: float, spectral: SpectralModel, iters: int) -> SeTrace:
    """OAMP recursion over the realised eigenvalues of ``H^T H``.

    ``tau2 = v (1 / E{lam / (lam + sigma_w2 / v)} - 1)``, then
    ``v <- (1/mmse(tau2) - 1/tau2)^-1``. Stops early when the combination
    becomes singular.
    """
    _check_common(sigma_w2, iters)
    ex2 = _second_moment(prior)
    trace = SeTrace(second_moment=ex2)
    v = ex2
    for t in range(iters):
        ratio = spectral.lmmse_trace_ratio(sigma_w2 / v)
        tau2 = v * (1.0 / ratio - 1.0)
        mse = mmse_error(prior, tau2)
        trace.tau2.append(tau2)
        trace.mse_pred.append(mse)
        try:
            v = combined_variance(mse, tau2)
        except DegenerateDenoiserError as exc:
            trace.v_hat.append(np.nan)
            trace.status = "Converged"
            trace.message = f"iteration {t + 1}: {exc}"
            return trace
        trace.v_hat.append(v)
        if t > 0 and _settled(trace.v_hat[-2], v):
            _hold(trace, iters)
            break
    return trace


# ------------------------------------------------------------------- MAMP ---


def damp_row(new_row: np.ndarray, prev_diag: Optional[float], beta2: float) -> np.ndarray:
    """Damp the diagonal of a fresh cross-variance row.

    ``new_row`` holds ``v[t+1, 1..t+1]`` computed from already damped
    estimates, so its off-diagonal entries stay consistent with the stored
    history. Only the new diagonal entry is mixed with ``v[t, t]``.
    """
    out = np.array(new_row, dtype=float)
    if prev_diag is not None and beta2 != 1.0:
        out[-1] = beta2 * out[-1] + (1.0 - beta2) * prev_diag
    out[-1] = max(out[-1], V_TABLE_FLOOR)
    return out


def mamp_se(
    prior: PriorSpec,
    sigma_w2: float,
    spectral: SpectralModel,
    iters: int,
    mc_samples: int = 100_000,
    damping=(1.0, 1.0),
    seed: int = 0,
) -> SeTrace:
    """Memory AMP state evolution with Monte-Carlo cross terms.

    The coefficient pipeline is the one used by the solver. Input errors are
    drawn jointly Gaussian with covariance ``Xi_t`` by extending a Cholesky
    factor one row per iteration, so earlier draws stay fixed.
    """
    _check_common(sigma_w2, iters)
    beta1, beta2 = damping
    if not (0 < beta1 <= 1 and 0 < beta2 <= 1):
        raise InvalidArgumentError("damping factors must lie in (0, 1]")
    if mc_samples < 2:
        raise InvalidArgumentError("mc_samples must be >= 2")
    rng = np.random.default_rng(seed)
    x = sample_prior(prior, mc_samples, rng)
    ex2 = _second_moment(prior)
    trace = SeTrace(second_moment=ex2)
    coef = MemoryCoefficients(spectral, sigma_w2)

    T = iters
    vtab = np.zeros((T + 1, T + 1))
    errs = np.zeros((mc_samples, T + 1))  # x_hat^(t) - x
    errs[:, 0] = -x
    vtab[0, 0] = float(np.mean(x * x))
    L = np.zeros((T, T))
    G = np.zeros((mc_samples, T))
    xi = np.zeros((T, T))

    for t in range(1, T + 1):
        _, _, _, tau2 = coef.advance(vtab)
        if not (np.isfinite(tau2) and tau2 > 0):
            trace.status = "Degenerate"
            trace.message = f"iteration {t}: non-positive tau2"
            break
        xi[t - 1, t - 1] = tau2
        for s in range(1, t):
            xi[t - 1, s - 1] = xi[s - 1, t - 1] = coef.tau_cross(t, s, vtab)
        block = xi[:t, :t]
        min_eig = float(np.linalg.eigvalsh(0.5 * (block + block.T))[0])
        # the cross-variances are Monte-Carlo averages, so slack below their
        # sampling resolution is noise rather than loss of definiteness
        if min_eig < -float(np.max(np.diag(block))) / np.sqrt(mc_samples):
            trace.status = "Degenerate"
            trace.message = f"iteration {t}: Xi lost positive semidefiniteness ({min_eig:.3e})"
            break
        trace.xi_tables.append(block.copy())

        # extend the Cholesky factor by one row
        if t > 1:
            Lp = L[: t - 1, : t - 1]
            diag = np.diag(Lp)
            col = xi[t - 1, : t - 1]
            if np.all(diag > 1e-14 * np.sqrt(tau2)):
                row = linalg.solve_triangular(Lp, col, lower=True)
            else:
                row = np.linalg.lstsq(Lp, col, rcond=1e-12)[0]
            L[t - 1, : t - 1] = row
            d = tau2 - float(row @ row)
        else:
            d = tau2
        L[t - 1, t - 1] = np.sqrt(max(d, 0.0))
        G[:, t - 1] = rng.standard_normal(mc_samples)
        noise = G[:, :t] @ L[t - 1, :t]

        r = x + noise
        post = mmse_denoise(prior, r, tau2)
        v_mmse = max(post.avg_var, VAR_FLOOR)
        trace.tau2.append(tau2)
        trace.mse_pred.append(v_mmse)
        try:
            v_ext = combined_variance(v_mmse, tau2)
        except DegenerateDenoiserError as exc:
            trace.v_hat.append(np.nan)
            trace.status = "Converged"
            trace.message = f"iteration {t}: {exc}"
            break
        trace.v_hat.append(v_ext)
        x_df = v_ext * (post.mean / v_mmse - r / tau2)
        x_new = beta1 * x_df + (1.0 - beta1) * (errs[:, t - 1] + x)
        errs[:, t] = x_new - x
        new_row = errs[:, : t + 1].T @ errs[:, t] / mc_samples
        row = damp_row(new_row, vtab[t - 1, t - 1], beta2)
        vtab[t, : t + 1] = row
        vtab[: t + 1, t] = row
    else:
        trace.status = "Converged"
    k = len(trace.mse_pred)
    trace.v_table = vtab[: k + 1, : k + 1].copy()
    return trace
