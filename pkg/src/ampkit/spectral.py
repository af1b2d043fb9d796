"""Spectral quantities of ``H`` shared by memory AMP and the OAMP/MAMP state evolution.

With ``B = lambda_dag * I - H H^T`` and ``W_t = H^T B^t H``::

    w_t        = Tr(W_t) / N
    wbar_{i,j} = Tr(W_i W_j) / N - w_i w_j

:class:`MemoryCoefficients` turns these moments into the per-iteration
relaxation, memory weights, normalisation and optimal step of memory AMP.
The solver and its state evolution drive the same object, so both follow an
identical coefficient pipeline.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = ["SpectralModel", "build_spectral_model", "MemoryCoefficients", "XI_CAP"]

#: Finite stand-in for the unbounded branch of the optimal step.
XI_CAP = 1e6


@dataclass(frozen=True)
class SpectralModel:
    """Eigenvalue-derived moments of one measurement matrix.

    Moments are stored for the rescaled matrix ``H / sqrt(lambda_dagger)``,
    whose ``B`` has spectral radius at most one, so deep recursions neither
    overflow nor underflow. :attr:`w` and :attr:`wbar` undo the scaling.

    Attributes
    ----------
    eigenvalues : ndarray
        Eigenvalues of ``H H^T`` (length M, ascending).
    n : int
        Signal dimension N used in every normalisation.
    lambda_dagger : float
        ``(lambda_max + lambda_min) / 2``.
    w_scaled : ndarray
        ``w_t / lambda_dagger^(t+1)`` for ``t = 0..depth``.
    wbar_scaled : ndarray
        ``wbar_{i,j} / lambda_dagger^(i+j+2)``.
    """

    eigenvalues: np.ndarray
    n: int
    lambda_dagger: float
    w_scaled: np.ndarray
    wbar_scaled: np.ndarray

    @property
    def depth(self) -> int:
        return len(self.w_scaled) - 1

    @property
    def m(self) -> int:
        return len(self.eigenvalues)

    @property
    def w(self) -> np.ndarray:
        """``w_t = Tr(H^T B^t H) / N``."""
        k = np.arange(self.depth + 1)
        return self.w_scaled * self.lambda_dagger ** (k + 1.0)

    @property
    def wbar(self) -> np.ndarray:
        """``wbar_{i,j} = Tr(W_i W_j) / N - w_i w_j``."""
        k = np.arange(self.depth + 1)
        return self.wbar_scaled * self.lambda_dagger ** (k[:, None] + k[None, :] + 2.0)

    def hth_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of ``H^T H``: the M values of ``H H^T`` zero-padded to N."""
        lam = np.sort(self.eigenvalues)[::-1]
        out = np.zeros(self.n)
        k = min(self.n, self.m)
        out[:k] = lam[:k]
        return out

    def lmmse_trace_ratio(self, snr_inv: float) -> float:
        """``E{lambda / (lambda + snr_inv)}`` over the eigenvalues of ``H^T H``."""
        lam = self.hth_eigenvalues()
        return float(np.mean(lam / (lam + snr_inv)))


def _moments_from_eigenvalues(lam: np.ndarray, n: int, depth: int):
    base = 1.0 - lam
    powers = base[None, :] ** np.arange(2 * depth + 1)[:, None]
    w_all = powers @ lam / n
    u = powers @ lam**2 / n
    idx = np.arange(depth + 1)
    wbar = u[idx[:, None] + idx[None, :]] - np.outer(w_all[: depth + 1], w_all[: depth + 1])
    return w_all[: depth + 1], wbar


def _moments_from_traces(H: np.ndarray, depth: int):
    """Explicit matrix powers; O(depth * M^3), meant for cross-checking."""
    m, n = H.shape
    G = H @ H.T
    B = np.eye(m) - G
    mats = []
    bk = np.eye(m)
    for _ in range(depth + 1):
        # Tr(H^T B^k H) = Tr(B^k H H^T)
        mats.append(bk @ G)
        bk = bk @ B
    w = np.array([np.trace(x) for x in mats]) / n
    wbar = np.empty((depth + 1, depth + 1))
    for i in range(depth + 1):
        for j in range(i, depth + 1):
            val = np.sum(mats[i] * mats[j].T) / n - w[i] * w[j]
            wbar[i, j] = wbar[j, i] = val
    return w, wbar


def build_spectral_model(H, depth: int, method: str = "eig") -> SpectralModel:
    """Compute the spectral model of ``H`` up to moment order ``depth``.

    ``method="eig"`` evaluates every moment as an eigenvalue sum;
    ``method="trace"`` forms the matrix powers explicitly.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2:
        raise InvalidArgumentError("H must be a matrix")
    if depth < 0:
        raise InvalidArgumentError("depth must be >= 0")
    if not np.all(np.isfinite(H)):
        raise InvalidArgumentError("H has non-finite entries")
    m, n = H.shape
    lam = np.linalg.eigvalsh(H @ H.T)
    if not np.all(np.isfinite(lam)):
        raise InvalidArgumentError("non-finite eigenvalues")
    lam = np.clip(lam, 0.0, None)
    lam_dag = 0.5 * (lam[-1] + lam[0])
    if not lam_dag > 0:
        raise InvalidArgumentError("H must be non-zero (w_0 = Tr(H^T H)/N > 0)")
    if method == "eig":
        w, wbar = _moments_from_eigenvalues(lam / lam_dag, n, depth)
    elif method == "trace":
        w, wbar = _moments_from_traces(H / np.sqrt(lam_dag), depth)
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    return SpectralModel(eigenvalues=lam, n=n, lambda_dagger=float(lam_dag), w_scaled=w, wbar_scaled=wbar)


class MemoryCoefficients:
    """Per-iteration coefficient pipeline of memory AMP.

    Call :meth:`advance` once per iteration with the current table of error
    cross-variances ``v[i, j]`` (0-based, covering estimates ``1..t``).
    All coefficients refer to the rescaled system ``H / sqrt(lambda_dagger)``
    with noise variance ``sigma_w2 / lambda_dagger``; ``tau2`` and the
    cross-variances are unaffected by that rescaling.
    Histories of ``theta``, ``xi``, the weights ``vartheta[t][i]`` and the
    normalisers ``eps`` are kept so cross-covariances between iterations can
    be evaluated later via :meth:`tau_cross`.
    """

    def __init__(self, spectral: SpectralModel, sigma_w2: float, xi_cap: float = XI_CAP):
        self.spectral = spectral
        self.sigma_w2 = float(sigma_w2) / spectral.lambda_dagger
        self.xi_cap = xi_cap
        self.theta: list = []
        self.xi: list = []
        self.vartheta: list = []
        self.eps: list = []
        self.warnings: list = []

    @property
    def t(self) -> int:
        """Number of completed iterations."""
        return len(self.xi)

    def _need(self, t):
        if 2 * t - 2 > self.spectral.depth:
            raise InvalidArgumentError(
                f"spectral depth {self.spectral.depth} too small for iteration {t} (need {2 * t - 2})"
            )

    def advance(self, vtab: np.ndarray):
        """Run one coefficient update and return ``(xi, p_row, eps, tau2)``."""
        t = self.t + 1
        self._need(t)
        sp = self.spectral
        w, wbar, s2 = sp.w_scaled, sp.wbar_scaled, self.sigma_w2
        v_tt = vtab[t - 1, t - 1]
        theta = 1.0 / (1.0 + s2 / v_tt)
        prev = theta * self.vartheta[-1] if t > 1 else np.zeros(0)
        lags = t - 1 - np.arange(t - 1)  # t - i for i = 1..t-1
        p_prev = prev * w[lags]
        w0 = w[0]
        c0 = p_prev.sum() / w0
        c1 = s2 * w0 + v_tt * wbar[0, 0]
        c2 = -np.sum(prev * (s2 * w[lags] + vtab[t - 1, : t - 1] * wbar[0, lags]))
        if t > 1:
            kern = s2 * w[lags[:, None] + lags[None, :]] + vtab[: t - 1, : t - 1] * wbar[np.ix_(lags, lags)]
            c3 = float(prev @ kern @ prev)
        else:
            c3 = 0.0

        if t == 1:
            # no memory yet: r^(1) does not depend on the step's scale
            xi = 1.0
        else:
            xi = self._pick_step(t, c0, c1, c2, c3, w0)

        vt = np.append(prev, xi)
        p = np.append(p_prev, xi * w0)
        eps = float(p.sum())
        tau2 = (c1 * xi**2 - 2.0 * c2 * xi + c3) / eps**2

        self.theta.append(theta)
        self.xi.append(xi)
        self.vartheta.append(vt)
        self.eps.append(eps)
        return xi, p, eps, tau2

    def _pick_step(self, t, c0, c1, c2, c3, w0):
        """Minimise ``tau2(xi) = (c1 xi^2 - 2 c2 xi + c3) / (w0 (xi + c0))^2``.

        The stationary point ``xi*`` competes with the unit step and the cap
        (the finite stand-in for ``xi -> inf``). When memory terms vanish all
        three give the same value up to roundoff and the unit step is kept,
        since ``xi*`` is then a ratio of rounding errors.
        """

        def tau2(xi):
            den = (w0 * (xi + c0)) ** 2
            return (c1 * xi * xi - 2.0 * c2 * xi + c3) / den if den > 0 else np.inf

        den = c1 * c0 + c2
        cands = [1.0, self.xi_cap]
        if den != 0.0:
            star = (c2 * c0 + c3) / den
            if np.isfinite(star) and abs(star) < self.xi_cap:
                cands.insert(0, star)
        vals = [tau2(c) for c in cands]
        best = int(np.nanargmin(vals))
        # prefer the unit step unless another candidate is clearly better
        if vals[cands.index(1.0)] <= vals[best] * (1.0 + 1e-9):
            best = cands.index(1.0)
        xi = cands[best]
        if xi == self.xi_cap:
            msg = f"iteration {t}: optimal step unbounded, capped at {self.xi_cap:g}"
            # the cap tends to repeat every iteration once it is hit; log it once
            (logger.debug if self.warnings else logger.warning)(msg)
            self.warnings.append(msg)
        return float(xi)

    def tau_cross(self, t: int, s: int, vtab: np.ndarray) -> float:
        """Input-error cross-covariance ``tau^2_{t,s}`` (1-based iterations)."""
        sp = self.spectral
        at, bs = self.vartheta[t - 1], self.vartheta[s - 1]
        lt = t - 1 - np.arange(t)
        ls = s - 1 - np.arange(s)
        kern = self.sigma_w2 * sp.w_scaled[lt[:, None] + ls[None, :]] + vtab[:t, :s] * sp.wbar_scaled[np.ix_(lt, ls)]
        return float(at @ kern @ bs) / (self.eps[t - 1] * self.eps[s - 1])
