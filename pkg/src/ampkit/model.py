"""Problem synthesis for the standard linear model ``y = H x + n``.

Priors, measurement-matrix generators, noise and the ground-truth
:class:`ProblemInstance` consumed by the solvers and state-evolution engines.
Every generator is a pure function of its arguments and seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .exceptions import InvalidArgumentError, UnsupportedPriorError

__all__ = [
    "BernoulliGaussian",
    "Discrete",
    "LaplaceLasso",
    "PriorSpec",
    "qpsk_real",
    "IidGaussian",
    "Conditioned",
    "MatrixSpec",
    "ProblemInstance",
    "haar_orthogonal",
    "gen_iid_gaussian",
    "gen_conditioned",
    "conditioned_singular_values",
    "sample_prior",
    "synthesize",
    "snr_to_noise_var",
    "nmse",
    "nmse_db",
    "substreams",
]


# ---------------------------------------------------------------- priors ---


@dataclass(frozen=True)
class BernoulliGaussian:
    """Sparse law ``rho * N(mu, 1/rho) + (1 - rho) * delta_0``.

    The slab variance is ``1/rho`` so that ``E[X^2] = 1 + rho * mu^2``
    (unit power for ``mu = 0``).
    """

    rho: float
    mu: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise InvalidArgumentError(f"rho must lie in (0, 1], got {self.rho}")
        if not np.isfinite(self.mu):
            raise InvalidArgumentError("mu must be finite")

    @property
    def slab_var(self) -> float:
        return 1.0 / self.rho

    @property
    def second_moment(self) -> float:
        return self.rho * (self.mu**2 + self.slab_var)

    @property
    def mean(self) -> float:
        return self.rho * self.mu


@dataclass(frozen=True)
class Discrete:
    """Finite-alphabet law over distinct real ``levels``."""

    levels: tuple
    probs: tuple

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if levels.ndim != 1 or levels.size == 0 or levels.shape != probs.shape:
            raise InvalidArgumentError("levels and probs must be equal-length 1-D sequences")
        if not np.all(np.isfinite(levels)):
            raise InvalidArgumentError("levels must be finite")
        if np.unique(levels).size != levels.size:
            raise InvalidArgumentError("levels must be distinct")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError("probs must be non-negative and sum to 1")
        object.__setattr__(self, "levels", tuple(float(v) for v in levels))
        object.__setattr__(self, "probs", tuple(float(p) for p in probs))

    @property
    def second_moment(self) -> float:
        return float(np.dot(self.probs, np.square(self.levels)))

    @property
    def mean(self) -> float:
        return float(np.dot(self.probs, self.levels))


@dataclass(frozen=True)
class LaplaceLasso:
    """Marker for the LASSO (mismatched) setting; carries no sampling law."""

    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise InvalidArgumentError(f"lambda must be >= 0, got {self.lam}")


PriorSpec = Union[BernoulliGaussian, Discrete, LaplaceLasso]


def qpsk_real() -> Discrete:
    """Per-real-dimension QPSK alphabet ``{+-1/sqrt(2)}`` with equal weights."""
    a = 1.0 / np.sqrt(2.0)
    return Discrete(levels=(-a, a), probs=(0.5, 0.5))


# -------------------------------------------------------------- matrices ---


@dataclass(frozen=True)
class IidGaussian:
    m: int
    n: int


@dataclass(frozen=True)
class Conditioned:
    m: int
    n: int
    kappa: float


MatrixSpec = Union[IidGaussian, Conditioned]


def _check_dims(m, n):
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise InvalidArgumentError(f"dimensions must be positive integers, got ({m}, {n})")


def gen_iid_gaussian(m: int, n: int, seed: int) -> np.ndarray:
    """M x N matrix with IID ``N(0, 1/m)`` entries."""
    _check_dims(m, n)
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, n)) / np.sqrt(m)


def haar_orthogonal(n: int, rng: np.random.Generator, cols: Optional[int] = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix (or its first ``cols`` columns).

    QR of a Gaussian matrix with the signs of ``diag(R)`` folded into ``Q``.
    """
    cols = n if cols is None else cols
    g = rng.standard_normal((n, cols))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def conditioned_singular_values(m: int, n: int, kappa: float) -> np.ndarray:
    """Geometric singular values with ``max/min = kappa`` and ``sum s^2 = n``."""
    if not kappa >= 1:
        raise InvalidArgumentError(f"kappa must be >= 1, got {kappa}")
    exponents = np.arange(m) / max(m - 1, 1)
    s = kappa ** (-exponents)
    return s * np.sqrt(n / np.sum(s**2))


def gen_conditioned(m: int, n: int, kappa: float, seed: int) -> np.ndarray:
    """Unitarily-invariant ``H = U diag(s) V^T`` with condition number ``kappa``."""
    _check_dims(m, n)
    if m > n:
        raise InvalidArgumentError("conditioned matrices require m <= n")
    s = conditioned_singular_values(m, n, kappa)
    rng = np.random.default_rng(seed)
    u = haar_orthogonal(m, rng)
    v = haar_orthogonal(n, rng, cols=m)
    return (u * s) @ v.T


def _gen_matrix(spec: MatrixSpec, seed: int) -> np.ndarray:
    if isinstance(spec, IidGaussian):
        return gen_iid_gaussian(spec.m, spec.n, seed)
    if isinstance(spec, Conditioned):
        return gen_conditioned(spec.m, spec.n, spec.kappa, seed)
    raise InvalidArgumentError(f"unknown matrix spec {spec!r}")


# ---------------------------------------------------------------- signal ---


def sample_prior(prior: PriorSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` IID samples; ``seed`` may be an int or a Generator."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if isinstance(prior, BernoulliGaussian):
        active = rng.random(n) < prior.rho
        slab = prior.mu + rng.standard_normal(n) * np.sqrt(prior.slab_var)
        return np.where(active, slab, 0.0)
    if isinstance(prior, Discrete):
        return rng.choice(np.asarray(prior.levels), size=n, p=np.asarray(prior.probs))
    raise UnsupportedPriorError(f"cannot sample from {type(prior).__name__}")


# -------------------------------------------------------------- instance ---


@dataclass(frozen=True)
class ProblemInstance:
    """One recovery task. Arrays are made read-only on construction."""

    H: np.ndarray
    y: np.ndarray
    sigma_w2: float
    x: Optional[np.ndarray] = None
    noise: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.H.ndim != 2 or self.y.shape != (self.H.shape[0],):
            raise InvalidArgumentError("H must be M x N and y length M")
        if self.x is not None and self.x.shape != (self.H.shape[1],):
            raise InvalidArgumentError("x must have length N")
        if not self.sigma_w2 > 0:
            raise InvalidArgumentError("sigma_w2 must be > 0")
        for arr in (self.H, self.y, self.x, self.noise):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def alpha(self) -> float:
        return self.m / self.n


def substreams(seed: int, names=("matrix", "signal", "noise")) -> dict:
    """Expand one master seed into independent named integer sub-seeds."""
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: int(c.generate_state(1, dtype=np.uint64)[0]) for name, c in zip(names, children)}


def snr_to_noise_var(snr_db: float, complex_baseband: bool = False) -> float:
    """Per-real-dimension noise variance for ``SNR = 1 / sigma^2``.

    With ``complex_baseband`` the SNR refers to a complex noise of total
    variance ``sigma^2``, i.e. ``sigma^2 / 2`` on each real component.
    """
    var = 10.0 ** (-snr_db / 10.0)
    return var / 2.0 if complex_baseband else var


def synthesize(
    matrix: MatrixSpec, prior: PriorSpec, snr_db: float, seed: int, complex_baseband: bool = False
) -> ProblemInstance:
    """Build ``y = H x + n`` with ``n ~ N(0, snr_to_noise_var(snr_db, complex_baseband))``.

    A complex system with a real ``H`` splits into two independent real
    systems, so ``complex_baseband=True`` together with a per-real-dimension
    alphabet such as :func:`qpsk_real` reproduces one of them.
    """
    seeds = substreams(seed)
    H = _gen_matrix(matrix, seeds["matrix"])
    x = sample_prior(prior, H.shape[1], seeds["signal"])
    sigma_w2 = snr_to_noise_var(snr_db, complex_baseband)
    noise = np.random.default_rng(seeds["noise"]).standard_normal(H.shape[0]) * np.sqrt(sigma_w2)
    return ProblemInstance(H=H, y=H @ x + noise, sigma_w2=sigma_w2, x=x, noise=noise)


# ------------------------------------------------------------------ NMSE ---


def nmse(estimate, truth) -> float:
    """``||estimate - truth||^2 / ||truth||^2``."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise InvalidArgumentError("estimate and truth must have equal shapes")
    power = float(np.dot(truth, truth))
    if power == 0.0:
        raise InvalidArgumentError("truth must not be all-zero")
    diff = estimate - truth
    return float(np.dot(diff, diff)) / power


def nmse_db(estimate, truth) -> float:
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(nmse(estimate, truth)))
