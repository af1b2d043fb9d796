"""scikit-learn style wrappers around the solvers.

``fit(H, y)`` treats the measurement matrix as the design matrix and stores
the recovered signal in ``coef_``; ``predict(H)`` returns ``H @ coef_``.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import InvalidArgumentError
from .model import BernoulliGaussian, Discrete, ProblemInstance
from .solve import SolverConfig, run_solver

__all__ = [
    "IstaRegressor",
    "FistaRegressor",
    "AmpLassoRegressor",
    "BayesAmpRegressor",
    "OampRegressor",
    "VampRegressor",
    "MampRegressor",
]


class _MessagePassingRegressor(RegressorMixin, BaseEstimator):
    _algorithm: str = ""

    def _solver_config(self) -> SolverConfig:
        raise NotImplementedError

    def _prior(self):
        return None

    def _noise_var(self) -> float:
        return 1.0

    def fit(self, X, y):
        """Recover the signal from measurements ``y`` of the matrix ``X``.

        Returns
        -------
        self
            With ``coef_``, ``n_iter_``, ``status_`` and ``trace_`` set.
        """
        X, y = check_X_y(X, y, y_numeric=True, dtype=float)
        inst = ProblemInstance(H=np.array(X), y=np.array(y), sigma_w2=self._noise_var())
        trace = run_solver(inst, self._solver_config(), self._prior())
        self.trace_ = trace
        self.coef_ = np.array(trace.final_estimate)
        self.n_iter_ = len(trace)
        self.status_ = trace.status.value
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_


class _LassoMixin:
    def _solver_config(self) -> SolverConfig:
        return SolverConfig(
            self._algorithm,
            max_iters=self.max_iter,
            lam=self.lam,
            step_size=getattr(self, "step_size", 1.0),
            stop_tol=self.tol,
        )


class IstaRegressor(_LassoMixin, _MessagePassingRegressor):
    """Iterative soft thresholding for ``1/2 ||y - X b||^2 + lam ||b||_1``."""

    _algorithm = "ISTA"

    def __init__(self, lam: float = 0.05, step_size: float = 0.35, max_iter: int = 500, tol: float = 1e-8):
        self.lam = lam
        self.step_size = step_size
        self.max_iter = max_iter
        self.tol = tol


class FistaRegressor(_LassoMixin, _MessagePassingRegressor):
    """Accelerated iterative soft thresholding."""

    _algorithm = "FISTA"

    def __init__(self, lam: float = 0.05, step_size: float = 0.2, max_iter: int = 500, tol: float = 1e-8):
        self.lam = lam
        self.step_size = step_size
        self.max_iter = max_iter
        self.tol = tol


class AmpLassoRegressor(_LassoMixin, _MessagePassingRegressor):
    """AMP with an adaptive soft threshold for the LASSO objective."""

    _algorithm = "AmpLasso"

    def __init__(self, lam: float = 0.05, max_iter: int = 100, tol: float = 1e-8):
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol


class _BayesMixin:
    def _prior(self):
        if not isinstance(self.prior, (BernoulliGaussian, Discrete)):
            raise InvalidArgumentError("prior must be a BernoulliGaussian or Discrete instance")
        return self.prior

    def _noise_var(self) -> float:
        if self.noise_var is None or not self.noise_var > 0:
            raise InvalidArgumentError("noise_var must be > 0")
        return float(self.noise_var)


class BayesAmpRegressor(_BayesMixin, _MessagePassingRegressor):
    """Bayes-optimal AMP for a known prior and noise variance."""

    _algorithm = "BayesAmp"

    def __init__(self, prior=None, noise_var: Optional[float] = None, max_iter: int = 50, tol: float = 1e-8):
        self.prior = prior
        self.noise_var = noise_var
        self.max_iter = max_iter
        self.tol = tol

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(self._algorithm, max_iters=self.max_iter, stop_tol=self.tol)


class OampRegressor(_BayesMixin, _MessagePassingRegressor):
    """Orthogonal AMP with a de-correlated linear stage."""

    _algorithm = "OAMP"

    def __init__(
        self, prior=None, noise_var: Optional[float] = None, w_choice: str = "LMMSE", max_iter: int = 50, tol: float = 1e-8
    ):
        self.prior = prior
        self.noise_var = noise_var
        self.w_choice = w_choice
        self.max_iter = max_iter
        self.tol = tol

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(self._algorithm, max_iters=self.max_iter, stop_tol=self.tol, w_choice=self.w_choice)


class VampRegressor(_BayesMixin, _MessagePassingRegressor):
    """Vector AMP."""

    _algorithm = "VAMP"

    def __init__(self, prior=None, noise_var: Optional[float] = None, max_iter: int = 50, tol: float = 1e-8):
        self.prior = prior
        self.noise_var = noise_var
        self.max_iter = max_iter
        self.tol = tol

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(self._algorithm, max_iters=self.max_iter, stop_tol=self.tol)


class MampRegressor(_BayesMixin, _MessagePassingRegressor):
    """Memory AMP; ``damping`` is ``(beta1, beta2)``."""

    _algorithm = "MAMP"

    def __init__(
        self,
        prior=None,
        noise_var: Optional[float] = None,
        damping: tuple = (0.7, 0.8),
        max_iter: int = 100,
        tol: float = 1e-8,
    ):
        self.prior = prior
        self.noise_var = noise_var
        self.damping = damping
        self.max_iter = max_iter
        self.tol = tol

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(self._algorithm, max_iters=self.max_iter, stop_tol=self.tol, damping=tuple(self.damping))
