"""Configuration, trace container and the shared iteration bookkeeping."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import InvalidArgumentError
from ..model import ProblemInstance

logger = logging.getLogger(__name__)

#: NMSE above this value marks a run as diverged.
DIVERGENCE_NMSE = 1e6
#: Consecutive small relative changes needed to declare convergence.
PATIENCE = 3

ALGORITHMS = ("ISTA", "FISTA", "AmpLasso", "BayesAmp", "OAMP", "VAMP", "MAMP")
W_CHOICES = ("MF", "PseudoInverse", "LMMSE")


class Status(str, enum.Enum):
    RUNNING = "Running"
    CONVERGED = "Converged"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class SolverConfig:
    """Settings for one solver run.

    Parameters
    ----------
    algorithm : str
        One of ``ISTA, FISTA, AmpLasso, BayesAmp, OAMP, VAMP, MAMP``.
    max_iters : int
        Iteration budget.
    step_size : float
        Gradient step of ISTA/FISTA, in ``(0, 1]``.
    lam : float
        LASSO weight (ISTA, FISTA, AmpLasso).
    damping : tuple of float
        ``(beta1, beta2)`` for MAMP, each in ``(0, 1]``.
    stop_tol : float
        Relative-change threshold of the stopping rule; ``0`` disables it.
    w_choice : str
        Linear stage of OAMP: ``MF``, ``PseudoInverse`` or ``LMMSE``.
    label : str, optional
        Column name used by the experiment harness.
    """

    algorithm: str
    max_iters: int = 100
    step_size: float = 1.0
    lam: float = 0.0
    damping: tuple = (1.0, 1.0)
    stop_tol: float = 1e-8
    w_choice: str = "LMMSE"
    label: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgumentError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidArgumentError("max_iters must be a positive integer")
        if not (0.0 < self.step_size <= 1.0):
            raise InvalidArgumentError("step_size must lie in (0, 1]")
        if not self.lam >= 0:
            raise InvalidArgumentError("lambda must be >= 0")
        damping = tuple(float(b) for b in self.damping)
        if len(damping) != 2 or not all(0.0 < b <= 1.0 for b in damping):
            raise InvalidArgumentError("damping must be a pair in (0, 1]")
        object.__setattr__(self, "damping", damping)
        if not self.stop_tol >= 0:
            raise InvalidArgumentError("stop_tol must be >= 0")
        if self.w_choice not in W_CHOICES:
            raise InvalidArgumentError(f"w_choice must be one of {W_CHOICES}")

    @property
    def name(self) -> str:
        return self.label or self.algorithm


@dataclass
class SolverTrace:
    """Append-only per-iteration record of a solver run.

    Entry ``k`` of every list belongs to iteration ``k + 1``. ``estimates``
    holds the reported estimate of that iteration (the MMSE output for the
    Bayesian solvers), ``inputs`` the denoiser input and ``residuals`` the
    residual the linear stage consumed.

    ``status`` is ``Converged`` when the stopping rule fired (or the update
    became singular at its variance floor), ``Diverged`` on non-finite
    iterates or exploding NMSE, and stays ``Running`` when the iteration
    budget ran out first.
    """

    algorithm: str
    estimates: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    tau2: list = field(default_factory=list)
    v_hat: list = field(default_factory=list)
    nmse_db: list = field(default_factory=list)
    status: Status = Status.RUNNING
    warnings: list = field(default_factory=list)
    v_table: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.nmse_db)

    @property
    def final_estimate(self) -> Optional[np.ndarray]:
        return self.estimates[-1] if self.estimates else None

    def extra(self, key: str) -> list:
        return self.extras.setdefault(key, [])


class _Recorder:
    """Appends iterations to a trace and applies the stopping rule.

    The monitored quantity is the NMSE when the truth is known and the
    relative change of the estimate otherwise.
    """

    def __init__(self, instance: ProblemInstance, cfg: SolverConfig):
        self.instance = instance
        self.cfg = cfg
        self.trace = SolverTrace(algorithm=cfg.algorithm)
        self._x = instance.x
        self._power = float(self._x @ self._x) if self._x is not None else None
        self._prev = None
        self._prev_est = None
        self._calm = 0

    def warn(self, msg: str):
        self.trace.warnings.append(msg)
        logger.warning(msg)

    def stop(self, status: Status, msg: Optional[str] = None):
        self.trace.status = status
        if msg:
            self.warn(msg)

    def record(self, estimate, inputs=None, residual=None, tau2=None, v_hat=None, **extras) -> bool:
        """Append one iteration; return ``False`` once the run must stop."""
        tr = self.trace
        estimate = np.asarray(estimate, dtype=float)
        finite = np.all(np.isfinite(estimate))
        if self._x is not None and finite and self._power > 0:
            err = estimate - self._x
            val = float(err @ err) / self._power
        else:
            val = np.nan
        tr.estimates.append(estimate)
        tr.inputs.append(inputs)
        tr.residuals.append(residual)
        tr.tau2.append(tau2)
        tr.v_hat.append(v_hat)
        for k, v in extras.items():
            tr.extra(k).append(v)
        if not finite or (np.isfinite(val) and val > DIVERGENCE_NMSE):
            tr.nmse_db.append(np.nan)
            self.stop(Status.DIVERGED, f"iteration {len(tr.nmse_db)}: diverged")
            return False
        with np.errstate(divide="ignore"):
            tr.nmse_db.append(10.0 * np.log10(val) if np.isfinite(val) else np.nan)

        if self._x is not None and self._power > 0:
            monitor = val
            change = abs(val - self._prev) / max(self._prev, 1e-300) if self._prev is not None else np.inf
            self._prev = monitor
        else:
            if self._prev_est is None:
                change = np.inf
            else:
                d = estimate - self._prev_est
                change = float(d @ d) / max(float(estimate @ estimate), 1e-300)
            self._prev_est = estimate
        self._calm = self._calm + 1 if change < self.cfg.stop_tol else 0
        if self._calm >= PATIENCE:
            self.stop(Status.CONVERGED)
            return False
        return len(tr.nmse_db) < self.cfg.max_iters

    def finish(self) -> SolverTrace:
        return self.trace


def check_instance(instance: ProblemInstance):
    if not isinstance(instance, ProblemInstance):
        raise InvalidArgumentError("instance must be a ProblemInstance")
