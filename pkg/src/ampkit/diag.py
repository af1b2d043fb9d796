"""Statistical diagnostics for solver traces.

Gaussianity of denoiser input errors, normalized inner products between
error vectors, a finite-difference check of the divergence-free wrapper, the
lock-step OAMP/VAMP comparison and a plateau detector for NMSE curves.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .denoise import divergence_free, mmse_denoise
from .exceptions import DegenerateSampleError, InvalidArgumentError
from .model import PriorSpec, ProblemInstance
from .solve import SolverConfig, run_oamp, run_vamp

__all__ = [
    "KS_C_1PCT",
    "GaussianityReport",
    "gaussianity",
    "orthogonality_report",
    "trace_orthogonality",
    "divergence_free_derivative",
    "equivalence_check",
    "plateau_iteration",
]

#: Asymptotic Kolmogorov-Smirnov constant: reject at 1% when ``sqrt(n) D > 1.628``.
KS_C_1PCT = 1.628

MIN_SAMPLE = 30


@dataclass(frozen=True)
class GaussianityReport:
    """KS statistic against ``N(0, 1)`` and QQ pairs of a standardized sample."""

    ks_statistic: float
    ks_critical_1pct: float
    qq_points: np.ndarray
    standardized: bool = True

    @property
    def passed(self) -> bool:
        return self.ks_statistic <= self.ks_critical_1pct

    def to_dict(self) -> dict:
        out = asdict(self)
        out["qq_points"] = self.qq_points.tolist()
        out["passed"] = self.passed
        return out


def gaussianity(error) -> GaussianityReport:
    """Test whether ``error`` looks Gaussian.

    The sample is standardized by its own mean and standard deviation, then
    compared with ``N(0, 1)`` by a one-sample KS test. QQ pairs use the
    plotting positions ``(k - 0.5) / n``.

    Raises
    ------
    InvalidArgumentError
        Fewer than 30 samples or non-finite entries.
    DegenerateSampleError
        Zero sample variance.
    """
    e = np.asarray(error, dtype=float).ravel()
    if e.size < MIN_SAMPLE:
        raise InvalidArgumentError(f"need at least {MIN_SAMPLE} samples, got {e.size}")
    if not np.all(np.isfinite(e)):
        raise InvalidArgumentError("sample has non-finite entries")
    sd = e.std()
    if not sd > 0 or sd <= 1e-14 * max(np.abs(e).max(), 1e-300):
        raise DegenerateSampleError("sample has zero variance")
    z = (e - e.mean()) / sd
    n = z.size
    ks = float(stats.kstest(z, "norm").statistic)
    theo = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    qq = np.column_stack([theo, np.sort(z)])
    return GaussianityReport(ks_statistic=ks, ks_critical_1pct=KS_C_1PCT / np.sqrt(n), qq_points=qq)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.sqrt(np.mean(a * a)), np.sqrt(np.mean(b * b))
    if na == 0 or nb == 0:
        return 0.0
    return float(np.mean(a * b) / (na * nb))


def orthogonality_report(h, q_history: Sequence, x) -> list:
    """Normalized inner products ``[h.x, h.q_0, h.q_1, ...]``.

    Each entry is ``(a^T b / N) / (rms(a) rms(b))`` so the values are scale
    free; a zero vector contributes 0.
    """
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float)
    qs = [np.asarray(q, dtype=float) for q in q_history]
    if x.shape != h.shape or any(q.shape != h.shape for q in qs):
        raise InvalidArgumentError("all vectors must have the same length")
    return [_cosine(h, x)] + [_cosine(h, q) for q in qs]


def trace_orthogonality(trace, x, iters: Optional[int] = None) -> list:
    """Per-iteration orthogonality rows of an OAMP or MAMP trace.

    With ``h_t = r_t - x`` the denoiser input error of iteration ``t`` and
    ``q_i = x_i - x`` the error of the estimate the linear stage consumed at
    iteration ``i`` (``x_1 = 0``), row ``t`` is
    :func:`orthogonality_report` of ``h_t`` against ``q_t`` for OAMP and
    against ``q_1 .. q_t`` for MAMP (whose linear stage uses every past
    estimate). The first entry of each row is always the product with ``x``.
    """
    if trace.algorithm not in ("OAMP", "MAMP"):
        raise InvalidArgumentError("orthogonality rows are defined for OAMP and MAMP traces")
    x = np.asarray(x, dtype=float)
    fed = [np.zeros_like(x)] + list(trace.extras.get("x_df", []))
    k = len(trace) if iters is None else min(iters, len(trace))
    rows = []
    for t in range(k):
        r = trace.inputs[t]
        if r is None or not np.all(np.isfinite(r)):
            break
        qs = [fed[t] - x] if trace.algorithm == "OAMP" else [fed[i] - x for i in range(t + 1)]
        rows.append(orthogonality_report(r - x, qs, x))
    return rows


def divergence_free_derivative(prior: PriorSpec, r, tau2: float, step: float = 1e-6) -> float:
    """Central finite-difference average derivative of the divergence-free denoiser.

    The scalar normalizers (posterior average variance and extrinsic
    variance) are frozen at ``(r, tau2)``, as they are inside the solvers;
    only the component-wise map is differentiated.
    """
    r = np.asarray(r, dtype=float)
    base = mmse_denoise(prior, r, tau2)
    v_mmse = base.avg_var

    def wrapped(u):
        res = mmse_denoise(prior, u, tau2)
        frozen = type(res)(mean=res.mean, var=np.full_like(res.var, v_mmse), deriv=res.deriv)
        return divergence_free(frozen, u, tau2)

    return float(np.mean((wrapped(r + step) - wrapped(r - step)) / (2.0 * step)))


def equivalence_check(
    instance: ProblemInstance, prior: PriorSpec, iters: int, reference: str = "vamp"
) -> float:
    """Largest lock-step deviation between LMMSE OAMP and VAMP.

    Both start from the zero estimate with variance equal to the prior second
    moment. Returns the maximum over common iterations of
    ``||r - r1|| / ||ref||`` and ``|tau2 - gamma1| / ref`` where ``ref`` is
    the VAMP quantity (``reference="vamp"``) or the OAMP one.
    """
    if reference not in ("vamp", "oamp"):
        raise InvalidArgumentError("reference must be 'vamp' or 'oamp'")
    cfg_o = SolverConfig("OAMP", max_iters=iters, stop_tol=0.0, w_choice="LMMSE")
    cfg_v = SolverConfig("VAMP", max_iters=iters, stop_tol=0.0)
    to = run_oamp(instance, cfg_o, prior)
    tv = run_vamp(instance, cfg_v, prior)
    k = min(len(to), len(tv))
    worst = 0.0
    for i in range(k):
        r, r1 = to.inputs[i], tv.inputs[i]
        t2, g1 = to.tau2[i], tv.tau2[i]
        if r is None or r1 is None:
            break
        ref_r, ref_t = (r1, g1) if reference == "vamp" else (r, t2)
        worst = max(worst, float(np.linalg.norm(r - r1) / np.linalg.norm(ref_r)), abs(t2 - g1) / abs(ref_t))
    return worst


def plateau_iteration(curve, delta: float = 0.02) -> Optional[int]:
    """First iteration (1-based) from which ``curve`` stays within ``delta`` of its last value.

    ``curve`` is an NMSE trajectory in dB. Returns ``None`` when the last
    value is not finite.
    """
    c = np.asarray(curve, dtype=float)
    if c.size == 0 or not np.isfinite(c[-1]):
        return None
    outside = np.flatnonzero(~(np.abs(c - c[-1]) <= delta))
    return 1 if outside.size == 0 else int(outside[-1]) + 2
