"""The general two-sided recursion underlying AMP's state evolution."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..exceptions import InvalidArgumentError
from ..model import ProblemInstance
from ._base import check_instance

__all__ = ["GeneralTrace", "run_general_recursion"]

#: ``f(t, h, x) -> (q, dq/dh)`` and ``g(t, b, n) -> (m, dm/db)``.
ScalarMap = Callable[[int, np.ndarray, np.ndarray], tuple]


@dataclass
class GeneralTrace:
    """Sequences of the recursion; ``h[k]`` is ``h^(k+1)``, all others start at ``t = 0``."""

    h: list = field(default_factory=list)
    b: list = field(default_factory=list)
    q: list = field(default_factory=list)
    m: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    lam: list = field(default_factory=list)


def run_general_recursion(
    instance: ProblemInstance,
    f: ScalarMap,
    g: ScalarMap,
    iters: int,
    h0: Optional[np.ndarray] = None,
) -> GeneralTrace:
    """Run, for ``t = 0 .. iters - 1``::

        q^(t)   = f_t(h^(t), x)
        b^(t)   = H q^(t) - lam_t m^(t-1),    lam_t = <f_t'> / alpha
        m^(t)   = g_t(b^(t), n)
        h^(t+1) = H^T m^(t) - xi_t q^(t),     xi_t = <g_t'>

    with ``m^(-1) = 0`` and ``h^(0) = h0`` (zeros by default). Needs the
    instance's ground truth ``x`` and noise ``n``.
    """
    check_instance(instance)
    if instance.x is None or instance.noise is None:
        raise InvalidArgumentError("the general recursion needs the instance's x and noise")
    if iters < 1:
        raise InvalidArgumentError("iters must be >= 1")
    H, x, noise, alpha = instance.H, instance.x, instance.noise, instance.alpha
    h = np.zeros(instance.n) if h0 is None else np.asarray(h0, dtype=float)
    m_prev = np.zeros(instance.m)
    out = GeneralTrace()
    for t in range(iters):
        q, dq = f(t, h, x)
        lam = float(np.mean(dq)) / alpha
        b = H @ q - lam * m_prev
        m, dm = g(t, b, noise)
        xi = float(np.mean(dm))
        h = H.T @ m - xi * q
        out.q.append(q)
        out.b.append(b)
        out.m.append(m)
        out.h.append(h)
        out.xi.append(xi)
        out.lam.append(lam)
        m_prev = m
    return out
