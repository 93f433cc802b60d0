"""Frank-Wolfe for convex quadratics over a polytope given by an LP oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FWResult:
    value: float
    x: np.ndarray
    gap: float
    lower_bound: float
    iterations: int


def frank_wolfe_qp(Sigma, mu, q, lp, iters=100, tol=1e-6, x0=None):
    """Minimize f(x) = q x'Sigma x - mu'x over the polytope behind ``lp``.

    ``lp(g)`` must return a vertex minimizing g @ s.  ``lower_bound`` is the
    best value of f(x) - (Frank-Wolfe gap at x) seen, a valid lower bound on
    the optimum, and ``gap`` is the final value minus that bound.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    mu = np.asarray(mu, dtype=float)
    Q = q * Sigma

    def f(x):
        return float(x @ Q @ x - mu @ x)

    x = lp(-mu) if x0 is None else np.asarray(x0, dtype=float)
    lb = -np.inf
    gap = np.inf
    it = 0
    for it in range(1, iters + 1):
        g = 2 * Q @ x - mu
        s = lp(g)
        d = s - x
        gap = float(-(g @ d))
        fx = f(x)
        lb = max(lb, fx - gap)
        if gap <= tol:
            break
        curv = float(d @ Q @ d)
        step = 1.0 if curv <= 0 else min(1.0, gap / (2 * curv))
        x = x + step * d
    fx = f(x)
    lb = min(lb, fx)
    return FWResult(fx, x, fx - lb, lb, it)
