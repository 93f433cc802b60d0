"""Dense two-phase tableau simplex with Bland's rule."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9


class InfeasibleError(Exception):
    pass


class UnboundedError(Exception):
    pass


@dataclass
class LPResult:
    value: float
    x: np.ndarray
    pivots: int


def _pivot(tab, r, c):
    tab[r] /= tab[r, c]
    col = tab[:, c].copy()
    col[r] = 0.0
    tab -= np.outer(col, tab[r])


def _run(tab, basis, ncols, max_pivots, pivots):
    """Minimize the objective in the last row over the first ``ncols`` columns."""
    m = len(basis)
    while True:
        red = tab[-1, :ncols]
        cand = np.nonzero(red < -TOL)[0]
        if cand.size == 0:
            return pivots
        c = int(cand[0])
        col = tab[:m, c]
        pos = np.nonzero(col > TOL)[0]
        if pos.size == 0:
            raise UnboundedError("objective unbounded below")
        ratios = tab[pos, -1] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + TOL]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(tab, r, c)
        basis[r] = c
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit reached")


def simplex_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None, max_pivots=10000):
    """Minimize c @ x subject to A_ub x <= b_ub, A_eq x = b_eq, lo <= x <= hi.

    ``bounds`` is a pair of arrays (lo, hi); the defaults are 0 and +inf.
    Raises InfeasibleError or UnboundedError.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=float).copy()
        hi = np.asarray(bounds[1], dtype=float).copy()
    if np.any(hi < lo - TOL):
        raise InfeasibleError("empty box")
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)

    # shift x = lo + y, y >= 0; finite upper bounds become rows
    b_ub = b_ub - A_ub @ lo
    b_eq = b_eq - A_eq @ lo
    fin = np.nonzero(np.isfinite(hi))[0]
    if fin.size:
        rows = np.zeros((fin.size, n))
        rows[np.arange(fin.size), fin] = 1.0
        A_ub = np.vstack([A_ub, rows])
        b_ub = np.concatenate([b_ub, (hi - lo)[fin]])
    m_ub, m_eq = len(b_ub), len(b_eq)
    m = m_ub + m_eq

    # columns: y (n) | slacks (m_ub) | artificials (as needed) | rhs
    A = np.zeros((m, n + m_ub))
    b = np.concatenate([b_ub, b_eq])
    A[:m_ub, :n] = A_ub
    A[m_ub:, :n] = A_eq
    A[np.arange(m_ub), n + np.arange(m_ub)] = 1.0
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    needs_art = [i for i in range(m) if i >= m_ub or neg[i]]
    k = len(needs_art)
    ncols = n + m_ub + k
    tab = np.zeros((m + 1, ncols + 1))
    tab[:m, : n + m_ub] = A
    tab[:m, -1] = b
    basis = [n + i for i in range(m_ub)] + [0] * m_eq
    for j, i in enumerate(needs_art):
        tab[i, n + m_ub + j] = 1.0
        basis[i] = n + m_ub + j
    pivots = 0
    if k:
        tab[-1, n + m_ub:ncols] = 1.0
        for i in needs_art:
            tab[-1] -= tab[i]
        pivots = _run(tab, basis, ncols, max_pivots, pivots)
        if tab[-1, -1] < -1e-7:
            raise InfeasibleError("no feasible point")
        # drive remaining artificials out of the basis
        for r in range(m):
            if basis[r] >= n + m_ub:
                cand = np.nonzero(np.abs(tab[r, : n + m_ub]) > TOL)[0]
                if cand.size:
                    _pivot(tab, r, int(cand[0]))
                    basis[r] = int(cand[0])
                    pivots += 1
        tab[:, n + m_ub:ncols] = 0.0
    tab[-1] = 0.0
    tab[-1, :n] = c
    for r in range(m):
        if basis[r] < n + m_ub:
            tab[-1] -= tab[-1, basis[r]] * tab[r]
    pivots = _run(tab, basis, n + m_ub, max_pivots, pivots)
    y = np.zeros(n + m_ub)
    for r in range(m):
        if basis[r] < n + m_ub:
            y[basis[r]] = tab[r, -1]
    x = lo + y[:n]
    return LPResult(float(c @ x), x, pivots)
