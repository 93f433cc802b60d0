"""Cardinality-constrained mean-variance portfolio with integer lots.

minimize   q x'Sigma x - mu'x
subject to price @ x = budget,  sum(z) = k,
           l_i z_i <= x_i <= u_i z_i,  price_i x_i <= cap,
           x_i integer for every asset but the last (which is continuous).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .base import SCALE, InstanceError, ProblemTree
from .frank_wolfe import frank_wolfe_qp
from .simplex import InfeasibleError, simplex_lp

TOL = 1e-9


@dataclass
class PortfolioInstance:
    n: int
    mu: np.ndarray
    Sigma: np.ndarray
    price: np.ndarray
    budget: float
    q: float
    k: int
    cap: float
    lots: np.ndarray      # max lots for the integer assets (length n - 1)
    cont_min: float       # minimum holding of the continuous asset
    seed: int = None

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.Sigma = np.asarray(self.Sigma, dtype=float)
        self.price = np.asarray(self.price, dtype=float)
        self.lots = np.asarray(self.lots, dtype=int)
        n = self.n
        if n < 2 or self.mu.shape != (n,) or self.Sigma.shape != (n, n) or self.price.shape != (n,):
            raise InstanceError("inconsistent portfolio dimensions")
        if self.lots.shape != (n - 1,) or np.any(self.lots < 1):
            raise InstanceError("every integer asset needs at least one lot")
        if not 1 <= self.k <= n:
            raise InstanceError("cardinality must lie in [1, n]")
        if np.any(self.price <= 0) or self.budget <= 0 or self.cap <= 0:
            raise InstanceError("prices, budget and cap must be positive")
        if np.min(np.linalg.eigvalsh((self.Sigma + self.Sigma.T) / 2)) < -1e-9:
            raise InstanceError("covariance must be positive semidefinite")

    @property
    def upper(self):
        """Upper bound on units held, per asset."""
        cap_units = self.cap / self.price
        ub = np.empty(self.n)
        ub[:-1] = np.minimum(self.lots, np.floor(cap_units[:-1] + 1e-9))
        ub[-1] = cap_units[-1]
        return ub

    @property
    def lower(self):
        lb = np.ones(self.n)
        lb[-1] = self.cont_min
        return lb

    def objective(self, x):
        x = np.asarray(x, dtype=float)
        return float(self.q * x @ self.Sigma @ x - self.mu @ x)


def gen_portfolio(n, seed, cardinality=None, cap_fraction=None, max_lots=3, q=0.05,
                  budget=100.0, attempts=100):
    """Random instance; resamples (deterministically) until one is feasible.

    Feasibility is confirmed by enumeration when n <= 8.
    """
    if n < 2:
        raise InstanceError("portfolio needs at least two assets")
    k = n // 2 if cardinality is None else cardinality
    if not 1 <= k <= n:
        raise InstanceError("cardinality must lie in [1, n]")
    frac = max(0.1, min(1.0, 2.0 / k)) if cap_fraction is None else cap_fraction
    if frac * k < 1:
        raise InstanceError("cap too small for the budget at this cardinality")
    cap = frac * budget
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        price = cap * rng.uniform(0.25, 0.9, n)
        rate = rng.uniform(0.02, 0.15, n)
        G = rng.standard_normal((n, n))
        Sr = 0.04 * (G.T @ G) / n + 0.01 * np.eye(n)
        D = np.diag(price)
        inst = PortfolioInstance(
            n=n, mu=price * rate, Sigma=D @ Sr @ D, price=price, budget=budget, q=q, k=k,
            cap=cap, lots=np.full(n - 1, max_lots), cont_min=0.01 * cap / price[-1], seed=seed)
        if n > 8 or portfolio_exhaustive(inst)[0] is not None:
            return inst
    raise InstanceError("no feasible instance found for these parameters")


class _Node:
    __slots__ = ("z", "lo", "hi", "cost", "bound", "x", "split", "dead")

    def __init__(self, z, lo, hi):
        self.z, self.lo, self.hi = z, lo, hi
        self.cost = None
        self.bound = None
        self.x = None
        self.split = None  # ("z", i) or ("lot", i, c), None at a leaf
        self.dead = False


class PortfolioTree(ProblemTree):
    """Branch on inclusion z (most fractional, else first unfixed: z=0 child
    first), then on lots of the most fractional integer asset
    (x_i <= c child first, then x_i >= c + 1).

    Node costs are the Frank-Wolfe lower bound of the continuous relaxation,
    shifted by the root bound and quantized at ``scale``.  A leaf fixes every
    z and lot; the continuous asset then takes the remaining budget, and a
    leaf where that is out of range is dead with cost ``c_max``.
    """

    def __init__(self, inst, scale=SCALE, fw_iters=60, fw_tol=1e-7):
        self.inst = inst
        self.scale = scale
        self.fw_iters = fw_iters
        self.fw_tol = fw_tol
        n = inst.n
        self.ub = inst.upper
        self.lb = inst.lower
        self.depth_bound = n + int(np.sum(np.maximum(self.ub[:-1] - 1, 0)))
        self.size_bound = 2 ** (self.depth_bound + 1) - 1
        Q = inst.q * inst.Sigma
        self._f_hi = float(self.ub @ np.abs(Q) @ self.ub + np.abs(inst.mu) @ self.ub)
        self.fw_calls = 0
        self._f_lo = None
        root = _Node((None,) * n, tuple([0] * (n - 1)), tuple(int(u) for u in self.ub[:-1]))
        self._relax(root)
        if root.dead:
            raise InstanceError("relaxation infeasible at the root")
        self._f_lo = root.bound
        self.c_max = self._q(self._f_hi + abs(self._f_lo)) + 1
        root.cost = 1
        self._root = root
        super().__init__()

    def _q(self, v):
        # values a hair below the root bound are rounding noise
        return max(1, int(math.floor((v - self._f_lo) * self.scale + 1e-9)) + 1)

    def _root_state(self):
        return self._root

    def _polytope(self, st):
        inst, n = self.inst, self.inst.n
        xlo = np.zeros(n)
        xhi = self.ub.copy()
        xlo[:-1] = st.lo
        xhi[:-1] = st.hi
        zlo = np.array([0.0 if z is None else z for z in st.z])
        zhi = np.array([1.0 if z is None else z for z in st.z])
        A_ub = np.zeros((2 * n, 2 * n))
        for i in range(n):
            A_ub[i, i], A_ub[i, n + i] = 1.0, -self.ub[i]
            A_ub[n + i, i], A_ub[n + i, n + i] = -1.0, self.lb[i]
        A_eq = np.zeros((2, 2 * n))
        A_eq[0, :n] = inst.price
        A_eq[1, n:] = 1.0
        b_eq = np.array([inst.budget, inst.k])
        bounds = (np.concatenate([xlo, zlo]), np.concatenate([xhi, zhi]))
        b_ub = np.zeros(2 * n)
        return lambda g: simplex_lp(g, A_ub, b_ub, A_eq, b_eq, bounds).x

    def _relax(self, st):
        inst, n = self.inst, self.inst.n
        lp = self._polytope(st)
        Sig = np.zeros((2 * n, 2 * n))
        Sig[:n, :n] = inst.Sigma
        mu = np.concatenate([inst.mu, np.zeros(n)])
        try:
            res = frank_wolfe_qp(Sig, mu, inst.q, lp, iters=self.fw_iters, tol=self.fw_tol)
        except InfeasibleError:
            st.dead = True
            return
        self.fw_calls += 1
        st.bound = res.lower_bound
        st.x = res.x

    def _leaf_x(self, st):
        inst = self.inst
        x = np.zeros(inst.n)
        x[:-1] = st.lo
        rest = (inst.budget - inst.price[:-1] @ x[:-1]) / inst.price[-1]
        if st.z[-1] == 1:
            if rest < self.lb[-1] - 1e-9 or rest > self.ub[-1] + 1e-9:
                return None
        elif abs(rest) > 1e-9:
            return None
        x[-1] = max(rest, 0.0)
        return x

    def _finish(self, st):
        """Fill in cost and split of a freshly created child."""
        n = self.inst.n
        fixed = all(z is not None for z in st.z) and all(a == b for a, b in zip(st.lo, st.hi))
        if fixed:
            x = self._leaf_x(st)
            if x is None or sum(st.z) != self.inst.k:
                st.dead, st.cost = True, self.c_max
            else:
                st.x = x
                st.bound = self.inst.objective(x)
                st.cost = min(self._q(st.bound), self.c_max - 1)
            return st
        self._relax(st)
        if st.dead:
            st.cost = self.c_max
            return st
        st.cost = min(self._q(st.bound), self.c_max)
        return st

    def _split(self, st):
        n = self.inst.n
        free = [i for i in range(n) if st.z[i] is None]
        if free:
            zs = st.x[n:]
            frac = [(abs(zs[i] - 0.5), i) for i in free if TOL < zs[i] < 1 - TOL]
            return ("z", min(frac)[1] if frac else free[0])
        open_ = [i for i in range(n - 1) if st.lo[i] < st.hi[i]]
        best = None
        for i in open_:
            f = st.x[i] - math.floor(st.x[i])
            key = (-min(f, 1 - f), i)
            if best is None or key < best[0]:
                best = (key, i)
        i = best[1]
        c = min(max(int(math.floor(st.x[i] + 1e-9)), st.lo[i]), st.hi[i] - 1)
        return ("lot", i, c)

    def _children(self, path, st):
        if st.dead or (all(z is not None for z in st.z) and st.lo == st.hi):
            return []
        kind = self._split(st)
        kids = []
        if kind[0] == "z":
            i = kind[1]
            for v in (0, 1):
                z = list(st.z)
                z[i] = v
                lo, hi = list(st.lo), list(st.hi)
                if i < self.inst.n - 1:
                    if v == 0:
                        lo[i] = hi[i] = 0
                    else:
                        lo[i] = max(lo[i], 1)
                kids.append(_Node(tuple(z), tuple(lo), tuple(hi)))
        else:
            _, i, c = kind
            hi = list(st.hi)
            hi[i] = c
            lo = list(st.lo)
            lo[i] = c + 1
            kids.append(_Node(st.z, st.lo, tuple(hi)))
            kids.append(_Node(st.z, tuple(lo), st.hi))
        return [self._finish(k) for k in kids]

    def holdings(self, node):
        st = self.state(node)
        return None if st.dead or self.branch(node) else st.x

    def value(self, node):
        x = self.holdings(node)
        return None if x is None else self.inst.objective(x)


def portfolio_tree(inst, scale=SCALE, fw_iters=60):
    t = PortfolioTree(inst, scale, fw_iters)
    return t, t.local_hcost()


def portfolio_exhaustive(inst):
    """Best objective and holdings over every feasible (z, lots) choice."""
    n = inst.n
    ub = inst.upper
    best, arg = None, None
    for held in itertools.combinations(range(n), inst.k):
        ints = [i for i in held if i < n - 1]
        cont = (n - 1) in held
        ranges = [range(1, int(ub[i]) + 1) for i in ints]
        for lots in itertools.product(*ranges):
            x = np.zeros(n)
            x[ints] = lots
            rest = (inst.budget - inst.price[:-1] @ x[:-1]) / inst.price[-1]
            if cont:
                if rest < inst.cont_min - 1e-9 or rest > ub[-1] + 1e-9:
                    continue
                x[-1] = rest
            elif abs(rest) > 1e-9:
                continue
            v = inst.objective(x)
            if best is None or v < best:
                best, arg = v, x
    return best, arg
