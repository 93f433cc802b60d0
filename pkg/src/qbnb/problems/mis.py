"""Maximum independent set by LP-relaxation branch and bound, with triangle cuts."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..solvers import CutConfig
from .base import SCALE, InstanceError, ProblemTree
from .simplex import simplex_lp

FRAC_TOL = 1e-6


@dataclass
class MisInstance:
    n: int
    edges: list
    p: float = None
    seed: int = None
    adj: list = field(init=False, repr=False)

    def __post_init__(self):
        self.edges = sorted({(min(u, v), max(u, v)) for u, v in self.edges})
        self.adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"bad edge {(u, v)}")
            self.adj[u].add(v)
            self.adj[v].add(u)

    def triangles(self):
        adj = self.adj
        return [(u, v, w) for u, v in self.edges for w in sorted(adj[u] & adj[v]) if w > v]


def gen_mis(n, seed, p=0.8):
    if n < 1:
        raise InstanceError("n must be positive")
    if not 0 <= p <= 1:
        raise InstanceError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    draws = rng.random((n, n))
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if draws[i, j] < p]
    return MisInstance(n, edges, p, seed)


class _Node:
    __slots__ = ("inc", "exc", "value", "x", "cost", "var")

    def __init__(self, inc, exc, value, x, cost, var):
        self.inc = inc
        self.exc = exc
        self.value = value  # LP upper bound on the set size
        self.x = x          # dict vertex -> LP value on free vertices
        self.cost = cost
        self.var = var      # branching vertex, None at a leaf


class MisTree(ProblemTree):
    """Children of a node with fractional LP optimum: include then exclude
    the most fractional vertex (ties by lower index).  A node whose LP is
    integral is a leaf holding that independent set.

    ``cuts`` are triangles added to every node LP.  With ``local_cuts`` each
    node also separates violated triangles among its free vertices and
    re-solves until none remain.
    """

    def __init__(self, inst, cuts=(), local_cuts=False, scale=SCALE):
        self.inst = inst
        self.cuts = tuple(sorted(set(tuple(sorted(c)) for c in cuts)))
        self.local_cuts = local_cuts
        self.scale = scale
        n = inst.n
        self.depth_bound = n
        self.size_bound = 2 ** (n + 1) - 1
        self.offset = n * scale + 1
        self.c_max = self.offset
        self._tri = inst.triangles()
        self.lp_calls = 0
        super().__init__()

    def _solve(self, free, cuts):
        idx = {v: i for i, v in enumerate(free)}
        rows = [(idx[u], idx[v]) for u, v in self.inst.edges if u in idx and v in idx]
        rows += [tuple(idx[v] for v in c) for c in cuts if all(v in idx for v in c)]
        A = np.zeros((len(rows), len(free)))
        for r, cols in enumerate(rows):
            A[r, list(cols)] = 1.0
        self.lp_calls += 1
        res = simplex_lp(-np.ones(len(free)), A, np.ones(len(rows)),
                         bounds=(np.zeros(len(free)), np.ones(len(free))))
        return -res.value, {v: float(res.x[i]) for v, i in idx.items()}

    def _violated(self, x):
        """Most violated triangle among ``x``'s vertices, ties by lower triangle."""
        best, arg = 1 + FRAC_TOL, None
        for t in self._tri:
            if all(v in x for v in t):
                s = x[t[0]] + x[t[1]] + x[t[2]]
                if s > best + 1e-12:
                    best, arg = s, t
        return arg

    def _make(self, inc, exc):
        free = [v for v in range(self.inst.n) if v not in inc and v not in exc]
        cuts = list(self.cuts)
        if free:
            val, x = self._solve(free, cuts)
            while self.local_cuts:
                t = self._violated(x)
                if t is None:
                    break
                cuts.append(t)
                val, x = self._solve(free, cuts)
        else:
            val, x = 0.0, {}
        frac = [(abs(x[v] - 0.5), v) for v in free if FRAC_TOL < x[v] < 1 - FRAC_TOL]
        var = min(frac)[1] if frac else None
        ub = len(inc) + val
        cost = self.offset - int(np.floor(ub * self.scale + 0.5))
        return _Node(inc, exc, ub, x, cost, var)

    def _root_state(self):
        return self._make(frozenset(), frozenset())

    def _children(self, path, st):
        v = st.var
        if v is None:
            return []
        adj = self.inst.adj[v]
        return [self._make(st.inc | {v}, st.exc | (adj - st.inc)), self._make(st.inc, st.exc | {v})]

    def independent_set(self, node):
        st = self.state(node)
        return sorted(st.inc | {v for v, xv in st.x.items() if xv > 0.5})

    def value(self, node):
        return len(self.independent_set(node))

    def violated_cut(self, node):
        return self._violated(self.state(node).x)


def mis_tree(inst, cuts=(), local_cuts=False, scale=SCALE):
    t = MisTree(inst, cuts, local_cuts, scale)
    return t, t.local_hcost()


def triangle_cuts(inst, p=1, scale=SCALE):
    """Global triangle cuts for :func:`qbnb.solvers.iqbc`."""
    return CutConfig(cp=lambda tree, node: tree.violated_cut(node),
                     apply=lambda cuts: MisTree(inst, cuts, scale=scale), p=p)


def mis_exhaustive(inst):
    """Size and lexicographically first vertex set of a maximum independent set."""
    adj = inst.adj
    best = []

    def grow(cur, cand):
        nonlocal best
        if len(cur) + len(cand) <= len(best):
            return
        if not cand:
            best = list(cur)
            return
        v = cand[0]
        grow(cur + [v], [u for u in cand[1:] if u not in adj[v]])
        grow(cur, cand[1:])

    grow([], list(range(inst.n)))
    return len(best), sorted(best)


def is_independent(inst, vertices):
    return all(v not in inst.adj[u] for u, v in itertools.combinations(vertices, 2))
