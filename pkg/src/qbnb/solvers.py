"""Incremental solvers: tree search, branch and bound, branch and cut.

Every solver doubles a pop budget 2^m, builds a certificate tree that is
guaranteed to contain the first 2^m pops of the classical explorer, and
queries it with the emulated primitives.
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable, Optional

from .heuristics import cost_based, reduce_to_local, total_order
from .primitives import DEFAULT_POLICY, qtminleaf, qtsearch
from .subtree import qsubtree
from .tree import OracleView, QueryLedger


def prepare(oracle, heuristic=None):
    """Lifted tree and tie-broken hcost shared by classical and quantum runs."""
    heuristic = heuristic or cost_based()
    lifted, local = reduce_to_local(heuristic, oracle)
    return lifted, total_order(local, lifted)


def default_m_cap(T):
    return math.ceil(math.log2(max(T, 1))) + 2


def _log_T(T):
    return max(1.0, math.log2(max(T, 2)))


@dataclass
class IterationRecord:
    m: int
    incumbent: Optional[int]
    bound1: int
    bound2: int
    best_bound: int
    gap: Optional[int]
    charge: float
    cuts: int = 0


@dataclass
class SolveResult:
    leaf: object
    cost: Optional[int]
    iterations: list = field(default_factory=list)
    ledger: QueryLedger = None
    lifted_leaf: object = None
    # the tree ``leaf`` belongs to (with any cuts found by iqbc)
    tree: object = None

    @property
    def m_final(self):
        return self.iterations[-1].m if self.iterations else None


_Front = namedtuple("_Front", "node")


class FrontierOracle(OracleView):
    """The certificate plus, as leaves, every child it truncated away."""

    def __init__(self, full, cert_oracle):
        super().__init__(full)
        self.cert = cert_oracle

    def branch(self, node):
        if type(node) is _Front:
            return []
        kept = self.cert.branch(node)
        kids = self.base.branch(node)
        if len(kept) == len(kids):
            return kept
        keep = {self.base.path(k) for k in kept}
        return [k if self.base.path(k) in keep else _Front(k) for k in kids]

    def cost(self, node):
        return self.base.cost(node.node if type(node) is _Front else node)

    def path(self, node):
        return self.base.path(node.node if type(node) is _Front else node)


class _ParentLeaves(OracleView):
    # branch_2: nodes whose children were truncated become leaves
    def __init__(self, full, cert_oracle):
        super().__init__(full)
        self.cert = cert_oracle

    def branch(self, node):
        kept = self.cert.branch(node)
        if len(kept) != len(self.base.branch(node)):
            return []
        return kept


def certificate_bounds(full, b1, d, c_max, size, dl, ledger, policy=DEFAULT_POLICY,
                       bound="frontier"):
    """Incumbent and bounds read off a certificate tree ``b1`` of ``full``.

    Returns ``(incumbent, incumbent_cost, bound1, bound2, best_bound)``; the
    incumbent is None when every certificate leaf is internal in ``full``.
    """
    cost = full.cost
    leaf1 = qtminleaf(b1, cost, d, c_max, size, dl, ledger, policy)
    bound1 = cost(leaf1)
    sentinel = c_max + 1

    def cost1(n):
        if not b1.branch(n) and full.branch(n):
            return sentinel
        return cost(n)

    inc = qtminleaf(b1, cost1, d, sentinel, size, dl, ledger, policy)
    inc_cost = cost1(inc)
    if inc_cost == sentinel:
        inc, inc_cost = None, None
    if bound == "paper":
        b2 = _ParentLeaves(full, b1)
        bound2 = cost(qtminleaf(b2, cost, d, c_max, size, dl, ledger, policy))
        best = min(bound1, bound2)
    elif bound == "frontier":
        fr = FrontierOracle(full, b1)
        bound2 = fr.cost(qtminleaf(fr, fr.cost, d, c_max, 2 * size + 1, dl, ledger, policy))
        best = bound2
    else:
        raise ValueError(f"unknown bound rule {bound!r}")
    return inc, inc_cost, bound1, bound2, best


def _bnb_round(lifted, hc, m, d, c_max, dl, ledger, policy, mode, bound):
    cert = qsubtree(lifted, hc, m, d, hc.h_max, dl, ledger, mode, policy)
    b1 = cert.oracle(lifted, hc)
    out = certificate_bounds(lifted, b1, d, c_max, 4 * 2 ** m, dl, ledger, policy, bound)
    return (cert, b1) + out


def iqbb(oracle, heuristic=None, eps=0, delta=0.1, ledger=None, policy=DEFAULT_POLICY, mode=None,
         bound="frontier", m_cap=None, prepared=None):
    """Incremental branch and bound; returns a SolveResult.

    ``bound`` selects the best-bound rule: ``"paper"`` takes the minimum of the
    cheapest certificate leaf and the cheapest node whose children were
    truncated; ``"frontier"`` takes the cheapest of the certificate's real
    leaves and the truncated children themselves.
    """
    ledger = ledger if ledger is not None else QueryLedger()
    lifted, hc = prepared or prepare(oracle, heuristic)
    T = oracle.size_bound
    d = lifted.depth_bound
    c_max = oracle.c_max
    m_cap = default_m_cap(T) if m_cap is None else m_cap
    dl = delta / (5 * _log_T(T))
    res = SolveResult(None, None, ledger=ledger, tree=oracle)
    for m in range(m_cap + 1):
        before = ledger.charged_quantum
        _, _, inc, inc_cost, b1, b2, best = _bnb_round(lifted, hc, m, d, c_max, dl, ledger,
                                                       policy, mode, bound)
        gap = inc_cost - best if inc is not None else None
        res.iterations.append(IterationRecord(m, inc_cost, b1, b2, best, gap,
                                              ledger.charged_quantum - before))
        if gap is not None and gap <= eps:
            res.leaf, res.cost, res.lifted_leaf = inc.node, inc_cost, inc
            return res
    raise RuntimeError("iqbb did not close the gap by m_cap")


def iqts(oracle, f, heuristic=None, delta=0.1, ledger=None, policy=DEFAULT_POLICY, mode=None,
         m_cap=None, prepared=None):
    """Incremental tree search for a node with f(node) true (None if absent)."""
    ledger = ledger if ledger is not None else QueryLedger()
    lifted, hc = prepared or prepare(oracle, heuristic)
    T = oracle.size_bound
    d = lifted.depth_bound
    m_cap = default_m_cap(T) if m_cap is None else m_cap
    dl = delta / (4 * _log_T(T))
    res = SolveResult(None, None, ledger=ledger, tree=oracle)
    for m in range(m_cap + 1):
        before = ledger.charged_quantum
        cert = qsubtree(lifted, hc, m, d, hc.h_max, dl, ledger, mode, policy)
        found = qtsearch(cert.oracle(lifted, hc), d, 4 * 2 ** m, lambda n: f(n.node), dl,
                         ledger, policy)
        res.iterations.append(IterationRecord(m, None, 0, 0, 0, None,
                                              ledger.charged_quantum - before))
        if found is not None:
            res.leaf, res.lifted_leaf = found.node, found
            return res
    return res


@dataclass
class CutConfig:
    """Global cutting planes for branch and cut.

    ``cp(oracle, node)`` names a cut violated at ``node`` (or None);
    ``apply(cuts)`` returns the tree of the problem with those cuts added.
    """

    cp: Callable
    apply: Callable
    p: int = 1


def iqbc(oracle, cuts: CutConfig, heuristic=None, eps=0, delta=0.1, ledger=None,
         policy=DEFAULT_POLICY, mode=None, bound="frontier", m_cap=None):
    """Incremental branch and cut.

    After each round whose gap is still open, up to ``p`` searches over the
    certificate look for nodes violating a not yet known global cut; the
    cuts found redefine the tree for the following rounds.  With p = 0 this
    is exactly :func:`iqbb`.
    """
    ledger = ledger if ledger is not None else QueryLedger()
    p = cuts.p if cuts is not None else 0
    T = oracle.size_bound
    m_cap = default_m_cap(T) if m_cap is None else m_cap
    dl = delta / (5 * _log_T(T))
    dcut = delta / (5 * max(p, 1) * _log_T(T))
    found_cuts = []
    current = oracle
    lifted, hc = prepare(current, heuristic)
    res = SolveResult(None, None, ledger=ledger, tree=oracle)
    for m in range(m_cap + 1):
        before = ledger.charged_quantum
        d = lifted.depth_bound
        _, b1, inc, inc_cost, bd1, bd2, best = _bnb_round(lifted, hc, m, d, current.c_max, dl,
                                                          ledger, policy, mode, bound)
        gap = inc_cost - best if inc is not None else None
        rec = IterationRecord(m, inc_cost, bd1, bd2, best, gap, 0.0, len(found_cuts))
        res.iterations.append(rec)
        if gap is not None and gap <= eps:
            rec.charge = ledger.charged_quantum - before
            res.leaf, res.cost, res.lifted_leaf = inc.node, inc_cost, inc
            res.tree = current
            return res
        new = []
        for _ in range(p):
            if len(found_cuts) + len(new) >= p:
                break
            known = set(found_cuts) | set(new)

            def marked(n, tree=current, known=known):
                c = cuts.cp(tree, n.node)
                return c is not None and c not in known

            hit = qtsearch(b1, d, 4 * 2 ** m, marked, dcut, ledger, policy)
            if hit is None:
                break
            new.append(cuts.cp(current, hit.node))
        if new:
            found_cuts.extend(new)
            current = cuts.apply(list(found_cuts))
            lifted, hc = prepare(current, heuristic)
        rec.charge = ledger.charged_quantum - before
    raise RuntimeError("iqbc did not close the gap by m_cap")
