"""Partial subtree generation: thresholds that certify the first 2^m pops.

The generator returns two hcost thresholds, one per child of the root, such
that the root plus the nodes of each child subtree below its threshold form
a tree of at most 4 * 2^m nodes containing the first 2^m nodes any best-first
explorer ranking by ``hcost`` would pop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .classical import first_k
from .primitives import DEFAULT_POLICY, MORE, EstimatorMode, qtminleaf, qtsize
from .tree import OracleView, PTrunc, QueryLedger, TruncCounter, TwoTrunc, trunc, walk

EPS = math.log(2) / 8


class InsufficientNodes(Exception):
    """The subtree has no more than k nodes."""


class NoneAboveThreshold(Exception):
    """No node in the subtree reaches the requested hcost."""


def kthcost(subroot, oracle, d, hcost, h_max, k, eps, delta, ledger, policy=DEFAULT_POLICY,
            mode=None, shadow=None):
    """Smallest threshold c with more than k nodes of the subtree below c.

    Binary search over [0, h_max + 1] driven by one-sided size estimates.
    """
    iters = max(1, math.ceil(math.log2(h_max + 2)))
    dl = delta / iters

    counter = TruncCounter(oracle, subroot, hcost, math.floor(k * (1 + eps) ** 2) + 1)

    def more(alpha):
        t = trunc(subroot, oracle, hcost, alpha)
        return qtsize(t, d, k, dl, eps, ledger, policy, mode, size=counter.size(alpha)) is MORE

    lo, hi = 0, h_max + 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if more(mid):
            hi = mid
        else:
            lo = mid
    if hi == h_max + 1 and not more(hi):
        if shadow is not None:
            shadow.append(("kthcost", subroot, k, eps, None))
        raise InsufficientNodes(f"subtree holds at most {k} nodes")
    if shadow is not None:
        shadow.append(("kthcost", subroot, k, eps, hi))
    return hi


def nextcost(subroot, oracle, d, hcost, h_max, T_max, c, delta, ledger, policy=DEFAULT_POLICY,
             shadow=None):
    """Least hcost >= c in the subtree, found as a minimum leaf of a ptrunc tree."""
    pt = PTrunc(oracle, subroot, hcost, c - 1)
    top = h_max + 1

    def leaf_cost(n):
        if pt.branch(n):
            return 0
        h = hcost(n)
        return h if h >= c else top

    leaf = qtminleaf(pt, leaf_cost, d, top, T_max, delta, ledger, policy)
    v = leaf_cost(leaf)
    # the subroot is never cut by ptrunc, so check it directly
    h0 = hcost(subroot)
    if h0 >= c:
        v = h0
    if shadow is not None:
        shadow.append(("nextcost", subroot, c, None, None if v == top else v))
    if v == top:
        raise NoneAboveThreshold(f"no node with hcost >= {c}")
    return v


@dataclass
class SubtreeGenState:
    current: int = 0
    m: list = field(default_factory=lambda: [0, 0])
    T: list = field(default_factory=lambda: [1, 1])
    c: list = field(default_factory=lambda: [0, 0])
    cp: list = field(default_factory=lambda: [0, 0])
    done: bool = False
    eps1: float = EPS
    eps2: float = EPS
    delta: float = 0.0
    max_m: int = 0
    rounds: int = 0


@dataclass
class SubtreeCertificate:
    """Thresholds c0 (for n0, the cheaper child of ``top``) and c1 (for n1).

    Nodes strictly above ``top`` form a unary chain that is always included.
    When the whole tree is a chain, ``chain_limit`` caps the chain length.
    """

    top: object
    c0: int
    c1: int
    m: int
    bound: int
    n0: object = None
    n1: object = None
    chain_limit: int = None
    saturated: bool = False
    state: SubtreeGenState = None

    def oracle(self, base, hcost):
        return CertificateOracle(base, self, hcost)


class CertificateOracle(OracleView):
    """branch' of a certificate: O(1) underlying calls per query."""

    def __init__(self, base, cert, hcost):
        super().__init__(base)
        self.cert = cert
        self.size_bound = cert.bound
        self._top_depth = len(base.path(cert.top))
        if cert.chain_limit is None:
            self._two = TwoTrunc(base, cert.top, hcost, cert.c0, cert.c1)
        self._start = len(base.path(base.root))

    def branch(self, node):
        depth = len(self.base.path(node))
        if self.cert.chain_limit is not None:
            if depth - self._start + 1 < self.cert.chain_limit:
                return self.base.branch(node)
            return []
        if depth < self._top_depth:
            return self.base.branch(node)
        return self._two.branch(node)


def _first_lookahead(oracle, hcost, node, top):
    # threshold admitting the node and its cheapest child: what the update
    # c' <- kthcost(n, 2^m_i) gives at m_i = 0
    kids = oracle.branch(node)
    return min(hcost(k) for k in kids) + 1 if kids else top


def qsubtree_local(root, m, oracle, hcost, d, h_max, delta, ledger=None, mode=None,
                   policy=DEFAULT_POLICY, target=None, probe=None, shadow=None):
    """Thresholds (c0, c1) for a root with two children.

    ``target`` replaces 2^m as the number of pops to certify; the node bound
    is then 4 * target.  ``probe(state, n)`` is called at every return to the
    outer loop guard and ``shadow`` collects every threshold-search call.
    """
    ledger = ledger if ledger is not None else QueryLedger()
    K = 2 ** m if target is None else target
    mlog = max(0, math.ceil(math.log2(K)))
    st = SubtreeGenState()
    e1, e2 = st.eps1, st.eps2
    st.delta = dp = delta / (8 * (mlog + 3))
    limit = 2 * K * (1 + e2) ** 4 * (1 + e1) ** 2
    top = h_max + 1
    n = sorted(oracle.branch(root), key=lambda x: (hcost(x), oracle.path(x)))
    if len(n) != 2:
        raise ValueError("qsubtree_local needs a root with two children")

    def cert(c0, c1, saturated=False):
        return SubtreeCertificate(root, c0, c1, m, 4 * K, n[0], n[1], saturated=saturated, state=st)

    def size(i, t, bound, eps):
        return qtsize(trunc(n[i], oracle, hcost, t), d, bound, dp, eps, ledger, policy, mode)

    def estimate(i, t, bound):
        # grow the bound until the estimator commits to a number
        while True:
            r = size(i, t, bound, e1)
            if r is not MORE:
                return r
            bound *= 2

    def kth(i, k, eps):
        try:
            return kthcost(n[i], oracle, d, hcost, h_max, k, eps, dp, ledger, policy, mode, shadow)
        except InsufficientNodes:
            return top

    def nxt(i, c, m_i):
        tmax = 2 * math.ceil(2 ** m_i * (1 + e2) ** 2) + 1
        try:
            return nextcost(n[i], oracle, d, hcost, h_max, tmax, c, dp, ledger, policy, shadow)
        except NoneAboveThreshold:
            return top

    whole = qtsize(trunc(root, oracle, hcost, top), d, 4 * K / (1 + e2) ** 2, dp, e2,
                   ledger, policy, mode)
    if whole is not MORE:
        st.c = [top, top]
        return cert(top, top, saturated=True)

    c = st.c = [hcost(n[0]), hcost(n[1])]
    cp = st.cp = [_first_lookahead(oracle, hcost, n[0], top), _first_lookahead(oracle, hcost, n[1], top)]
    T, mm = st.T, st.m
    cap = 64 + 8 * (mlog + 4)
    while T[0] + T[1] + 1 <= limit:
        if probe is not None:
            probe(st, n)
        st.rounds += 1
        if st.rounds > cap:
            raise RuntimeError("subtree generation did not converge")
        cur = st.current
        o = 1 - cur
        caught_up = False
        while size(cur, c[o], 2 ** mm[cur], e2) is MORE:
            if 2 ** (mm[cur] + 1) <= limit - T[o] - 1:
                mm[cur] += 1
            else:
                st.done = True
                break
        while (not st.done and c[o] != cp[o]
               and size(cur, cp[o], 2 ** mm[cur], e2) is MORE):
            if 2 ** (mm[cur] + 1) <= limit - T[o] - 1:
                mm[cur] += 1
            else:
                st.done = True
                break
            c[cur] = kth(cur, 2 ** (mm[cur] - 1), e2)
            if c[cur] < cp[o]:
                c[o] = nxt(o, c[cur], mm[cur])
                T[o] = estimate(o, c[o], 2 ** max(mm[cur] - 1, 0))
                caught_up = c[o] == cp[o]
            else:
                break
        st.max_m = max(st.max_m, mm[0], mm[1])
        if st.done:
            k = max(0, math.floor(limit - T[o] - 1))
            c[cur] = kth(cur, k, e1)
            break
        if caught_up:
            # the other side reached its look-ahead threshold before the
            # current side was size-checked below it: check again
            continue
        c[cur] = nxt(cur, cp[o], mm[cur])
        cp[cur] = kth(cur, 2 ** mm[cur], e2)
        for i in (0, 1):
            T[i] = estimate(i, c[i], 2 ** (mm[i] + 1))
        st.current = o
    return cert(c[0], c[1])


def qsubtree(oracle, hcost, m, d, h_max, delta, ledger=None, mode=None, policy=DEFAULT_POLICY,
             probe=None, shadow=None):
    """Certificate for the first 2^m pops of the whole tree.

    A unary chain at the top of the tree is walked directly and prepended;
    the generator then runs from the first node with two children.
    """
    ledger = ledger if ledger is not None else QueryLedger()
    K = 2 ** m
    node = oracle.root
    chain = 1
    kids = oracle.branch(node)
    while len(kids) == 1 and chain < K:
        node = kids[0]
        chain += 1
        kids = oracle.branch(node)
    if len(kids) > 2:
        raise ValueError("tree must be binary")
    if not kids or chain >= K:
        # the chain alone holds the first K pops (or the whole tree)
        return SubtreeCertificate(node, h_max + 1, h_max + 1, m, 4 * K, chain_limit=chain)
    c = qsubtree_local(node, m, oracle, hcost, d, h_max, delta, ledger, mode, policy,
                       target=K - (chain - 1), probe=probe, shadow=shadow)
    c.bound = 4 * K
    return c


def verify_certificate(cert_oracle, trace, m, full_order=None):
    """Check a certificate tree against a classical trace.

    ``full_order`` is the pop order of the entire tree (defaults to the trace
    pops) and is used to decide node validity.
    """
    nodes = walk(cert_oracle)
    S = set(nodes)
    first = first_k(trace, 2 ** m)
    order = full_order if full_order is not None else trace.pops
    valid = 0
    seen_all = True
    for x in order:
        if x not in S:
            seen_all = False
        elif seen_all:
            valid += 1
    return {
        "contains_first": first <= S,
        "node_count": len(nodes),
        "valid_fraction": valid / len(nodes) if nodes else 1.0,
    }
