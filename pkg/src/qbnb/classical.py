"""Best-first classical exploration: branch and bound and marked-node search."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .tree import BnBConditionError, CountedOracle, QueryLedger


@dataclass
class ExplorationTrace:
    pops: list = field(default_factory=list)
    incumbent: list = field(default_factory=list)
    best_bound: list = field(default_factory=list)
    gap: list = field(default_factory=list)
    d_max_seen: int = 0

    @property
    def Q(self):
        return len(self.pops)

    def __len__(self):
        return len(self.pops)


def first_k(trace, k):
    """The set of the first ``k`` popped nodes (k is clipped to the trace)."""
    return set(trace.pops[:k])


def _depth(oracle, node):
    return len(oracle.path(node))


def classical_bnb(oracle, hc, eps=0, ledger=None):
    """Pop the lowest-hc active node until incumbent - best_bound <= eps.

    Returns ``(leaf, trace)``.  The incumbent is the cheapest leaf popped so
    far and the best bound the cheaper of the incumbent and the cheapest
    active node.
    """
    ledger = ledger if ledger is not None else QueryLedger()
    o = CountedOracle(oracle, ledger)
    trace = ExplorationTrace()
    root = o.root
    seq = 0
    rc = o.cost(root)
    active = [(hc(root), seq, root, rc)]
    bounds = [(rc, seq)]
    alive = {seq}
    inc, inc_cost = None, None
    while active:
        _, s, node, c = heapq.heappop(active)
        alive.discard(s)
        trace.pops.append(node)
        trace.d_max_seen = max(trace.d_max_seen, _depth(o, node))
        kids = o.branch(node)
        if not kids:
            if inc_cost is None or c < inc_cost:
                inc, inc_cost = node, c
        for k in kids:
            ck = o.cost(k)
            if ck < c:
                raise BnBConditionError(f"child {k!r} has cost {ck} < parent cost {c}")
            seq += 1
            heapq.heappush(active, (hc(k), seq, k, ck))
            heapq.heappush(bounds, (ck, seq))
            alive.add(seq)
        while bounds and bounds[0][1] not in alive:
            heapq.heappop(bounds)
        bb = bounds[0][0] if bounds else None
        if inc_cost is not None and (bb is None or inc_cost < bb):
            bb = inc_cost  # the incumbent itself bounds the optimum from below too
        gap = inc_cost - bb if (inc_cost is not None and bb is not None) else None
        trace.incumbent.append(inc_cost)
        trace.best_bound.append(bb)
        trace.gap.append(gap)
        if gap is not None and gap <= eps:
            break
    return inc, trace


def classical_tree_search(oracle, hc, f, ledger=None):
    """Return the first popped node with f(node) true, or None, and the trace."""
    ledger = ledger if ledger is not None else QueryLedger()
    o = CountedOracle(oracle, ledger)
    trace = ExplorationTrace()
    seq = 0
    active = [(hc(o.root), seq, o.root)]
    while active:
        _, _, node = heapq.heappop(active)
        trace.pops.append(node)
        trace.d_max_seen = max(trace.d_max_seen, _depth(o, node))
        if f(node):
            return node, trace
        for k in o.branch(node):
            seq += 1
            heapq.heappush(active, (hc(k), seq, k))
    return None, trace


def explore_all(oracle, hc):
    """Full pop order of the whole tree under ``hc``."""
    return classical_tree_search(oracle, hc, lambda n: False)[1]
