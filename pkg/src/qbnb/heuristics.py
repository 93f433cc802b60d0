"""Branch-local heuristics, the lift to a local heuristic cost, and tie-breaking."""
from __future__ import annotations

import functools
import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Callable, Optional

from .tree import OracleView, walk

class LiftedNode(namedtuple("LiftedNode", "node depth transcript")):
    """A node with its depth and ancestor transcript.

    Depth and transcript are functions of the node itself, so equality and
    hashing only look at ``node``.
    """

    __slots__ = ()

    def __eq__(self, other):
        return type(other) is LiftedNode and self.node == other.node

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.node)

KEY_LIMIT = 2 ** 64


@dataclass
class BranchLocalHeuristic:
    """heur(N) = combine(hlocal(N), [hparent(A) for ancestors A], depth(N), d).

    ``hlocal`` and ``hparent`` take ``(oracle, node)`` and may make a constant
    number of oracle calls; ``d`` is the tree's depth bound.  ``bound(oracle)``
    returns an upper bound on the combined value.  Real-valued heuristics set
    ``precision`` and are quantized, otherwise ``combine`` must return
    positive integers.
    """

    kind: str
    hlocal: Callable
    hparent: Callable
    combine: Callable
    bound: Callable
    precision: Optional[float] = None


def _none(oracle, node):
    return None


def cost_based():
    return BranchLocalHeuristic(
        "cost-based",
        hlocal=lambda o, n: o.cost(n),
        hparent=_none,
        combine=lambda hl, tr, depth, width: hl,
        bound=lambda o: o.c_max,
    )


def a_star(estimate=None):
    """cost(N) + g(N); ``g`` defaults to the depth of N."""
    if estimate is None:
        return BranchLocalHeuristic(
            "a-star",
            hlocal=lambda o, n: o.cost(n),
            hparent=_none,
            combine=lambda hl, tr, depth, width: hl + depth,
            bound=lambda o: o.c_max + o.depth_bound,
        )
    return BranchLocalHeuristic(
        "a-star",
        hlocal=lambda o, n: o.cost(n) + estimate(o, n),
        hparent=_none,
        combine=lambda hl, tr, depth, width: hl,
        bound=lambda o: o.c_max + estimate.bound(o),
    )


def _dfs_code(path, transcript, width):
    v = 0
    for i, (step, order) in enumerate(zip(path, transcript)):
        v += (order.index(step) + 1) * 3 ** (width - 1 - i)
    return v + 1


def depth_first(child_key=None):
    """Preorder search.  Siblings are visited in ``child_key`` order.

    The parent value is the ordering of its children and the local value is
    the node's path, so the combined value is the node's preorder code.
    """

    def hparent(o, n):
        kids = o.branch(n)
        if child_key is not None:
            kids = sorted(kids, key=lambda k: child_key(o, k))
        return tuple(o.path(k)[-1] for k in kids)

    return BranchLocalHeuristic(
        "depth-first",
        hlocal=lambda o, n: o.path(n),
        hparent=hparent,
        combine=lambda hl, tr, depth, width: _dfs_code(hl, tr, width),
        bound=lambda o: 3 ** o.depth_bound,
    )


HEURISTICS = {"cost": cost_based, "dfs": depth_first, "astar": a_star}


def by_name(name):
    try:
        return HEURISTICS[name]()
    except KeyError:
        raise ValueError(f"unknown heuristic {name!r}") from None


def quantize(values, p, lower=0.0):
    """Map reals in [lower, ...) to positive integers floor((v-lower)/p) + 1."""
    if p <= 0:
        raise ValueError("precision must be positive")
    return [quantize_value(v, p, lower) for v in values]


def quantize_value(v, p, lower=0.0):
    return math.floor((v - lower) / p + 1e-9) + 1


class LiftedOracle(OracleView):
    """The tree whose nodes carry their depth and ancestor transcript."""

    def __init__(self, base, heuristic):
        super().__init__(base)
        self.heuristic = heuristic
        self.root = LiftedNode(base.root, 0, ())
        self._kids = {}

    def branch(self, node):
        out = self._kids.get(node.node)
        if out is None:
            kids = self.base.branch(node.node)
            if kids:
                tr = node.transcript + (self.heuristic.hparent(self.base, node.node),)
                d = node.depth + 1
                out = [LiftedNode(k, d, tr) for k in kids]
            else:
                out = []
            self._kids[node.node] = out
        return list(out)

    def cost(self, node):
        return self.base.cost(node.node)

    def path(self, node):
        return self.base.path(node.node)

    def parent(self, node):
        par = self.base.parent(node.node)
        if par is None:
            return None
        return LiftedNode(par, node.depth - 1, node.transcript[:-1])

    def project(self, node):
        return node.node


class LocalHcost:
    """A positive-integer valued ranking function with an upper bound."""

    def __init__(self, fn, h_max):
        self.fn = fn
        self.h_max = h_max

    def __call__(self, node):
        return self.fn(node)


def reduce_to_local(h, oracle):
    """Lift ``oracle`` so that ``h`` becomes a function of the lifted node."""
    lifted = LiftedOracle(oracle, h)
    hlocal, combine = h.hlocal, h.combine
    width = oracle.depth_bound
    bound = h.bound(oracle)
    if h.precision is None:

        def fn(ln):
            return combine(hlocal(oracle, ln.node), ln.transcript, ln.depth, width)

        h_max = bound
    else:
        p = h.precision

        def fn(ln):
            v = combine(hlocal(oracle, ln.node), ln.transcript, ln.depth, width)
            return quantize_value(v, p)

        h_max = math.ceil(bound / p) + 1
    return lifted, LocalHcost(fn, h_max)


def heuristic_value(h, oracle, node):
    """Evaluate heur(N) directly by walking N's ancestors."""
    chain = []
    a = oracle.parent(node)
    while a is not None:
        chain.append(a)
        a = oracle.parent(a)
    transcript = tuple(h.hparent(oracle, a) for a in reversed(chain))
    v = h.combine(h.hlocal(oracle, node), transcript, len(transcript), oracle.depth_bound)
    return v if h.precision is None else quantize_value(v, h.precision)


def path_rank(path, width):
    """Base-3 code of a binary path padded to ``width`` digits.

    A prefix ranks before all of its extensions, siblings rank left to right.
    """
    pw = _pow3(width)
    v = 0
    for i, step in enumerate(path):
        v += (step + 1) * pw[i]
    return v


@functools.lru_cache(maxsize=None)
def _pow3(width):
    return [3 ** (width - 1 - i) for i in range(width)]


def total_order(hc, oracle):
    """Break ties of ``hc`` by path order: value * 2**w + rank(path).

    ``oracle`` supplies node paths and the depth bound fixing w.
    """
    path = oracle.path
    depth_bound = oracle.depth_bound
    w = math.ceil(depth_bound * math.log2(3))
    shift = 1 << w
    h_max = hc.h_max * shift + 3 ** depth_bound - 1
    if h_max >= KEY_LIMIT:
        raise OverflowError(f"composed h_max {h_max} does not fit in 64 bits")
    memo = {}

    def fn(node):
        v = memo.get(node)
        if v is None:
            p = path(node)
            v = hc(node) * shift + path_rank(p, depth_bound)
            memo[node] = v
        return v

    out = LocalHcost(fn, h_max)
    out.base = hc
    out.shift = shift
    return out


def node_hcost(oracle, attr="hcost"):
    """LocalHcost reading a per-node value stored on the oracle."""
    f = getattr(oracle, attr)
    h_max = getattr(oracle, "h_max", None)
    if h_max is None:
        h_max = max(f(n) for n in walk(oracle))
    return LocalHcost(f, h_max)
