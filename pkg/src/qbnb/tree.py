"""Tree oracles, query accounting and the threshold truncations.

A node is identified by its path from the root: a tuple of child indices,
``()`` being the root.  Oracles expose ``branch`` and ``cost`` plus the
bounds ``depth_bound``, ``size_bound`` and ``c_max``.
"""
from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field

NodeId = tuple


class BnBConditionError(ValueError):
    """A child was observed with lower cost than its parent."""


@dataclass
class QueryLedger:
    branch_calls: int = 0
    cost_calls: int = 0
    hcost_calls: int = 0
    charged_quantum: float = 0.0
    charge_breakdown: list = field(default_factory=list)

    def charge(self, primitive, amount, **params):
        if amount < 0:
            raise ValueError("negative charge")
        self.charged_quantum += amount
        self.charge_breakdown.append((primitive, params, amount))

    def charges_by(self, primitive):
        return sum(a for name, _, a in self.charge_breakdown if name == primitive)


class TreeOracle:
    """Base class.  Subclasses set ``root`` and the three bounds."""

    root = ()
    depth_bound = 1
    size_bound = 1
    c_max = 1

    def branch(self, node):
        raise NotImplementedError

    def cost(self, node):
        raise NotImplementedError

    def path(self, node):
        return node

    def parent(self, node):
        """Parent of ``node`` in the underlying tree (None for the root)."""
        return node[:-1] if node else None

    def depth(self, node):
        return len(self.path(node))


class OracleView(TreeOracle):
    """Wraps another oracle, forwarding everything it does not override."""

    def __init__(self, base):
        self.base = base
        self.root = base.root
        self.depth_bound = base.depth_bound
        self.size_bound = base.size_bound
        self.c_max = base.c_max

    def branch(self, node):
        return self.base.branch(node)

    def cost(self, node):
        return self.base.cost(node)

    def path(self, node):
        return self.base.path(node)

    def parent(self, node):
        return self.base.parent(node)

    def __getattr__(self, name):
        # only reached for attributes not found normally (e.g. hcost)
        if name == "base":
            raise AttributeError(name)
        return getattr(self.base, name)


class ExplicitTree(TreeOracle):
    """A fully materialized tree keyed by path.

    ``children`` maps every node to its child count; ``costs`` and
    ``hcosts`` map nodes to integers (hcost defaults to cost).
    """

    def __init__(self, children, costs, hcosts=None, depth_bound=None, c_max=None):
        self._nkids = dict(children)
        self._cost = dict(costs)
        self._hcost = dict(hcosts) if hcosts is not None else self._cost
        if () not in self._nkids:
            raise ValueError("tree has no root")
        self._kids = {}
        for p, k in self._nkids.items():
            self._kids[p] = [p + (i,) for i in range(k)]
        self.root = ()
        depth = max(len(p) for p in self._nkids)
        self.depth_bound = depth_bound if depth_bound is not None else max(depth, 1)
        self.size_bound = len(self._nkids)
        self.c_max = c_max if c_max is not None else max(self._cost.values())

    @classmethod
    def from_nested(cls, spec, **kw):
        """Build from nested ``(cost, hcost, [children...])`` tuples."""
        children, costs, hcosts = {}, {}, {}
        stack = [((), spec)]
        while stack:
            p, (c, h, kids) = stack.pop()
            children[p] = len(kids)
            costs[p] = c
            hcosts[p] = h
            for i, k in enumerate(kids):
                stack.append((p + (i,), k))
        return cls(children, costs, hcosts, **kw)

    def branch(self, node):
        return self._kids[node]

    def cost(self, node):
        return self._cost[node]

    def hcost(self, node):
        return self._hcost[node]

    def nodes(self):
        return sorted(self._nkids)

    def __len__(self):
        return len(self._nkids)


class CountedOracle(OracleView):
    """Counts branch and cost calls into a ledger."""

    def __init__(self, base, ledger):
        super().__init__(base)
        self.ledger = ledger

    def branch(self, node):
        self.ledger.branch_calls += 1
        return self.base.branch(node)

    def cost(self, node):
        self.ledger.cost_calls += 1
        return self.base.cost(node)


def walk(oracle, root=None, limit=None):
    """Preorder node list of ``oracle`` (stops after ``limit`` nodes)."""
    root = oracle.root if root is None else root
    if root is None:
        return []
    out = []
    stack = [root]
    while stack:
        n = stack.pop()
        out.append(n)
        if limit is not None and len(out) >= limit:
            break
        stack.extend(reversed(oracle.branch(n)))
    return out


def tree_size(oracle, limit=None):
    """Number of nodes, or ``limit + 1`` if there are more than ``limit``."""
    root = oracle.root
    if root is None:
        return 0
    if type(oracle) is Trunc:
        return _trunc_size(oracle, limit)
    count = 0
    stack = [root]
    branch = oracle.branch
    while stack:
        n = stack.pop()
        count += 1
        if limit is not None and count > limit:
            return count
        stack.extend(branch(n))
    return count


def check_bnb(oracle):
    """Exhaustively verify the B&B condition; raises BnBConditionError."""
    for n in walk(oracle):
        c = oracle.cost(n)
        for k in oracle.branch(n):
            if oracle.cost(k) < c:
                raise BnBConditionError(f"child {k} cheaper than parent {n}")


# -- truncations ---------------------------------------------------------


class Trunc(OracleView):
    """Nodes reachable from ``subroot`` through nodes with hcost < t."""

    def __init__(self, base, subroot, hcost, t):
        super().__init__(base)
        self.hcost = hcost
        self._h = getattr(hcost, "fn", hcost)
        self.t = t
        self.subroot = subroot
        self.root = subroot if hcost(subroot) < t else None

    def branch(self, node):
        h, t = self._h, self.t
        return [x for x in self.base.branch(node) if h(x) < t]


def _trunc_size(tr, limit):
    # same walk as tree_size with the truncation test inlined
    h, t, branch = tr._h, tr.t, tr.base.branch
    limit = float("inf") if limit is None else limit
    count = 1
    if count > limit:
        return count
    stack = [tr.root]
    pop, push = stack.pop, stack.append
    while stack:
        for x in branch(pop()):
            if h(x) < t:
                count += 1
                if count > limit:
                    return count
                push(x)
    return count


class TruncCounter:
    """Sizes of trunc(subroot, oracle, hcost, t) for many thresholds t.

    Enumerates the subtree once, best-first by the largest hcost on the path
    from ``subroot``, stopping after ``limit + 1`` nodes.  ``size(t)`` equals
    ``tree_size(trunc(...), limit)`` for every t.
    """

    def __init__(self, oracle, subroot, hcost, limit):
        h = getattr(hcost, "fn", hcost)
        self.limit = limit
        keys = []
        heap = [(h(subroot), 0, subroot)]
        seq = 0
        while heap and len(keys) <= limit:
            k, _, node = heapq.heappop(heap)
            keys.append(k)
            for x in oracle.branch(node):
                seq += 1
                heapq.heappush(heap, (max(k, h(x)), seq, x))
        self.keys = keys

    def size(self, t):
        return bisect.bisect_left(self.keys, t)


class PTrunc(OracleView):
    """Cuts below every node N whose parent P has hcost(P) <= t < hcost(N)."""

    def __init__(self, base, subroot, hcost, t):
        super().__init__(base)
        self.hcost = hcost
        self.t = t
        self.root = subroot

    def is_cut(self, node):
        par = self.base.parent(node)
        if par is None:
            return False
        return self.hcost(par) <= self.t < self.hcost(node)

    def branch(self, node):
        if self.is_cut(node):
            return []
        return self.base.branch(node)


class TwoTrunc(OracleView):
    """{root} + trunc(n0, t0) + trunc(n1, t1), n0 being the lower-hcost child."""

    def __init__(self, base, root, hcost, t0, t1):
        super().__init__(base)
        kids = base.branch(root)
        if len(kids) < 2:
            raise ValueError("twotrunc needs a root with two children")
        n0, n1 = sorted(kids, key=lambda x: (hcost(x), base.path(x)))
        self.root = root
        self.hcost = hcost
        self.n0, self.n1 = n0, n1
        self.t0, self.t1 = t0, t1
        self._level = len(base.path(root))
        self._limit = {base.path(n0)[-1]: t0, base.path(n1)[-1]: t1}

    def threshold(self, node):
        return self._limit[self.base.path(node)[self._level]]

    def branch(self, node):
        h = self.hcost
        kids = self.base.branch(node)
        if len(self.base.path(node)) == self._level:
            lim = self._limit
            return [x for x in kids if h(x) < lim[self.base.path(x)[-1]]]
        t = self.threshold(node)
        return [x for x in kids if h(x) < t]


def trunc(subroot, oracle, hcost, t):
    return Trunc(oracle, subroot, hcost, t)


def ptrunc(subroot, oracle, hcost, t):
    return PTrunc(oracle, subroot, hcost, t)


def twotrunc(root, oracle, hcost, t0, t1):
    return TwoTrunc(oracle, root, hcost, t0, t1)


# -- binarization --------------------------------------------------------


class Binarized(OracleView):
    """Binary version of a bounded-degree tree.

    Each node of the new tree is either an original node or a synthetic
    node standing for a contiguous range of an original node's children.
    Synthetic nodes carry the cost of that original parent.
    """

    def __init__(self, base, deg):
        super().__init__(base)
        self.deg = deg
        self.root = ()
        self.depth_bound = base.depth_bound * math.ceil(math.log2(deg))
        self.size_bound = 2 * base.size_bound
        # path -> (original node, None) or (original parent, lo, hi)
        self._info = {(): (base.root, None)}

    def _split(self, owner, lo, hi, path):
        if hi - lo <= 2:
            kids = self.base.branch(owner)
            out = []
            for j, idx in enumerate(range(lo, hi)):
                self._info[path + (j,)] = (kids[idx], None)
                out.append(path + (j,))
            return out
        mid = lo + (hi - lo + 1) // 2
        out = []
        for j, (a, b) in enumerate(((lo, mid), (mid, hi))):
            p = path + (j,)
            if b - a == 1:
                self._info[p] = (self.base.branch(owner)[a], None)
            else:
                self._info[p] = (owner, a, b)
            out.append(p)
        return out

    def _resolve(self, path):
        if path not in self._info:
            self.branch(path[:-1])
        return self._info[path]

    def branch(self, node):
        info = self._resolve(node)
        if info[1] is None:
            orig = info[0]
            return self._split(orig, 0, len(self.base.branch(orig)), node)
        owner, lo, hi = info
        return self._split(owner, lo, hi, node)

    def cost(self, node):
        return self.base.cost(self._resolve(node)[0])

    def is_synthetic(self, node):
        return self._resolve(node)[1] is not None

    def original(self, node):
        """The original node for ``node``, or None if it is synthetic."""
        info = self._resolve(node)
        return info[0] if info[1] is None else None

    def path(self, node):
        return node

    def parent(self, node):
        return node[:-1] if node else None


def binarize(oracle, deg):
    if deg < 2:
        raise ValueError("deg must be at least 2")
    if deg == 2:
        return oracle
    return Binarized(oracle, deg)


# -- serialization -------------------------------------------------------


def _fmt_path(p):
    return "-" if not p else "".join(str(i) for i in p)


def _parse_path(s):
    return () if s == "-" else tuple(int(ch) for ch in s)


def dump_tree(tree, fh):
    """Write ``path cost hcost nchildren`` lines in preorder."""
    fh.write("# path cost hcost children\n")
    hc = getattr(tree, "hcost", tree.cost)
    for n in walk(tree):
        fh.write(f"{_fmt_path(n)} {tree.cost(n)} {hc(n)} {len(tree.branch(n))}\n")


def load_tree(fh):
    children, costs, hcosts = {}, {}, {}
    for lineno, line in enumerate(fh, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields")
        p = _parse_path(parts[0])
        costs[p] = int(parts[1])
        hcosts[p] = int(parts[2])
        children[p] = int(parts[3])
    for p, k in children.items():
        for i in range(k):
            if p + (i,) not in children:
                raise ValueError(f"missing node {_fmt_path(p + (i,))}")
    return ExplicitTree(children, costs, hcosts)


def random_tree(seed, max_depth=12, max_nodes=4096, p_two=None, p_one=None, step=3):
    """A random binary tree with monotone integer costs (hcost = cost).

    Every node below ``max_depth`` gets two children with probability
    ``p_two``, one with ``p_one`` and none otherwise, until ``max_nodes``.
    Child cost is the parent's plus a uniform draw from [0, step].
    """
    import random

    rng = random.Random(seed)
    if p_two is None:
        p_two = rng.uniform(0.45, 0.9)
    if p_one is None:
        p_one = rng.uniform(0.0, 0.15)
    children = {(): 0}
    costs = {(): rng.randint(1, 3)}
    frontier = [()]
    count = 1
    while frontier and count < max_nodes:
        nxt = []
        for p in frontier:
            if len(p) >= max_depth:
                continue
            u = rng.random()
            k = 2 if u < p_two else (1 if u < p_two + p_one else 0)
            k = min(k, max_nodes - count)
            children[p] = k
            for i in range(k):
                q = p + (i,)
                children[q] = 0
                costs[q] = costs[p] + rng.randint(0, step)
                nxt.append(q)
            count += k
        frontier = nxt
        rng.shuffle(frontier)
        frontier.sort(key=len)
    return ExplicitTree(children, costs, depth_bound=max(max_depth, 1))
