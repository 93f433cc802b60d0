"""Classical stand-ins for the three quantum tree primitives.

Each routine computes its answer by plain traversal and charges the
quantum query cost of the primitive to the ledger.  The failure
probability only enters the charge.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .tree import tree_size


class _More:
    def __repr__(self):
        return "MORE"


MORE = _More()
"""Returned by :func:`qtsize` for "more than T0 nodes"."""


def _lg(x):
    # log factor with a floor so that d = 1 or c_max = 1 never zeroes a charge
    return max(math.log(x), math.log(2)) if x > 0 else math.log(2)


@dataclass
class ChargePolicy:
    prefactor: float = 1.0
    include_polylog: bool = True
    search_variant: str = "apers"  # or "jarret-wan"

    def search(self, T, d, delta):
        C = self.prefactor
        if self.search_variant == "jarret-wan":
            if not self.include_polylog:
                return C * math.sqrt(T * d)
            return C * math.sqrt(T * d) * _lg(d) ** 4 * _lg(1 / delta)
        if self.search_variant != "apers":
            raise ValueError(f"unknown search variant {self.search_variant!r}")
        if not self.include_polylog:
            return C * math.sqrt(T) * d
        return C * math.sqrt(T) * d * _lg(d) * _lg(1 / delta)

    def size(self, T0, d, eps, delta):
        base = self.prefactor * math.sqrt(T0 * d) / eps ** 1.5
        if not self.include_polylog:
            return base
        return base * _lg(1 / delta) ** 2

    def minleaf(self, T, d, c_max, delta):
        base = self.prefactor * math.sqrt(T) * d
        if not self.include_polylog:
            return base
        return base * _lg(c_max) * _lg(1 / delta) ** 2


DEFAULT_POLICY = ChargePolicy()


class EstimatorMode:
    """How :func:`qtsize` uses the slack its contract allows.

    ``exact`` answers "more" iff the size exceeds T0 and otherwise returns the
    size itself.  ``adversarial`` flips a seeded coin inside the undecided
    band and returns random estimates anywhere in the allowed interval.
    """

    def __init__(self, kind="exact", seed=None):
        if kind not in ("exact", "adversarial"):
            raise ValueError(f"unknown estimator mode {kind!r}")
        self.kind = kind
        self.seed = seed
        self.rng = random.Random(seed)

    @classmethod
    def parse(cls, text):
        if text == "exact":
            return cls()
        kind, _, seed = text.partition(":")
        if kind != "adversarial" or not seed:
            raise ValueError(f"bad estimator spec {text!r}")
        return cls("adversarial", int(seed))

    @property
    def exact(self):
        return self.kind == "exact"

    def __repr__(self):
        return "exact" if self.exact else f"adversarial:{self.seed}"


def qtsearch(oracle, d, T, f, delta, ledger, policy=DEFAULT_POLICY):
    """A marked node (first in path order) or None."""
    ledger.charge("qtsearch", policy.search(T, d, delta), T=T, d=d, delta=delta)
    if oracle.root is None:
        return None
    stack = [oracle.root]
    while stack:
        n = stack.pop()
        if f(n):
            return n
        stack.extend(reversed(oracle.branch(n)))
    return None


def qtsize(oracle, d, T0, delta, eps, ledger, policy=DEFAULT_POLICY, mode=None, size=None):
    """Size estimate of the tree, or MORE when it holds more than T0 nodes.

    ``size`` may carry the true node count (capped anywhere above the
    estimator band) when the caller already knows it.
    """
    ledger.charge("qtsize", policy.size(T0, d, eps, delta), T0=T0, d=d, eps=eps, delta=delta)
    if mode is None or mode.exact:
        T = tree_size(oracle, limit=math.floor(T0)) if size is None else size
        return MORE if T > T0 else T
    band = T0 * (1 + eps) ** 2
    T = tree_size(oracle, limit=math.floor(band) + 1) if size is None else size
    if T == 0:
        return 0
    if T >= band:
        return MORE
    if T > T0 and mode.rng.random() < 0.5:
        return MORE
    hi = math.floor(min(T * (1 + eps) ** 2, T0 * (1 + eps)))
    if hi < T:
        return MORE
    return mode.rng.randint(T, hi)


def qtminleaf(oracle, cost, d, c_max, T, delta, ledger, policy=DEFAULT_POLICY):
    """The cheapest leaf, ties broken by path order."""
    ledger.charge("qtminleaf", policy.minleaf(T, d, c_max, delta), T=T, d=d, c_max=c_max, delta=delta)
    best, best_key = None, None
    stack = [oracle.root]
    path = oracle.path
    while stack:
        n = stack.pop()
        kids = oracle.branch(n)
        if kids:
            stack.extend(kids)
            continue
        key = (cost(n), path(n))
        if best_key is None or key < best_key:
            best, best_key = n, key
    return best
