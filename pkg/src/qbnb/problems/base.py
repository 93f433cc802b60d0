"""Shared machinery for problem trees built from memoized node states."""
from __future__ import annotations

from ..heuristics import LocalHcost
from ..tree import TreeOracle

SCALE = 10 ** 6


class InstanceError(ValueError):
    """Instance parameters or files are unusable."""


class ProblemTree(TreeOracle):
    """Tree whose node states are computed lazily from the parent's state.

    Subclasses implement ``_root_state()`` and ``_children(path, state)``
    (returning child states, each carrying an integer ``cost``).
    Child costs are clamped to at least the parent's cost so floating-point
    noise in a relaxation can never break the B&B condition.
    """

    def __init__(self):
        self.root = ()
        self._state = {(): self._root_state()}
        self._kids = {}

    def state(self, node):
        st = self._state.get(node)
        if st is None:
            self.branch(node[:-1])
            st = self._state[node]
        return st

    def branch(self, node):
        kids = self._kids.get(node)
        if kids is None:
            st = self.state(node)
            kids = []
            for i, cst in enumerate(self._children(node, st)):
                if cst.cost < st.cost:
                    cst.cost = st.cost
                self._state[node + (i,)] = cst
                kids.append(node + (i,))
            self._kids[node] = kids
        return kids

    def cost(self, node):
        return self.state(node).cost

    def hcost(self, node):
        return self.state(node).cost

    def local_hcost(self):
        return LocalHcost(self.hcost, self.c_max)

    def value(self, node):
        """Objective value of a leaf in the problem's own units."""
        raise NotImplementedError
