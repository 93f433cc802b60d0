"""Sherrington-Kirkpatrick spin glass: minimize sum_{i<j} J_ij s_i s_j."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .base import SCALE, InstanceError, ProblemTree


@dataclass
class SkInstance:
    n: int
    J: np.ndarray
    seed: int = None

    def __post_init__(self):
        self.J = np.asarray(self.J, dtype=float)
        if self.J.shape != (self.n, self.n):
            raise InstanceError("J must be n x n")
        if not np.allclose(self.J, self.J.T) or np.any(np.diag(self.J) != 0):
            raise InstanceError("J must be symmetric with zero diagonal")


def gen_sk(n, seed):
    if n < 2:
        raise InstanceError("n must be at least 2")
    rng = np.random.default_rng(seed)
    U = np.triu(rng.standard_normal((n, n)), 1)
    return SkInstance(n, U + U.T, seed)


class _Node:
    __slots__ = ("energy", "free", "cost")

    def __init__(self, energy, free, cost):
        self.energy = energy
        self.free = free
        self.cost = cost


class SkTree(ProblemTree):
    """Spins are fixed in index order, +1 (child 0) then -1 (child 1).

    A node's bound is the energy of the fixed pairs minus |J_ij| for every
    pair with a free spin; couplings are rounded to integers at ``scale``.
    """

    def __init__(self, inst, scale=SCALE):
        self.inst = inst
        self.n = inst.n
        self.scale = scale
        Jq = np.rint(inst.J * scale).astype(np.int64)
        self.Jq = [[int(v) for v in row] for row in Jq]
        self._cols = [[self.Jq[i][k] for i in range(k)] for k in range(self.n)]
        self._col_abs = [sum(map(abs, col)) for col in self._cols]
        self.total_abs = sum(self._col_abs)
        self.depth_bound = self.n
        self.size_bound = 2 ** (self.n + 1) - 1
        self.c_max = 2 * self.total_abs + 1
        super().__init__()

    def _cost(self, energy, free):
        return energy - free + self.total_abs + 1

    def _root_state(self):
        return _Node(0, self.total_abs, self._cost(0, self.total_abs))

    def spins(self, node):
        return [1 - 2 * b for b in node]

    def _children(self, path, st):
        k = len(path)
        if k == self.n:
            return []
        field = sum(c if b == 0 else -c for c, b in zip(self._cols[k], path))
        free = st.free - self._col_abs[k]
        out = []
        for s in (1, -1):
            e = st.energy + s * field
            out.append(_Node(e, free, self._cost(e, free)))
        return out

    def energy(self, node):
        """Quantized energy of a full assignment, divided back to real units."""
        return self.state(node).energy / self.scale

    value = energy


def sk_tree(inst, scale=SCALE):
    t = SkTree(inst, scale)
    return t, t.local_hcost()


def sk_exhaustive(inst, scale=SCALE):
    """Minimum energy over all 2^n assignments (quantized couplings)."""
    n = inst.n
    Jq = np.rint(inst.J * scale).astype(np.int64)
    S = 1 - 2 * np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int64)
    E = np.einsum("ai,ij,aj->a", S, np.triu(Jq, 1), S)
    i = int(np.argmin(E))
    return int(E[i]) / scale, tuple(int(v) for v in S[i])
