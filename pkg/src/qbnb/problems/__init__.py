"""Instance families exposed as B&B trees, plus their relaxation solvers."""
from .base import SCALE, InstanceError
from .frank_wolfe import FWResult, frank_wolfe_qp
from .io import dumps_instance, load_instance, loads_instance, save_instance
from .mis import MisInstance, MisTree, gen_mis, mis_exhaustive, mis_tree, triangle_cuts
from .portfolio import (PortfolioInstance, PortfolioTree, gen_portfolio, portfolio_exhaustive,
                        portfolio_tree)
from .simplex import InfeasibleError, LPResult, UnboundedError, simplex_lp
from .sk import SkInstance, SkTree, gen_sk, sk_exhaustive, sk_tree

KINDS = ("sk", "mis", "portfolio")


def gen_instance(kind, n, seed, **params):
    """Random instance of family ``kind`` (sk, mis or portfolio)."""
    if n < 2:
        raise InstanceError("n must be at least 2")
    if kind == "sk":
        return gen_sk(n, seed, **params)
    if kind == "mis":
        return gen_mis(n, seed, **params)
    if kind == "portfolio":
        return gen_portfolio(n, seed, **params)
    raise InstanceError(f"unknown instance kind {kind!r}")


def build_tree(inst, **params):
    """The B&B tree oracle of an instance."""
    if isinstance(inst, SkInstance):
        return SkTree(inst, **params)
    if isinstance(inst, MisInstance):
        return MisTree(inst, **params)
    if isinstance(inst, PortfolioInstance):
        return PortfolioTree(inst, **params)
    raise TypeError(f"not an instance: {type(inst).__name__}")


def exhaustive_optimum(inst):
    """Optimal objective value by enumeration (MIS: set size, maximized)."""
    if isinstance(inst, SkInstance):
        return sk_exhaustive(inst)[0]
    if isinstance(inst, MisInstance):
        return mis_exhaustive(inst)[0]
    if isinstance(inst, PortfolioInstance):
        return portfolio_exhaustive(inst)[0]
    raise TypeError(f"not an instance: {type(inst).__name__}")
