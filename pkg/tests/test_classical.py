from hypothesis import given, settings, strategies as st

from qbnb.classical import classical_bnb, classical_tree_search, explore_all, first_k
from qbnb.heuristics import LocalHcost, total_order
from qbnb.tree import ExplicitTree, QueryLedger, random_tree, walk

from conftest import A, B, C, E, F, G, R


def hc_of(t):
    return total_order(LocalHcost(t.hcost, t.c_max), t)


def test_bnb_on_toy(toy):
    leaf, trace = classical_bnb(toy, hc_of(toy))
    assert leaf == C and toy.cost(leaf) == 4
    assert trace.pops == [R, A, C, B]
    assert trace.incumbent == [None, None, 4, 4]
    assert trace.best_bound == [2, 3, 3, 4]
    assert trace.gap == [None, None, 1, 0]
    assert trace.d_max_seen == 2


def test_bnb_single_node():
    t = ExplicitTree.from_nested((3, 3, []))
    leaf, trace = classical_bnb(t, hc_of(t))
    assert leaf == () and trace.Q == 1


def test_bnb_large_eps_returns_first_leaf(toy):
    leaf, trace = classical_bnb(toy, hc_of(toy), eps=toy.c_max)
    assert leaf == C and trace.Q == 3


def test_tree_search_examples(toy):
    hc = hc_of(toy)
    node, trace = classical_tree_search(toy, hc, lambda n: n == G)
    assert node == G and trace.Q == 7
    node, trace = classical_tree_search(toy, hc, lambda n: n == R)
    assert node == R and trace.Q == 1
    node, trace = classical_tree_search(toy, hc, lambda n: False)
    assert node is None and trace.Q == 7


def test_first_k(toy):
    trace = classical_bnb(toy, hc_of(toy))[1]
    assert first_k(trace, 4) == {R, A, C, B}
    assert first_k(trace, 1) == {R}
    assert first_k(trace, trace.Q) == set(trace.pops)
    assert first_k(trace, 100) == set(trace.pops)


def leaves(t):
    return [n for n in walk(t) if not t.branch(n)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 4))
def test_bnb_soundness_and_trace_invariants(seed, eps):
    t = random_tree(seed, max_nodes=600)
    led = QueryLedger()
    leaf, trace = classical_bnb(t, hc_of(t), eps=eps, ledger=led)
    opt = min(t.cost(n) for n in leaves(t))
    assert not t.branch(leaf)
    assert t.cost(leaf) <= opt + eps
    assert trace.pops[0] == ()
    seen = set()
    for n in trace.pops:
        assert n == () or n[:-1] in seen
        seen.add(n)
    gaps = [g for g in trace.gap if g is not None]
    assert all(a >= b for a, b in zip(gaps, gaps[1:]))
    for inc, bb in zip(trace.incumbent, trace.best_bound):
        if inc is not None and bb is not None:
            assert bb <= opt <= inc
    assert led.branch_calls == trace.Q


def test_explore_all_visits_every_node():
    t = random_tree(9, max_nodes=300)
    trace = explore_all(t, hc_of(t))
    assert sorted(trace.pops) == sorted(walk(t))
    assert trace.d_max_seen == max(len(n) for n in walk(t))
