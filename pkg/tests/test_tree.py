import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from qbnb.tree import (BnBConditionError, ExplicitTree, QueryLedger, CountedOracle, TruncCounter,
                       binarize, check_bnb, dump_tree, load_tree, ptrunc, random_tree, tree_size,
                       trunc, twotrunc, walk)

from conftest import A, B, C, E, F, G, R, toy_tree


def node_set(oracle):
    return set(walk(oracle))


def all_nodes(t):
    return t.nodes()


def brute_trunc(t, subroot, t_):
    # every node on the path subroot..x has hcost < t
    out = set()
    for x in all_nodes(t):
        if x[:len(subroot)] != subroot:
            continue
        if all(t.hcost(x[:i]) < t_ for i in range(len(subroot), len(x) + 1)):
            out.add(x)
    return out


def test_toy_tree_shape(toy):
    assert walk(toy) == [R, A, C, E, B, F, G]
    assert toy.branch(A) == [C, E]
    assert toy.cost(G) == 7 and toy.hcost(G) == 8
    check_bnb(toy)


def test_trunc_examples(toy):
    assert node_set(trunc(A, toy, toy.hcost, 4)) == {A, C}
    assert node_set(trunc(B, toy, toy.hcost, toy.hcost(B))) == set()
    assert node_set(trunc(A, toy, toy.hcost, 9)) == {A, C, E}


def test_ptrunc_examples(toy):
    pt = ptrunc(R, toy, toy.hcost, 2)
    assert [n for n in walk(pt) if not pt.branch(n)] == [C, E, B]
    assert pt.branch(A) == [C, E]
    assert walk(ptrunc(R, toy, toy.hcost, 8)) == walk(toy)
    assert walk(ptrunc(R, toy, toy.hcost, 0)) == walk(toy)


def test_twotrunc_examples(toy):
    assert node_set(twotrunc(R, toy, toy.hcost, 4, 7)) == {R, A, C, B, F}
    assert node_set(twotrunc(R, toy, toy.hcost, 2, 5)) == {R}
    assert node_set(twotrunc(R, toy, toy.hcost, 9, 9)) == set(walk(toy))


def test_twotrunc_needs_two_children():
    chain = ExplicitTree({(): 1, (0,): 0}, {(): 1, (0,): 1})
    with pytest.raises(ValueError):
        twotrunc((), chain, chain.hcost, 5, 5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_trunc_matches_exhaustive_predicate(seed):
    t = random_tree(seed, max_nodes=300)
    rng = random.Random(seed)
    nodes = all_nodes(t)
    for _ in range(5):
        sub = rng.choice(nodes)
        th = rng.randint(0, t.c_max + 2)
        assert node_set(trunc(sub, t, t.hcost, th)) == brute_trunc(t, sub, th)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_twotrunc_is_union_of_truncs(seed):
    t = random_tree(seed, max_nodes=300)
    kids = t.branch(())
    if len(kids) < 2:
        return
    n0, n1 = sorted(kids, key=lambda x: (t.hcost(x), x))
    rng = random.Random(seed)
    for _ in range(100):
        t0, t1 = rng.randint(0, t.c_max + 1), rng.randint(0, t.c_max + 1)
        want = {()} | brute_trunc(t, n0, t0) | brute_trunc(t, n1, t1)
        assert node_set(twotrunc((), t, t.hcost, t0, t1)) == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 60))
def test_trunc_counter_matches_tree_size(seed, limit):
    t = random_tree(seed, max_nodes=200)
    sub = random.Random(seed).choice(all_nodes(t))
    counter = TruncCounter(t, sub, t.hcost, limit)
    for th in range(0, t.c_max + 3):
        assert min(counter.size(th), limit + 1) == tree_size(trunc(sub, t, t.hcost, th), limit)


def test_truncation_ledger_overhead_is_constant(toy):
    led = QueryLedger()
    counted = CountedOracle(toy, led)
    for make in (lambda: trunc(R, counted, toy.hcost, 9), lambda: ptrunc(R, counted, toy.hcost, 9),
                 lambda: twotrunc(R, counted, toy.hcost, 9, 9)):
        tr = make()
        for n in walk(toy):
            before = led.branch_calls
            tr.branch(n)
            assert led.branch_calls - before <= 2


def test_tree_size_limit(toy):
    assert tree_size(toy) == 7
    assert tree_size(toy, limit=3) == 4
    assert tree_size(trunc(B, toy, toy.hcost, 5)) == 0


def test_check_bnb_flags_breach():
    bad = ExplicitTree.from_nested((5, 5, [(4, 4, [])]))
    with pytest.raises(BnBConditionError):
        check_bnb(bad)


def star(costs, root_cost):
    n = len(costs)
    return ExplicitTree({(): n, **{(i,): 0 for i in range(n)}},
                        {(): root_cost, **{(i,): c for i, c in enumerate(costs)}}, depth_bound=1)


def test_binarize_identity_for_binary(toy):
    assert binarize(toy, 2) is toy
    with pytest.raises(ValueError):
        binarize(toy, 1)


def test_binarize_three_children():
    t = star([5, 6, 7], 4)
    b = binarize(t, 3)
    nodes = walk(b)
    assert len(nodes) == 5
    assert all(len(b.branch(n)) <= 2 for n in nodes)
    synth = [n for n in nodes if b.is_synthetic(n)]
    assert len(synth) == 1 and b.cost(synth[0]) == 4
    check_bnb(b)
    originals = sorted(b.original(n) for n in nodes if not b.is_synthetic(n))
    assert originals == [(), (0,), (1,), (2,)]


def test_binarize_star_depth():
    t = star([1, 2, 3, 4], 1)
    b = binarize(t, 4)
    assert b.depth_bound == 2
    assert max(len(n) for n in walk(b)) == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(3, 6))
def test_binarize_preserves_leaf_costs(seed, deg):
    rng = random.Random(seed)
    children, costs = {(): 0}, {(): rng.randint(1, 4)}
    frontier = [()]
    for _ in range(3):
        nxt = []
        for p in frontier:
            k = rng.randint(0, deg)
            children[p] = k
            for i in range(k):
                children[p + (i,)] = 0
                costs[p + (i,)] = costs[p] + rng.randint(0, 3)
                nxt.append(p + (i,))
        frontier = nxt
    t = ExplicitTree(children, costs, depth_bound=3)
    b = binarize(t, deg)
    nodes = walk(b)
    check_bnb(b)
    leaves_b = sorted(b.cost(n) for n in nodes if not b.branch(n))
    leaves_t = sorted(t.cost(n) for n in walk(t) if not t.branch(n))
    assert leaves_b == leaves_t
    assert max(len(n) for n in nodes) <= b.depth_bound
    originals = [b.original(n) for n in nodes if not b.is_synthetic(n)]
    assert sorted(originals) == sorted(walk(t))


def test_dump_load_roundtrip(toy):
    buf = io.StringIO()
    dump_tree(toy, buf)
    back = load_tree(io.StringIO(buf.getvalue()))
    assert walk(back) == walk(toy)
    assert all(back.cost(n) == toy.cost(n) and back.hcost(n) == toy.hcost(n) for n in walk(toy))


def test_load_rejects_missing_child():
    with pytest.raises(ValueError):
        load_tree(io.StringIO("- 1 1 2\n0 2 2 0\n"))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_tree_invariants(seed):
    t = random_tree(seed, max_depth=8, max_nodes=500)
    nodes = walk(t)
    assert len(nodes) == len(t) <= 500
    assert max(len(n) for n in nodes) <= t.depth_bound
    assert all(1 <= t.cost(n) <= t.c_max for n in nodes)
    assert all(len(t.branch(n)) <= 2 for n in nodes)
    check_bnb(t)
    assert random_tree(seed, max_depth=8, max_nodes=500).nodes() == t.nodes()


def test_ledger_sums_breakdown():
    led = QueryLedger()
    led.charge("qtsearch", 2.5, T=4)
    led.charge("qtsize", 1.5)
    assert led.charged_quantum == sum(a for _, _, a in led.charge_breakdown) == 4.0
    assert led.charges_by("qtsize") == 1.5
    with pytest.raises(ValueError):
        led.charge("qtsize", -1)
