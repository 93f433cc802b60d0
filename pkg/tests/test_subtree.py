import math

import pytest
from hypothesis import given, settings, strategies as st

from qbnb.classical import classical_bnb, explore_all, first_k
from qbnb.heuristics import LocalHcost, depth_first, total_order
from qbnb.primitives import EstimatorMode
from qbnb.solvers import prepare
from qbnb.subtree import (EPS, InsufficientNodes, NoneAboveThreshold, SubtreeCertificate, kthcost,
                          nextcost, qsubtree, qsubtree_local, verify_certificate)
from qbnb.tree import ExplicitTree, QueryLedger, random_tree, trunc, walk

from conftest import A, B, C, E, F, G, R, toy_tree


def kth(t, sub, k, mode=None, eps=EPS):
    return kthcost(sub, t, t.depth_bound, t.hcost, 8, k, eps, 0.1, QueryLedger(), mode=mode)


def nxt(t, sub, c):
    return nextcost(sub, t, t.depth_bound, t.hcost, 8, 16, c, 0.1, QueryLedger())


def test_kthcost_examples(toy):
    assert kth(toy, A, 2) == 8
    assert kth(toy, A, 0) == toy.hcost(A) + 1
    assert kth(toy, B, 0) == 6
    # minimal threshold with two of {5, 6, 8} strictly below it
    assert kth(toy, B, 1) == 7
    with pytest.raises(InsufficientNodes):
        kth(toy, A, 3)


def test_kthcost_charges_per_iteration(toy):
    led = QueryLedger()
    kthcost(A, toy, 2, toy.hcost, 8, 1, EPS, 0.1, led)
    iters = math.ceil(math.log2(8 + 2))
    sizes = [a for name, _, a in led.charge_breakdown if name == "qtsize"]
    assert 1 <= len(sizes) <= iters + 1
    assert all(p["delta"] == pytest.approx(0.1 / iters) for _, p, _ in led.charge_breakdown)


def test_nextcost_examples(toy):
    assert nxt(toy, B, 6) == 6
    assert nxt(toy, B, 7) == 8
    assert nxt(toy, B, 1) == 5
    assert nxt(toy, R, 4) == 5
    with pytest.raises(NoneAboveThreshold):
        nxt(toy, B, 9)


def test_nextcost_single_minleaf_charge(toy):
    led = QueryLedger()
    nextcost(B, toy, 2, toy.hcost, 8, 16, 6, 0.1, led)
    assert [(n, p["c_max"]) for n, p, _ in led.charge_breakdown] == [("qtminleaf", 9)]


def sorted_h(t, sub, hc):
    return sorted(hc(x) for x in walk(t, sub))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 40))
def test_kthcost_matches_sorted_list(seed, k):
    t = random_tree(seed, max_nodes=400)
    hc = total_order(LocalHcost(t.hcost, t.c_max), t)
    sub = walk(t)[seed % len(t)]
    hs = sorted_h(t, sub, hc)
    args = (sub, t, t.depth_bound, hc, hc.h_max, k, EPS, 0.1, QueryLedger())
    if k >= len(hs):
        with pytest.raises(InsufficientNodes):
            kthcost(*args)
    else:
        assert kthcost(*args) == hs[k] + 1
    c = hs[seed % len(hs)] - seed % 3
    above = [h for h in hs if h >= c]
    nargs = (sub, t, t.depth_bound, hc, hc.h_max, 2 * len(hs) + 1, c, 0.1, QueryLedger())
    if above:
        assert nextcost(*nargs) == above[0]
    else:
        with pytest.raises(NoneAboveThreshold):
            nextcost(*nargs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 60))
def test_kthcost_adversarial_contract(seed, k):
    t = random_tree(seed, max_nodes=400)
    hc = total_order(LocalHcost(t.hcost, t.c_max), t)
    hs = sorted_h(t, (), hc)
    band = k * (1 + EPS) ** 2
    mode = EstimatorMode("adversarial", seed)
    try:
        c = kthcost((), t, t.depth_bound, hc, hc.h_max, k, EPS, 0.1, QueryLedger(), mode=mode)
    except InsufficientNodes:
        assert len(hs) < band or len(hs) <= k
        return
    below = sum(h < c for h in hs)
    assert below > k
    assert sum(h < c - 1 for h in hs) < max(band, k + 1)
    assert below <= max(k + 1, math.ceil(band))


def cert_nodes(t, hc, cert):
    return set(walk(cert.oracle(t, hc)))


def toy_setup():
    t = toy_tree()
    hc = total_order(LocalHcost(t.hcost, 8), t)
    return t, hc, explore_all(t, hc)


def test_qsubtree_local_m0_contains_root():
    t, hc, trace = toy_setup()
    cert = qsubtree_local(R, 0, t, hc, 2, hc.h_max, 0.1)
    nodes = cert_nodes(t, hc, cert)
    assert R in nodes and len(nodes) <= 4


def test_qsubtree_m0_is_root_only():
    t, hc, _ = toy_setup()
    assert cert_nodes(t, hc, qsubtree(t, hc, 0, 2, hc.h_max, 0.1)) == {R}


def test_initial_thresholds_certify_root():
    t, hc, _ = toy_setup()
    cert = SubtreeCertificate(R, hc(A), hc(B), 0, 4, A, B)
    assert cert_nodes(t, hc, cert) == {R}


def test_qsubtree_toy_m1_m2_m3():
    t, hc, trace = toy_setup()
    for m in (1, 2):
        cert = qsubtree(t, hc, m, 2, hc.h_max, 0.1)
        nodes = cert_nodes(t, hc, cert)
        assert first_k(trace, 2 ** m) <= nodes
        assert len(nodes) <= 4 * 2 ** m
    assert first_k(trace, 4) == {R, A, B, C}
    cert = qsubtree(t, hc, 3, 2, hc.h_max, 0.1)
    assert cert_nodes(t, hc, cert) == set(walk(t))
    assert cert.saturated


def test_qsubtree_dfs_on_path():
    path = ExplicitTree.from_nested((1, 1, [(1, 1, [(1, 1, [(1, 1, [(1, 1, [])])])])]))
    lifted, hc = prepare(path, depth_first())
    trace = explore_all(lifted, hc)
    cert = qsubtree(lifted, hc, 2, lifted.depth_bound, hc.h_max, 0.1)
    nodes = set(walk(cert.oracle(lifted, hc)))
    assert first_k(trace, 4) <= nodes and len(nodes) <= 16


def test_qsubtree_rejects_wide_root():
    t = ExplicitTree({(): 3, (0,): 0, (1,): 0, (2,): 0}, {(): 1, (0,): 1, (1,): 1, (2,): 1})
    hc = total_order(LocalHcost(t.hcost, 1), t)
    with pytest.raises(ValueError):
        qsubtree(t, hc, 1, 1, hc.h_max, 0.1)


def test_verify_certificate_reports():
    t, hc, trace = toy_setup()
    full = SubtreeCertificate(R, hc.h_max + 1, hc.h_max + 1, 3, 32, A, B)
    r = verify_certificate(full.oracle(t, hc), trace, 3)
    assert r == {"contains_first": True, "node_count": 7, "valid_fraction": 1.0}
    bad = SubtreeCertificate(R, 0, hc.h_max + 1, 2, 16, A, B)
    r = verify_certificate(bad.oracle(t, hc), trace, 2)
    assert not r["contains_first"]
    m1 = qsubtree(t, hc, 1, 2, hc.h_max, 0.1)
    r = verify_certificate(m1.oracle(t, hc), trace, 1)
    assert r["contains_first"] and r["node_count"] <= 8


def corpus_case(seed, modename):
    t = random_tree(seed)
    hc = total_order(LocalHcost(t.hcost, t.c_max), t)
    full = explore_all(t, hc)
    return t, hc, full


@pytest.mark.parametrize("modename", ["exact", "adversarial"])
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_certificate_containment_and_size(modename, seed):
    t, hc, full = corpus_case(seed, modename)
    m = 0
    while 2 ** m <= 2 * full.Q:
        mode = EstimatorMode() if modename == "exact" else EstimatorMode("adversarial", seed + m)
        cert = qsubtree(t, hc, m, t.depth_bound, hc.h_max, 0.1, mode=mode)
        r = verify_certificate(cert.oracle(t, hc), full, m)
        assert r["contains_first"], (seed, m)
        assert r["node_count"] <= 4 * 2 ** m, (seed, m)
        if cert.state is not None:
            assert cert.state.max_m <= m + 3
        m += 1


@pytest.mark.parametrize("modename", ["exact", "adversarial"])
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_invalid_nodes_stay_in_other_subtree(modename, seed):
    t = random_tree(seed, max_nodes=1500)
    if len(t.branch(())) != 2:
        return
    hc = total_order(LocalHcost(t.hcost, t.c_max), t)
    order = explore_all(t, hc).pops
    pos = {n: i for i, n in enumerate(order)}
    seen = []

    def probe(st_, kids):
        S = {()}
        for i in (0, 1):
            S |= set(walk(trunc(kids[i], t, hc, st_.c[i])))
        first_missing = next((i for i, x in enumerate(order) if x not in S), len(order))
        other = kids[1 - st_.current]
        for x in S:
            if pos[x] > first_missing:
                assert x[:len(other)] == other
        seen.append(1)

    for m in range(0, 7):
        mode = EstimatorMode() if modename == "exact" else EstimatorMode("adversarial", seed + m)
        qsubtree_local((), m, t, hc, t.depth_bound, hc.h_max, 0.1, mode=mode, probe=probe)


def test_charge_ratio_is_bounded():
    ratios = []
    for seed in range(30):
        t, hc, full = corpus_case(seed, "exact")
        for m in range(1, 9):
            led = QueryLedger()
            delta = 0.1
            cert = qsubtree(t, hc, m, t.depth_bound, hc.h_max, delta, led)
            dp = delta / (8 * (m + 3))
            norm = math.sqrt(2 ** m) * t.depth_bound * math.log(hc.h_max) * math.log(1 / dp) ** 2
            ratios.append(led.charged_quantum / norm)
            if cert.chain_limit is None and not cert.saturated:
                assert led.charged_quantum > 0
    worst = max(ratios)
    print(f"max charge / (sqrt(2^m) d ln(h_max) ln^2(1/delta')) = {worst:.1f}")
    assert math.isfinite(worst)
