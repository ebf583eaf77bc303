import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linerecon.engine import (
    Cluster,
    ClusterClosure,
    CycleCertificate,
    EngineParams,
    EngineState,
    augment,
    bootstrap_positions,
    certified_full,
    certify_cycle,
    closure_of,
    cycle_sign_solutions,
    deduce_cycle_distances,
    grow_clusters,
    online_update,
    reconstruct,
)
from linerecon.engine import _signs_dfs
from linerecon.errors import InconsistentDeduction
from linerecon.graph import (
    DistanceGraph,
    enumerate_short_cycles,
    observe_distances,
    random_schedule,
    sample_gnp,
)
from linerecon.oracle import deducible_pairs
from linerecon.pointset import gen_generic, gen_product_construction, gen_progression, make_point_set

Eager = EngineParams(edge_budget=0)


def brute_signs(d, dk):
    return sorted(
        (s for s in itertools.product((1, -1), repeat=len(d)) if sum(a * b for a, b in zip(s, d)) == dk),
        reverse=True,
    )


def cycle_graph(coords):
    V = make_point_set(coords)
    k = len(coords)
    return V, observe_distances(V, [(i, (i + 1) % k) for i in range(k)])


def sound(cluster, V):
    """Cluster positions equal true coordinates up to one isometry."""
    true = [V.coords[m] for m in cluster.members]
    return Cluster.from_positions(dict(zip(cluster.members, true))) == cluster


@st.composite
def observed(draw, min_n=3, max_n=9, progression=None):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32))
    prog = draw(st.booleans()) if progression is None else progression
    V = gen_progression(n) if prog else gen_generic(n, seed)
    p = draw(st.sampled_from([0.2, 0.35, 0.5, 0.7, 1.0]))
    return V, observe_distances(V, sample_gnp(n, p, seed + 1))


# -- naive reference closure ------------------------------------------------------------


def reference_clusters(G):
    """Merge rule applied by brute force over all cluster pairs until nothing changes."""
    adj = G.adj
    clusters = [{u: 0, v: d} for u, v, d in G.edges()]
    changed = True
    while changed:
        changed = False
        for i, j in itertools.permutations(range(len(clusters)), 2):
            A, B = clusters[i], clusters[j]
            shared = [w for w in B if w in A]
            cross = [(x, y, adj[x][y]) for x in B if x not in A for y in adj[x] if y in A and y not in B]
            if not shared and len(cross) < 2:
                continue
            if shared:
                w = shared[0]
                cands = [(s, A[w] - s * B[w]) for s in (1, -1)]
            else:
                x, y, d = cross[0]
                cands = [(s, A[y] + e * d - s * B[x]) for s in (1, -1) for e in (1, -1)]
            good = []
            for s, t in set(cands):
                moved = {x: s * q + t for x, q in B.items()}
                if any(A[w] != moved[w] for w in shared):
                    continue
                if any(abs(moved[x] - A[y]) != d for x, y, d in cross):
                    continue
                union = {**A, **moved}
                if len(set(union.values())) != len(union):
                    continue
                good.append(union)
            if len(good) == 1:
                clusters = [c for k, c in enumerate(clusters) if k not in (i, j)] + [good[0]]
                changed = True
                break
    return sorted({Cluster.from_positions(c) for c in clusters}, key=lambda c: c.members)


# -- sign vectors -----------------------------------------------------------------------


@pytest.mark.parametrize(
    "d,dk,expected",
    [
        ((1, 2), 3, [(1, 1)]),
        ((1, 2, 1), 2, [(1, 1, -1), (-1, 1, 1)]),
        ((1, 2, 3), 6, [(1, 1, 1)]),
        ((1, 1), 5, []),
    ],
)
def test_sign_examples(d, dk, expected):
    assert cycle_sign_solutions(d, dk) == expected


@given(st.lists(st.integers(1, 12), min_size=2, max_size=9), st.integers(-30, 30))
def test_signs_match_brute_force(d, dk):
    assert cycle_sign_solutions(d, dk) == brute_signs(d, dk)
    assert cycle_sign_solutions(d, dk, limit=1) == brute_signs(d, dk)[:1]


@settings(max_examples=8)
@given(st.lists(st.integers(1, 400), min_size=21, max_size=22), st.integers(-60, 60))
def test_split_search_matches_depth_first(d, dk):
    # the public entry point switches to the split search above 20 terms
    full = cycle_sign_solutions(d, dk)
    assert full == _signs_dfs(d, dk, None)
    some = cycle_sign_solutions(d, dk, limit=2)
    assert len(some) == min(2, len(full)) and set(some) <= set(full)


def test_signs_reject_nonpositive():
    with pytest.raises(ValueError):
        cycle_sign_solutions((1, 0), 1)


# -- certificates -------------------------------------------------------------------------


def test_certify_examples():
    _, tri = cycle_graph([0, 1, 3])
    cert = certify_cycle((0, 1, 2), tri)
    assert cert.signs == (1, 1) and cert.distances == (1, 2, 3)
    assert deduce_cycle_distances(cert) == []
    _, par = cycle_graph([0, 1, 3, 2])
    assert certify_cycle((0, 1, 2, 3), par) is None


@given(st.integers(1, 50), st.integers(1, 50))
def test_triangles_always_certify(a, b):
    if a == b:
        return
    _, tri = cycle_graph([0, a, a + b])
    assert certify_cycle((0, 1, 2), tri) is not None


def test_deduce_four_cycle():
    _, G = cycle_graph([0, 1, 3, 6])
    cert = certify_cycle((0, 1, 2, 3), G)
    assert cert.signs == (1, 1, 1)
    assert dict(deduce_cycle_distances(cert)) == {(0, 2): 3, (1, 3): 5}


def test_deduce_five_cycle():
    _, G = cycle_graph([0, 1, 3, 6, 10])
    cert = certify_cycle((0, 1, 2, 3, 4), G)
    assert dict(deduce_cycle_distances(cert)) == {(0, 2): 3, (0, 3): 6, (1, 3): 5, (1, 4): 9, (2, 4): 7}


def test_certificate_validation():
    with pytest.raises(ValueError):
        CycleCertificate((0, 1, 2), (1, 2, 3), (1, -1))
    with pytest.raises(ValueError):
        CycleCertificate((0, 1), (1, 1), (1,))


@given(observed(max_n=8))
def test_certificates_exact_and_unique(case):
    V, G = case
    for c in enumerate_short_cycles(G, 6):
        cert = certify_cycle(c, G)
        dist = [G.distance(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]
        assert (cert is not None) == (len(brute_signs(dist[:-1], dist[-1])) == 1)
        if cert is not None:
            for (a, b), x in deduce_cycle_distances(cert):
                assert x == abs(V.coords[a] - V.coords[b])


# -- augment --------------------------------------------------------------------------------


def test_augment_examples():
    _, G = cycle_graph([0, 1, 3, 6])
    H = augment(G, [((0, 2), 3)])
    assert H.num_edges == 5 and H.is_deduced(0, 2)
    assert augment(H, [((2, 0), 3)]) == H
    assert augment(G, [((0, 1), 1)]) == G
    with pytest.raises(InconsistentDeduction):
        augment(G, [((0, 1), 4)])
    with pytest.raises(InconsistentDeduction):
        augment(G, [((0, 2), 3), ((0, 2), 4)])


# -- cluster growth ------------------------------------------------------------------------


def test_grow_examples():
    V = make_point_set([0, 1, 2])
    full = grow_clusters(observe_distances(V, itertools.combinations(range(3), 2)))
    assert full == [Cluster((0, 1, 2), (0, 1, 2))]
    # reflection occupancy: candidate 0 for label 2 is taken
    assert grow_clusters(observe_distances(V, [(0, 1), (2, 1)])) == [Cluster((0, 1, 2), (0, 1, 2))]
    W = make_point_set([0, 1, 5])
    assert max(len(c) for c in grow_clusters(observe_distances(W, [(0, 1), (1, 2)]))) == 2


def test_two_neighbour_absorption():
    V = make_point_set([0, 3, 7, 12])
    G = observe_distances(V, [(0, 1), (1, 2), (0, 2), (3, 0), (3, 2)])
    assert grow_clusters(G) == [Cluster((0, 1, 2, 3), (0, 3, 7, 12))]


def test_cluster_canonical_frame():
    c = Cluster.from_positions({4: 10, 2: 7, 9: 0})
    assert c.members == (2, 4, 9) and c.positions == (0, 3, -7)
    assert c.relpos == {2: 0, 4: 3, 9: -7}


def test_closure_rejects_conflict():
    cl = ClusterClosure(3)
    cl.add_edge(0, 1, 2)
    assert not cl.add_edge(1, 0, 2)
    with pytest.raises(InconsistentDeduction):
        cl.add_edge(0, 1, 3)


@given(observed(max_n=8))
def test_closure_matches_reference(case):
    _, G = case
    assert grow_clusters(G) == reference_clusters(G)


@given(observed(max_n=10), st.randoms(use_true_random=False))
def test_closure_order_independent(case, rnd):
    _, G = case
    edges = list(G.edges())
    rnd.shuffle(edges)
    cl = ClusterClosure(G.n)
    for u, v, d in edges:
        cl.add_edge(v, u, d, close=rnd.random() < 0.5)
    cl.close()
    assert cl.clusters() == grow_clusters(G)


@given(observed(max_n=12))
def test_clusters_sound_and_overlap_at_most_one(case):
    V, G = case
    clusters = grow_clusters(G)
    for c in clusters:
        assert sound(c, V)
        assert len(set(c.positions)) == len(c)
    for a, b in itertools.combinations(clusters, 2):
        assert len(set(a.members) & set(b.members)) <= 1


# -- pipeline ---------------------------------------------------------------------------


def test_reconstruct_examples():
    V = gen_generic(9, 3)
    assert reconstruct(observe_distances(V, itertools.combinations(range(9), 2))).full
    W = make_point_set([0, 1, 3])
    rep = reconstruct(observe_distances(W, [(0, 1), (1, 2)]))
    assert rep.largest == 2 and not rep.full
    P, pairs = gen_product_construction(2, 3)
    assert reconstruct(observe_distances(P, pairs)).largest == 2


def test_reconstruct_uses_chords():
    # a certified pentagon gains its chords and becomes rigid
    _, G = cycle_graph([0, 1, 3, 6, 10])
    assert not closure_of(G).full
    rep = reconstruct(G, EngineParams(cycle_cap=5))
    assert rep.full and len(rep.deduced) > 0
    assert not reconstruct(G, EngineParams(cycle_cap=4)).full


def test_square_rigid_without_chords():
    # two disjoint pairs joined by two distances align uniquely
    _, G = cycle_graph([0, 1, 3, 6])
    assert closure_of(G).full


def test_report_json():
    V = make_point_set([0, 1, 3])
    data = json.loads(reconstruct(observe_distances(V, [(0, 1), (1, 2)])).to_json())
    assert data["largest"] == 2 and data["full"] is False
    assert data["clusters"] == [{"0": 0, "1": 1}, {"1": 0, "2": 2}]


@given(observed(max_n=9))
def test_reconstruct_sound_against_oracle(case):
    V, G = case
    rep = reconstruct(G, EngineParams(cycle_cap=5))
    ded = deducible_pairs(G)
    for c in rep.clusters:
        assert sound(c, V)
        assert all(p in ded for p in itertools.combinations(c.members, 2))
    assert not rep.full or rep.largest == V.n


@given(st.integers(3, 60), st.integers(0, 2**32), st.sampled_from([0.3, 0.6, 1.0]))
def test_bootstrap_sound_and_dense_matches_sparse(n, seed, p):
    V = gen_generic(n, seed)
    G = observe_distances(V, sample_gnp(n, p, seed))
    a = bootstrap_positions(G, dense=True)
    b = bootstrap_positions(G, dense=False)
    assert (a is None) == (b is None)
    if a is not None:
        assert np.array_equal(a, b)
        assert sound(Cluster.from_positions(dict(enumerate(a.tolist()))), V)
        assert closure_of(G).full


def test_bootstrap_declines_isolated():
    V = make_point_set([0, 1, 3, 7])
    assert bootstrap_positions(observe_distances(V, [(0, 1), (1, 2), (0, 2)])) is None


# -- online engine -------------------------------------------------------------------------


def test_online_examples():
    state = EngineState(3, Eager)
    online_update(state, (0, 1), 1)
    assert max(len(c) for c in state.certified_clusters()) == 2
    assert not certified_full(state)
    online_update(state, (2, 1), 1)
    assert certified_full(state)


def test_online_two_neighbour_absorption():
    V = make_point_set([0, 2, 7])
    state = EngineState(3, Eager)
    for u, v in [(0, 1), (2, 0)]:
        state.online_update(u, v, abs(V.coords[u] - V.coords[v]))
    assert not state.certified_full()
    state.online_update(2, 1, 5)
    assert state.certified_full()


def test_online_rejects_repeat_and_bad_pairs():
    state = EngineState(4, Eager)
    state.online_update(0, 1, 3)
    with pytest.raises(ValueError):
        state.online_update(1, 0, 3)
    with pytest.raises(ValueError):
        state.online_update(2, 2, 1)


def test_online_budget_phase():
    V = gen_generic(6, 1)
    s = random_schedule(6, 2)
    state = EngineState(6, EngineParams(edge_budget=10))
    for t, (u, v) in enumerate(s.pairs()):
        state.online_update(u, v, abs(V.coords[u] - V.coords[v]))
        if t + 1 < 10:
            assert state.certified_clusters() == [] and not state.certified_full()
    assert state.certified_full()


def test_default_budget():
    assert EngineParams().resolve(100)[1] == 4200
    assert EngineParams().resolve(10)[1] == 45
    with pytest.raises(ValueError):
        EngineParams(cycle_cap=2).resolve(10)


@given(
    st.integers(3, 11),
    st.integers(0, 2**32),
    st.booleans(),
    st.sampled_from([0, 4, 12]),
    st.sampled_from([None, 3, 5]),
)
def test_online_batch_equivalence(n, seed, prog, budget, L):
    V = gen_progression(n) if prog else gen_generic(n, seed)
    s = random_schedule(n, seed)
    params = EngineParams(edge_budget=budget, cycle_cap=L)
    state = EngineState(n, params)
    previous = []
    for t, (u, v) in enumerate(s.pairs()):
        state.online_update(u, v, abs(V.coords[u] - V.coords[v]))
        if t + 1 < budget:
            continue
        G = s.prefix_graph(V, t + 1)
        batch = reconstruct(G, params)
        online = state.certified_clusters()
        if batch.full:
            assert state.certified_full()
        else:
            assert online == batch.clusters
        # membership never shrinks
        for old in previous:
            assert any(set(old) <= set(c.members) for c in online)
        previous = [c.members for c in online]


def test_report_roundtrip_and_invariants():
    V = gen_generic(30, 5)
    G = observe_distances(V, sample_gnp(30, 0.15, 6))
    rep = reconstruct(G)
    assert rep.certified_fraction == rep.largest / 30
    assert json.loads(rep.to_json())["deduced_edges"] == len(rep.deduced)
    for c in rep.clusters:
        assert sound(c, V)
