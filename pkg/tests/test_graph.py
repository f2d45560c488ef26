import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sfcdag.graph import (
    CycleError,
    DirectedGraph,
    GraphError,
    SccPartition,
    ancestors,
    condense,
    condensation,
    descendants,
    enumerate_cycles,
    graph_topological_order,
    is_acyclic_nilpotency,
    tarjan_scc,
    topological_order,
)
from sfcdag.synthetic import permute_graph, random_digraph


def G(n, edges, labels=None):
    return DirectedGraph.from_edges(n, edges, labels)


def closure(g):
    """reach[i][j]: path of length >= 1 from i to j (Floyd-Warshall)."""
    reach = [[(i, j) in g.edges for j in range(g.n)] for i in range(g.n)]
    for k in range(g.n):
        for i in range(g.n):
            if reach[i][k]:
                for j in range(g.n):
                    reach[i][j] = reach[i][j] or reach[k][j]
    return reach


def scc_oracle(g):
    reach = closure(g)
    comps = {}
    for v in range(g.n):
        key = frozenset([v] + [w for w in range(g.n) if reach[v][w] and reach[w][v]])
        comps[v] = key
    return frozenset(comps.values())


def trace_oracle(g):
    """Closed walks exist iff some trace of A^k (k = 1..n) is nonzero.

    Integer counterpart of every eigenvalue of A being zero: the traces are
    the power sums of the eigenvalues.
    """
    a = np.zeros((g.n, g.n), dtype=np.int64)
    for s, t in g.edges:
        a[s, t] = 1
    power = np.eye(g.n, dtype=np.int64)
    for _ in range(g.n):
        power = np.minimum(power @ a, 1)
        if np.trace(power):
            return False
    return True


graphs = st.integers(0, 10).flatmap(
    lambda n: st.builds(
        lambda edges: G(n, edges),
        st.sets(st.tuples(st.integers(0, max(n - 1, 0)), st.integers(0, max(n - 1, 0))))
        if n
        else st.just(set()),
    )
)


# --- examples ---------------------------------------------------------------


def test_two_cycle_plus_tail():
    # 0 <-> 1, then 1 -> 2
    p = tarjan_scc(G(3, {(0, 1), (1, 0), (1, 2)}))
    assert p.components == ((0, 1), (2,))
    assert p.nontrivial == (True, False)
    assert p.component_of == (0, 0, 1)


def test_empty_graph_all_trivial():
    p = tarjan_scc(G(4, set()))
    assert p.components == ((0,), (1,), (2,), (3,))
    assert p.nontrivial == (False,) * 4


def test_self_loop_is_nontrivial():
    p = tarjan_scc(G(1, {(0, 0)}))
    assert p.components == ((0,),) and p.nontrivial == (True,)


def test_condense_two_cycle():
    d = condensation(G(3, {(0, 1), (1, 0), (1, 2)}))
    assert [m.members for m in d.metanodes] == [(0, 1), (2,)]
    assert d.meta_edges == ((0, 1),)


def test_condense_acyclic_chain_is_identity():
    g = G(3, {(0, 1), (1, 2)})
    d = condensation(g)
    assert [m.members for m in d.metanodes] == [(0,), (1,), (2,)]
    assert set(d.meta_edges) == set(g.edges)


def test_condense_rejects_inconsistent_partitions():
    g = G(3, {(0, 1), (1, 0), (1, 2)})
    with pytest.raises(GraphError, match="cover"):
        condense(g, SccPartition(((0, 1),), (0, 0, 0), (True,)))
    with pytest.raises(GraphError, match="not strongly connected"):
        condense(g, SccPartition(((0, 1, 2),), (0, 0, 0), (True,)))
    with pytest.raises(GraphError, match="not maximal"):
        condense(g, SccPartition(((0,), (1,), (2,)), (0, 1, 2), (False, False, False)))


def test_topological_order_examples():
    assert topological_order(condensation(G(2, {(0, 1)}))) == [0, 1]
    # two isolated metanodes with smallest members 0 and 3
    d = condensation(G(4, {(1, 2), (2, 1), (3, 3)}))
    assert d.metanodes[0].members == (0,) and d.metanodes[2].members == (3,)
    assert topological_order(d)[0] == 0
    # diamond 0->1, 0->2, 1->3, 2->3
    assert topological_order(condensation(G(4, {(0, 1), (0, 2), (1, 3), (2, 3)}))) == [0, 1, 2, 3]
    # tie-break goes by smallest member, not by insertion
    assert topological_order(condensation(G(3, {(2, 0)}))) == [1, 2, 0]


def test_topological_order_flags_a_cycle_as_a_bug():
    d = condensation(G(2, {(0, 1)}))
    broken = type(d)(d.metanodes, ((0, 1), (1, 0)), d.partition, d.graph)
    with pytest.raises(CycleError):
        topological_order(broken)


@pytest.mark.parametrize(
    "n, edges, expected",
    [
        (3, {(0, 1), (1, 2), (2, 0)}, False),
        (3, {(0, 1), (1, 2)}, True),
        (1, {(0, 0)}, False),
        (0, set(), True),
    ],
)
def test_nilpotency(n, edges, expected):
    assert is_acyclic_nilpotency(G(n, edges)) is expected


def test_enumerate_cycles_examples():
    assert enumerate_cycles(G(3, {(0, 1), (1, 2), (2, 0)})) == [[0, 1, 2]]
    assert enumerate_cycles(G(3, {(0, 1), (1, 0), (1, 2), (2, 1)})) == [[0, 1], [1, 2]]
    assert enumerate_cycles(G(3, {(0, 1), (1, 2)})) == []
    assert enumerate_cycles(G(1, {(0, 0)})) == [[0]]


def test_enumerate_cycles_guard():
    with pytest.raises(GraphError, match="max_nodes=12"):
        enumerate_cycles(G(13, set()))
    assert enumerate_cycles(G(13, set()), max_nodes=13) == []


def test_enumerate_cycles_complete_graph_count():
    # K_4 with both directions: sum over k of C(4,k) (k-1)! elementary cycles
    g = G(4, {(i, j) for i in range(4) for j in range(4) if i != j})
    expected = sum(math.comb(4, k) * math.factorial(k - 1) for k in (2, 3, 4))
    assert len(enumerate_cycles(g)) == expected == 20


def test_reachability_examples():
    output_eq = G(3, {(1, 0), (2, 0)}, ["Y", "C", "G"])
    assert descendants(output_eq, 2) == {0}
    assert ancestors(output_eq, 0) == {1, 2}
    chain = G(3, {(0, 1), (1, 2)})
    assert descendants(chain, 0) == {1, 2}
    assert ancestors(chain, 2) == {0, 1}
    lone = G(2, {(0, 0)})
    assert descendants(lone, 1) == set() and ancestors(lone, 1) == set()
    assert descendants(lone, 0) == {0}
    with pytest.raises(IndexError):
        descendants(chain, 3)
    with pytest.raises(IndexError):
        ancestors(chain, -1)


def test_graph_rejects_bad_edges():
    with pytest.raises(GraphError):
        G(2, {(0, 2)})


def test_long_chain_does_not_recurse():
    n = 5000
    g = G(n, {(i, i + 1) for i in range(n - 1)} | {(n - 1, 0)})
    assert tarjan_scc(g).components == (tuple(range(n)),)


# --- properties -------------------------------------------------------------


@given(graphs)
def test_tarjan_matches_closure_oracle(g):
    p = tarjan_scc(g)
    assert p.as_sets() == scc_oracle(g)
    assert sorted(v for c in p.components for v in c) == list(range(g.n))
    assert [c[0] for c in p.components] == sorted(c[0] for c in p.components)


@given(graphs)
def test_condensation_is_acyclic(g):
    d = condensation(g)
    assert is_acyclic_nilpotency(d.as_graph())
    order = topological_order(d)
    pos = {k: i for i, k in enumerate(order)}
    assert all(pos[a] < pos[b] for a, b in d.meta_edges)
    assert all(a != b for a, b in d.meta_edges)
    assert len(set(d.meta_edges)) == len(d.meta_edges)


@given(graphs, st.randoms(use_true_random=False))
def test_partition_is_canonical_under_permutation(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = permute_graph(g, perm)
    p, q = tarjan_scc(g), tarjan_scc(h)
    assert q.as_sets() == frozenset(frozenset(perm[v] for v in c) for c in p.as_sets())
    # condensations are isomorphic under the induced component map
    dg, dh = condensation(g), condensation(h)
    comp_map = {k: q.component_of[perm[c[0]]] for k, c in enumerate(p.components)}
    assert {(comp_map[a], comp_map[b]) for a, b in dg.meta_edges} == set(dh.meta_edges)


@given(graphs)
def test_acyclicity_criteria_agree(g):
    nil = is_acyclic_nilpotency(g)
    assert nil == trace_oracle(g)
    assert nil == (not any(tarjan_scc(g).nontrivial))
    assert nil == (graph_topological_order(g) is not None)
    assert nil == (enumerate_cycles(g) == [])


@given(graphs)
def test_cycles_lie_in_one_component(g):
    p = tarjan_scc(g)
    for cycle in enumerate_cycles(g):
        assert len({p.component_of[v] for v in cycle}) == 1
        assert p.nontrivial[p.component_of[cycle[0]]]
        assert cycle[0] == min(cycle)


@given(graphs)
def test_reachability_duality_and_oracle(g):
    reach = closure(g)
    for i in range(g.n):
        down = descendants(g, i)
        assert down == {j for j in range(g.n) if reach[i][j]}
        for j in range(g.n):
            assert (j in down) == (i in ancestors(g, j))


def test_partition_on_large_random_graphs():
    rng = random.Random(7)
    for _ in range(20):
        g = random_digraph(rng, rng.randint(50, 200), rng.choice([0.005, 0.01, 0.03]))
        p = tarjan_scc(g)
        assert sorted(v for c in p.components for v in c) == list(range(g.n))
        condense(g, p)
