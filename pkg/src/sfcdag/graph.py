"""Directed graphs over integer nodes: SCCs, condensation, ordering.

Everything here is deterministic.  Components are numbered by their
smallest member, and ties in orderings go to the smaller index.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional


class GraphError(ValueError):
    pass


class CycleError(RuntimeError):
    """A cycle where none can exist; signals a bug, not bad input."""


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    labels: tuple[str, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if len(self.labels) != self.n:
            raise GraphError(f"{len(self.labels)} labels for {self.n} nodes")
        for s, t in self.edges:
            if not (0 <= s < self.n and 0 <= t < self.n):
                raise GraphError(f"edge ({s}, {t}) out of range for n={self.n}")

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int]], labels: Optional[Iterable[str]] = None
    ) -> "DirectedGraph":
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        return cls(n, labels, frozenset(edges))

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for s, t in self.edges:
            out[s].append(t)
        return tuple(tuple(sorted(x)) for x in out)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for s, t in self.edges:
            out[t].append(s)
        return tuple(tuple(sorted(x)) for x in out)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None


@dataclass(frozen=True)
class DependencyGraph(DirectedGraph):
    """Dependency graph of a model; ``roles`` is endogenous/exogenous per node."""

    roles: tuple[str, ...] = ()


@dataclass(frozen=True)
class SccPartition:
    components: tuple[tuple[int, ...], ...]
    component_of: tuple[int, ...]
    nontrivial: tuple[bool, ...]

    def as_sets(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(c) for c in self.components)


@dataclass(frozen=True)
class Metanode:
    index: int
    members: tuple[int, ...]
    labels: tuple[str, ...]
    nontrivial: bool


@dataclass(frozen=True)
class CondensationDag:
    metanodes: tuple[Metanode, ...]
    meta_edges: tuple[tuple[int, int], ...]
    partition: SccPartition
    graph: DirectedGraph

    def as_graph(self) -> DirectedGraph:
        labels = tuple(f"SCC_{m.index}" for m in self.metanodes)
        return DirectedGraph(len(self.metanodes), labels, frozenset(self.meta_edges))


def tarjan_scc(g: DirectedGraph) -> SccPartition:
    """Tarjan's algorithm, iterative so deep chains do not hit the recursion limit."""
    index_of = [-1] * g.n
    lowlink = [0] * g.n
    on_stack = [False] * g.n
    stack: list[int] = []
    found: list[tuple[int, ...]] = []
    counter = 0
    succ = g.successors

    for root in range(g.n):
        if index_of[root] != -1:
            continue
        work = [(root, 0)]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index_of[w] == -1:
                    index_of[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    lowlink[v] = min(lowlink[v], index_of[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index_of[v]:
                members = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    members.append(w)
                    if w == v:
                        break
                found.append(tuple(sorted(members)))

    # Tarjan emits components in reverse topological order; renumber canonically.
    components = tuple(sorted(found, key=lambda c: c[0]))
    component_of = [0] * g.n
    for k, comp in enumerate(components):
        for v in comp:
            component_of[v] = k
    nontrivial = tuple(
        len(c) > 1 or (c[0], c[0]) in g.edges for c in components
    )
    return SccPartition(components, tuple(component_of), nontrivial)


def _reachable(adj, start: int) -> set[int]:
    seen: set[int] = set()
    frontier = list(adj[start])
    while frontier:
        v = frontier.pop()
        if v not in seen:
            seen.add(v)
            frontier.extend(adj[v])
    return seen


def condense(g: DirectedGraph, p: SccPartition) -> CondensationDag:
    """Contract each component of ``p`` into a metanode.

    ``p`` is checked against ``g``: it must partition the nodes, each part
    must be strongly connected, and the contracted graph must be acyclic
    (which fails exactly when some part is not maximal).
    """
    members = sorted(v for c in p.components for v in c)
    if members != list(range(g.n)) or len(p.component_of) != g.n:
        raise GraphError("partition does not cover every node exactly once")
    for k, comp in enumerate(p.components):
        if any(p.component_of[v] != k for v in comp):
            raise GraphError(f"component_of disagrees with component {k}")
        if len(comp) > 1:
            inside = set(comp)
            adj = [[w for w in g.successors[v] if w in inside] for v in range(g.n)]
            if not inside <= _reachable(adj, comp[0]) | {comp[0]}:
                raise GraphError(f"component {k} is not strongly connected")
            radj = [[w for w in g.predecessors[v] if w in inside] for v in range(g.n)]
            if not inside <= _reachable(radj, comp[0]) | {comp[0]}:
                raise GraphError(f"component {k} is not strongly connected")
        has_loop = len(comp) > 1 or (comp[0], comp[0]) in g.edges
        if p.nontrivial[k] != has_loop:
            raise GraphError(f"nontrivial flag wrong for component {k}")

    meta_edges = sorted(
        {
            (p.component_of[s], p.component_of[t])
            for s, t in g.edges
            if p.component_of[s] != p.component_of[t]
        }
    )
    metanodes = tuple(
        Metanode(k, comp, tuple(g.labels[v] for v in comp), p.nontrivial[k])
        for k, comp in enumerate(p.components)
    )
    dag = CondensationDag(metanodes, tuple(meta_edges), p, g)
    if not is_acyclic_nilpotency(dag.as_graph()):
        raise GraphError("partition components are not maximal: condensation has a cycle")
    return dag


def condensation(g: DirectedGraph) -> CondensationDag:
    return condense(g, tarjan_scc(g))


def _kahn(n: int, edges: Iterable[tuple[int, int]]) -> Optional[list[int]]:
    """Topological order with smallest-index tie-break; None if cyclic."""
    indegree = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for s, t in edges:
        succ[s].append(t)
        indegree[t] += 1
    ready = [v for v in range(n) if indegree[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in succ[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                heapq.heappush(ready, w)
    return order if len(order) == n else None


def topological_order(d: CondensationDag) -> list[int]:
    """Component indices, sources first.

    Component numbering follows smallest member, so breaking ties by
    component index is breaking them by smallest member node.
    """
    order = _kahn(len(d.metanodes), d.meta_edges)
    if order is None:
        raise CycleError("condensation graph has a cycle; this is a bug")
    return order


def graph_topological_order(g: DirectedGraph) -> Optional[list[int]]:
    """Topological order of ``g`` itself, or None when ``g`` has a cycle."""
    return _kahn(g.n, g.edges)


def is_acyclic_nilpotency(g: DirectedGraph) -> bool:
    """True iff the boolean adjacency matrix A has A^k = 0 for some k <= n.

    Rows are bitsets; row i of A^k is the set of nodes at the end of a walk
    of length k from i.  Any set diagonal bit means a closed walk, i.e. a
    cycle, so we stop early.
    """
    adj = [0] * g.n
    for s, t in g.edges:
        adj[s] |= 1 << t
    power = adj[:]
    for _ in range(g.n):
        if not any(power):
            return True
        if any(row >> i & 1 for i, row in enumerate(power)):
            return False
        nxt = []
        for row in power:
            acc = 0
            while row:
                low = row & -row
                acc |= adj[low.bit_length() - 1]
                row ^= low
            nxt.append(acc)
        power = nxt
    return not any(power)


def enumerate_cycles(g: DirectedGraph, max_nodes: int = 12) -> list[list[int]]:
    """Every elementary cycle once, each starting at its smallest node.

    Exhaustive search, for use as a test oracle on small graphs only.
    """
    if g.n > max_nodes:
        raise GraphError(
            f"enumerate_cycles refuses graphs with more than max_nodes={max_nodes} nodes "
            f"(got {g.n})"
        )
    cycles: list[list[int]] = []
    succ = g.successors
    for start in range(g.n):
        path = [start]
        on_path = {start}

        def extend(v: int) -> None:
            for w in succ[v]:
                if w == start:
                    cycles.append(list(path))
                elif w > start and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    extend(w)
                    path.pop()
                    on_path.discard(w)

        extend(start)
    return cycles


def descendants(g: DirectedGraph, node: int) -> set[int]:
    """Nodes reachable from ``node`` by a path of length at least one."""
    if not 0 <= node < g.n:
        raise IndexError(f"node {node} out of range for n={g.n}")
    return _reachable(g.successors, node)


def ancestors(g: DirectedGraph, node: int) -> set[int]:
    """Nodes with a path of length at least one into ``node``."""
    if not 0 <= node < g.n:
        raise IndexError(f"node {node} out of range for n={g.n}")
    return _reachable(g.predecessors, node)
