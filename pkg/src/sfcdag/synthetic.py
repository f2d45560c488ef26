"""Seeded random graphs and models for property tests and benchmarks."""

from __future__ import annotations

import random

from .expr import BinOp, Const, Expr, VarRef
from .graph import DirectedGraph
from .model import Equation, ExoDecl, Model, VariableDecl


def random_digraph(rng: random.Random, n: int, p: float) -> DirectedGraph:
    """Each ordered pair (self-loops included) is an edge with probability ``p``."""
    edges = [(s, t) for s in range(n) for t in range(n) if rng.random() < p]
    return DirectedGraph.from_edges(n, edges)


def permute_graph(g: DirectedGraph, perm: list[int]) -> DirectedGraph:
    """Relabel node ``v`` as ``perm[v]``."""
    labels = [""] * g.n
    for v, label in enumerate(g.labels):
        labels[perm[v]] = label
    return DirectedGraph(g.n, tuple(labels), frozenset((perm[s], perm[t]) for s, t in g.edges))


def _sum(terms: list[Expr]) -> Expr:
    if not terms:
        return Const(0.0)
    out = terms[0]
    for term in terms[1:]:
        out = BinOp("+", out, term)
    return out


def linear_model(
    coefficients: list[list[float]],
    exo_weights: list[float],
    constants: list[float],
    exo_value: float = 1.0,
    name: str = "linear",
) -> Model:
    """Model ``x_i = sum_j a_ij x_j + b_i u + c_i`` with a single exogenous ``u``.

    Zero coefficients are left out of the equation, so they create no edge.
    """
    n = len(coefficients)
    names = [f"x{i}" for i in range(n)]
    equations = []
    for i, row in enumerate(coefficients):
        terms: list[Expr] = [
            BinOp("*", Const(a), VarRef(names[j])) for j, a in enumerate(row) if a != 0.0
        ]
        terms.append(BinOp("*", Const(exo_weights[i]), VarRef("u")))
        terms.append(Const(constants[i]))
        equations.append(Equation(names[i], _sum(terms)))
    return Model(
        name=name,
        endogenous=tuple(VariableDecl(x) for x in names),
        exogenous=(ExoDecl("u", (exo_value,)),),
        parameters=(),
        equations=tuple(equations),
    )


def random_linear_system(
    rng: random.Random,
    n: int,
    density: float = 0.3,
    max_row_sum: float = 0.7,
    acyclic: bool = False,
) -> tuple[list[list[float]], list[float], list[float]]:
    """Coefficients with absolute row sums at most ``max_row_sum``.

    That bound makes Gauss-Seidel a contraction in the max norm, so every
    generated system converges.  With ``acyclic`` the dependencies follow a random order,
    so declaration order is generally not a solve order.
    """
    rank = list(range(n))
    rng.shuffle(rank)
    coefficients = []
    for i in range(n):
        row = [0.0] * n
        for j in range(n):
            if acyclic and not rank[j] < rank[i]:
                continue
            if rng.random() < density:
                row[j] = rng.choice((-1.0, 1.0)) * rng.uniform(0.1, 1.0)
        total = sum(abs(a) for a in row)
        if total > 0:
            scale = rng.uniform(0.1, max_row_sum) / total
            row = [a * scale for a in row]
        coefficients.append(row)
    exo_weights = [rng.uniform(-1.0, 1.0) for _ in range(n)]
    constants = [rng.uniform(-1.0, 1.0) for _ in range(n)]
    return coefficients, exo_weights, constants


def single_cycle_model(n: int = 30, start: int = 10, end: int = 14) -> Model:
    """A chain of ``n`` linear equations with one designed feedback loop.

    ``x_i`` depends on ``x_{i-1}``; making ``x_start`` also depend on
    ``x_end`` closes the loop over variables ``start..end``.
    """
    coefficients = [[0.0] * n for _ in range(n)]
    for i in range(1, n):
        coefficients[i][i - 1] = 0.5
    coefficients[start][end] = 0.25
    return linear_model(coefficients, [1.0] * n, [0.0] * n, name="CYCLE30")
