"""Structural Jacobian of a model and the dependency graph built from it.

Row ``i`` of the pattern lists the variables that appear, unlagged, on the
right-hand side of the equation for variable ``i``.  Lagged terms are
predetermined within a period and parameters are constants, so neither
creates an entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .expr import EvaluationError, compile_expr, var_refs
from .graph import DependencyGraph
from .model import Model


@dataclass(frozen=True)
class SparsityPattern:
    """Binary matrix as sorted column indices per row; labels index both axes."""

    n: int
    rows: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]

    def __contains__(self, ij) -> bool:
        i, j = ij
        return j in self.rows[i]

    def to_matrix(self) -> list[list[int]]:
        out = [[0] * self.n for _ in range(self.n)]
        for i, row in enumerate(self.rows):
            for j in row:
                out[i][j] = 1
        return out

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)


@dataclass(frozen=True)
class JacobianDiscrepancy:
    dependent: str
    cause: str
    structural: bool
    numeric_magnitude: float


def structural_jacobian(m: Model) -> SparsityPattern:
    labels = m.variable_names
    index = {name: k for k, name in enumerate(labels)}
    rows: list[tuple[int, ...]] = []
    for name in labels:
        eq = m.equation_for.get(name)
        if eq is None:
            rows.append(())
            continue
        causes = {index[ref.name] for ref in var_refs(eq.rhs) if ref.lag == 0}
        rows.append(tuple(sorted(causes)))
    return SparsityPattern(len(labels), tuple(rows), labels)


def build_dependency_graph(m: Model) -> DependencyGraph:
    """Graph with an edge ``j -> i`` whenever variable j causes variable i."""
    pattern = structural_jacobian(m)
    edges = frozenset((j, i) for i, row in enumerate(pattern.rows) for j in row)
    roles = ("endogenous",) * len(m.endogenous) + ("exogenous",) * len(m.exogenous)
    return DependencyGraph(pattern.n, pattern.labels, edges, roles)


def numeric_jacobian_check(
    m: Model,
    point: Mapping[str, float],
    epsilon: float = 1e-6,
    tolerance: float = 1e-9,
    lags: Optional[Mapping[tuple[str, int], float]] = None,
) -> list[JacobianDiscrepancy]:
    """Compare the structural pattern against central differences at ``point``.

    ``point`` gives current-period values for every variable.  Lagged
    references are read from ``lags`` keyed by ``(name, k)``; when absent
    the current value in ``point`` stands in.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    pattern = structural_jacobian(m)
    labels = pattern.labels
    current = {name: float(point[name]) for name in labels}
    lag_values = {}
    for name, depth in m.max_lags.items():
        for k in range(1, depth + 1):
            if lags is not None and (name, k) in lags:
                lag_values[(name, k)] = float(lags[(name, k)])
            else:
                lag_values[(name, k)] = current[name]

    params = m.param_values
    found = []
    for i, name in enumerate(labels):
        eq = m.equation_for.get(name)
        if eq is None:
            continue
        f = compile_expr(eq.rhs, params)
        for j, cause in enumerate(labels):
            base = current[cause]
            try:
                current[cause] = base + epsilon
                up = f(current, lag_values)
                current[cause] = base - epsilon
                down = f(current, lag_values)
            except EvaluationError as exc:
                raise EvaluationError(f"equation for {name}: {exc}") from exc
            finally:
                current[cause] = base
            magnitude = abs(up - down) / (2 * epsilon)
            structural = j in pattern.rows[i]
            if structural != (magnitude >= tolerance):
                found.append(JacobianDiscrepancy(name, cause, structural, magnitude))
    return found
