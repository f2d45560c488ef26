"""Dependency graphs, condensation DAGs and block-ordered simulation for
stock-flow-consistent macro models."""

from .dependency import (
    JacobianDiscrepancy,
    SparsityPattern,
    build_dependency_graph,
    numeric_jacobian_check,
    structural_jacobian,
)
from .emit import DotStyle, emit_adjacency_csv, emit_dot, emit_json, emit_simulation_csv
from .graph import (
    CondensationDag,
    DependencyGraph,
    DirectedGraph,
    SccPartition,
    ancestors,
    condensation,
    condense,
    descendants,
    enumerate_cycles,
    is_acyclic_nilpotency,
    tarjan_scc,
    topological_order,
)
from .model import Model, ModelError, load_model, parse_model, render_model, validate_model
from .solver import (
    SimulationResult,
    SolverOptions,
    naive_solve_period,
    run_checks,
    simulate,
    solve_period,
)

__version__ = "0.1.0"
