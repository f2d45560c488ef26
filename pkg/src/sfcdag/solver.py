"""Period-by-period simulation driven by the condensation order.

Blocks (metanodes) are solved sources first.  An acyclic variable is one
direct evaluation of its equation; a cyclic block is iterated with damped
Gauss-Seidel sweeps, members in declaration order, until the largest
relative change ``|dx| / (1 + |x|)`` falls to the tolerance.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

from .dependency import build_dependency_graph
from .expr import Compiled, EvaluationError, compile_expr
from .graph import condensation, topological_order
from .model import Model, ModelError, validate_model

LagState = dict[tuple[str, int], float]


class SolverError(RuntimeError):
    period: Optional[int] = None

    def at_period(self, period: int) -> "SolverError":
        self.period = period
        self.args = (f"period {period}: {self.args[0]}",)
        return self


class ConvergenceError(SolverError):
    def __init__(self, members, residual: float, iterations: int):
        self.members = tuple(members)
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"block {{{', '.join(self.members)}}} did not converge after {iterations} "
            f"iterations (last residual {residual:.3g}); try a smaller damping"
        )


class SolverEvaluationError(SolverError):
    def __init__(self, variable: str, detail: str):
        self.variable = variable
        super().__init__(f"equation for {variable}: {detail}")


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-10
    max_iterations: int = 10000
    damping: float = 1.0
    periods: int = 1

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.periods < 1:
            raise ValueError("periods must be at least 1")


@dataclass(frozen=True)
class BlockStats:
    members: tuple[str, ...]
    cyclic: bool
    iterations: int
    residual: float
    evaluations: int


class PeriodSolution(Mapping):
    """Solved values for one period (a read-only mapping) plus diagnostics."""

    def __init__(self, values: dict[str, float], blocks: list[BlockStats]):
        self._values = values
        self.blocks = tuple(blocks)

    def __getitem__(self, key: str) -> float:
        return self._values[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"PeriodSolution({self._values!r})"

    @property
    def evaluations(self) -> int:
        return sum(b.evaluations for b in self.blocks)


@dataclass(frozen=True)
class _Block:
    members: tuple[str, ...]
    functions: tuple[Compiled, ...]
    cyclic: bool


@dataclass(frozen=True)
class _Plan:
    blocks: tuple[_Block, ...]
    declaration_order: tuple[str, ...]
    functions: dict
    checks: tuple


@lru_cache(maxsize=64)
def _plan(m: Model) -> _Plan:
    report = validate_model(m)
    if report.errors:
        raise ModelError(report.errors)
    params = m.param_values
    functions = {eq.lhs: compile_expr(eq.rhs, params) for eq in m.equations}
    dag = condensation(build_dependency_graph(m))
    n_endo = len(m.endogenous)
    blocks = []
    for k in topological_order(dag):
        node = dag.metanodes[k]
        # Exogenous nodes have no equation; their values arrive as inputs.
        members = tuple(m.variable_names[v] for v in node.members if v < n_endo)
        if members:
            blocks.append(
                _Block(members, tuple(functions[x] for x in members), node.nontrivial)
            )
    checks = tuple(
        (compile_expr(c.lhs, params), compile_expr(c.rhs, params)) for c in m.checks
    )
    return _Plan(tuple(blocks), m.endogenous_names, functions, checks)


def _eval(fn: Compiled, name: str, values, lags) -> float:
    try:
        out = fn(values, lags)
    except EvaluationError as exc:
        raise SolverEvaluationError(name, str(exc)) from exc
    except KeyError as exc:
        raise SolverEvaluationError(name, f"no value for {exc.args[0]}") from exc
    return out


def _initial_guess(name: str, lags: Mapping) -> float:
    return float(lags.get((name, 1), 0.0))


def _iterate(members, functions, values, lags, opts: SolverOptions):
    """Damped Gauss-Seidel on ``members``; returns (iterations, residual, evaluations)."""
    for x in members:
        if x not in values:
            values[x] = _initial_guess(x, lags)
    damping = opts.damping
    residual = math.inf
    for sweep in range(1, opts.max_iterations + 1):
        residual = 0.0
        for x, fn in zip(members, functions):
            old = values[x]
            new = _eval(fn, x, values, lags)
            if damping != 1.0:
                new = old + damping * (new - old)
            if not math.isfinite(new):
                raise ConvergenceError(members, math.inf, sweep)
            values[x] = new
            change = abs(new - old) / (1.0 + abs(new))
            if change > residual:
                residual = change
        if residual <= opts.tolerance:
            return sweep, residual, sweep * len(members)
    raise ConvergenceError(members, residual, opts.max_iterations)


def _check_inputs(m: Model, lags: Mapping, exo_values: Mapping) -> None:
    missing = [x for x in m.exogenous_names if x not in exo_values]
    if missing:
        raise SolverError(f"no value for exogenous {', '.join(missing)}")
    for name, depth in m.max_lags.items():
        for k in range(1, depth + 1):
            if (name, k) not in lags:
                raise SolverError(f"lag state has no value for {name}[-{k}]")


def solve_period(
    m: Model,
    lags: Mapping[tuple[str, int], float],
    exo_values: Mapping[str, float],
    opts: SolverOptions = SolverOptions(),
) -> PeriodSolution:
    """Solve one period block by block in topological order."""
    plan = _plan(m)
    _check_inputs(m, lags, exo_values)
    values = {x: float(exo_values[x]) for x in m.exogenous_names}
    stats = []
    for block in plan.blocks:
        if not block.cyclic:
            (x,) = block.members
            values[x] = _eval(block.functions[0], x, values, lags)
            stats.append(BlockStats(block.members, False, 0, 0.0, 1))
            continue
        iterations, residual, evaluations = _iterate(
            block.members, block.functions, values, lags, opts
        )
        stats.append(BlockStats(block.members, True, iterations, residual, evaluations))
    ordered = {x: values[x] for x in m.variable_names}
    return PeriodSolution(ordered, stats)


def naive_solve_period(
    m: Model,
    lags: Mapping[tuple[str, int], float],
    exo_values: Mapping[str, float],
    opts: SolverOptions = SolverOptions(),
) -> PeriodSolution:
    """Baseline: Gauss-Seidel over the whole system, ignoring the graph."""
    plan = _plan(m)
    _check_inputs(m, lags, exo_values)
    values = {x: float(exo_values[x]) for x in m.exogenous_names}
    members = plan.declaration_order
    functions = tuple(plan.functions[x] for x in members)
    iterations, residual, evaluations = _iterate(members, functions, values, lags, opts)
    stats = [BlockStats(members, True, iterations, residual, evaluations)]
    ordered = {x: values[x] for x in m.variable_names}
    return PeriodSolution(ordered, stats)


def initial_lag_state(m: Model) -> LagState:
    """Lag state for the first period: every lag of x reads ``init x``.

    Lags deeper than one period before the start also use the single
    initial value (the history is taken as flat).
    """
    inits = m.initial_values
    state: LagState = {}
    for name, depth in m.max_lags.items():
        if name not in inits:
            raise ModelError([f"missing initial for lagged {name}"])
        for k in range(1, depth + 1):
            state[(name, k)] = float(inits[name])
    return state


def roll_lags(m: Model, lags: Mapping, values: Mapping[str, float]) -> LagState:
    """Lag state for the next period after ``values`` were solved."""
    state: LagState = {}
    for name, depth in m.max_lags.items():
        state[(name, 1)] = values[name]
        for k in range(2, depth + 1):
            state[(name, k)] = lags[(name, k - 1)]
    return state


@dataclass(frozen=True)
class SimulationResult:
    """Values per period, solver diagnostics and check residuals.

    ``start_period`` is the 1-based period of ``values[0]``;
    ``initial_lags`` is the lag state that period was solved with and
    ``final_lags`` the state to continue from.
    """

    variables: tuple[str, ...]
    values: tuple[dict[str, float], ...]
    diagnostics: tuple[tuple[BlockStats, ...], ...]
    check_residuals: tuple[tuple[float, ...], ...]
    initial_lags: LagState = field(default_factory=dict)
    final_lags: LagState = field(default_factory=dict)
    start_period: int = 1

    @property
    def periods(self) -> list[int]:
        return list(range(self.start_period, self.start_period + len(self.values)))

    def series(self, name: str) -> list[float]:
        return [row[name] for row in self.values]

    def lags_at(self, index: int) -> LagState:
        """Lag state used to solve ``values[index]``."""
        state: LagState = {}
        for (name, k), value in self.initial_lags.items():
            back = index - k
            state[(name, k)] = self.values[back][name] if back >= 0 else self.initial_lags[(name, k - index)]
        return state


def _check_residuals(plan: _Plan, values, lags) -> tuple[float, ...]:
    out = []
    for k, (lhs, rhs) in enumerate(plan.checks):
        try:
            out.append(lhs(values, lags) - rhs(values, lags))
        except EvaluationError as exc:
            raise SolverError(f"check {k}: {exc}") from exc
    return tuple(out)


def simulate(
    m: Model,
    opts: SolverOptions = SolverOptions(),
    lags: Optional[Mapping[tuple[str, int], float]] = None,
    start_period: int = 1,
) -> SimulationResult:
    """Run ``opts.periods`` periods, rolling each solution into the next lag state.

    Pass ``lags`` and ``start_period`` (e.g. a previous result's
    ``final_lags`` and next period) to continue an earlier run.
    """
    plan = _plan(m)
    state = dict(lags) if lags is not None else initial_lag_state(m)
    first = dict(state)
    rows, diags, checks = [], [], []
    for t in range(start_period, start_period + opts.periods):
        try:
            sol = solve_period(m, state, m.exogenous_at(t), opts)
            values = dict(sol)
            checks.append(_check_residuals(plan, values, state))
        except SolverError as exc:
            raise exc.at_period(t)
        rows.append(values)
        diags.append(sol.blocks)
        state = roll_lags(m, state, values)
    return SimulationResult(
        variables=m.variable_names,
        values=tuple(rows),
        diagnostics=tuple(diags),
        check_residuals=tuple(checks),
        initial_lags=first,
        final_lags=state,
        start_period=start_period,
    )


@dataclass(frozen=True)
class CheckOutcome:
    period: int
    check: int
    residual: float
    passed: bool


def run_checks(m: Model, r: SimulationResult, tol: float = 1e-10) -> list[CheckOutcome]:
    """Re-evaluate every check in every period of ``r``.

    A check passes when ``|lhs - rhs| <= tol * (1 + |lhs|)``.
    """
    plan = _plan(m)
    out = []
    for index, (period, values) in enumerate(zip(r.periods, r.values)):
        lags = r.lags_at(index)
        for k, (lhs_fn, rhs_fn) in enumerate(plan.checks):
            try:
                lhs = lhs_fn(values, lags)
                residual = lhs - rhs_fn(values, lags)
            except EvaluationError as exc:
                raise SolverError(f"period {period}, check {k}: {exc}") from exc
            out.append(CheckOutcome(period, k, residual, abs(residual) <= tol * (1 + abs(lhs))))
    return out
