"""Expression trees for model equations, plus compilation to callables.

Trees are immutable dataclasses so whole models compare and hash
structurally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping, Union


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class VarRef:
    """A model variable; ``lag`` counts periods back (0 is the current period)."""

    name: str
    lag: int = 0


@dataclass(frozen=True)
class ParamRef:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str  # exp, log, min, max
    args: tuple["Expr", ...]


Expr = Union[Const, VarRef, ParamRef, Neg, BinOp, Call]

BINARY_OPS = ("+", "-", "*", "/", "^")
FUNCTIONS = {"exp": 1, "log": 1, "min": 2, "max": 2}


class EvaluationError(ArithmeticError):
    """Raised when an expression cannot be evaluated at a point."""


def walk(expr: Expr) -> Iterator[Expr]:
    """Yield every node of ``expr`` in pre-order."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, BinOp):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Call):
            stack.extend(reversed(node.args))


def var_refs(expr: Expr) -> Iterator[VarRef]:
    return (node for node in walk(expr) if isinstance(node, VarRef))


def param_refs(expr: Expr) -> Iterator[ParamRef]:
    return (node for node in walk(expr) if isinstance(node, ParamRef))


def _pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError) as exc:
        raise EvaluationError(f"cannot compute {a!r} ^ {b!r}") from exc


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise EvaluationError(f"division by zero ({a!r} / 0)")
    return a / b


def _log(a: float) -> float:
    if not a > 0.0:
        raise EvaluationError(f"log of non-positive value {a!r}")
    return math.log(a)


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError as exc:
        raise EvaluationError(f"exp({a!r}) overflows") from exc


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}
_CALLS = {"exp": _exp, "log": _log, "min": min, "max": max}

# A compiled expression reads current values by name and lagged values by
# (name, lag).
Compiled = Callable[[Mapping[str, float], Mapping[tuple[str, int], float]], float]


def compile_expr(expr: Expr, params: Mapping[str, float]) -> Compiled:
    """Turn ``expr`` into a closure; parameters are bound at compile time.

    Raises KeyError for a parameter missing from ``params``.
    """
    if isinstance(expr, Const):
        value = expr.value
        return lambda cur, lags: value
    if isinstance(expr, ParamRef):
        value = params[expr.name]
        return lambda cur, lags: value
    if isinstance(expr, VarRef):
        name = expr.name
        if expr.lag == 0:
            return lambda cur, lags: cur[name]
        key = (name, expr.lag)
        return lambda cur, lags: lags[key]
    if isinstance(expr, Neg):
        inner = compile_expr(expr.operand, params)
        return lambda cur, lags: -inner(cur, lags)
    if isinstance(expr, BinOp):
        fn = _BINARY[expr.op]
        left = compile_expr(expr.left, params)
        right = compile_expr(expr.right, params)
        return lambda cur, lags: fn(left(cur, lags), right(cur, lags))
    if isinstance(expr, Call):
        fn = _CALLS[expr.func]
        args = [compile_expr(a, params) for a in expr.args]
        if len(args) == 1:
            (only,) = args
            return lambda cur, lags: fn(only(cur, lags))
        return lambda cur, lags: fn(*(a(cur, lags) for a in args))
    raise TypeError(f"not an expression node: {expr!r}")


def evaluate(
    expr: Expr,
    params: Mapping[str, float],
    current: Mapping[str, float],
    lags: Mapping[tuple[str, int], float],
) -> float:
    return compile_expr(expr, params)(current, lags)
