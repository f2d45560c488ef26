"""Model types and the ``.sfc`` text format.

A model file is line oriented::

    # SIM
    model SIM
    var Y, YD, T, C, H
    exo G = 20
    param alpha1 = 0.6
    init H = 0
    Y = C + G
    C = alpha1 * YD + alpha2 * H[-1]
    check H - H[-1] == G - T

Declaration order fixes the variable indices used by every matrix and graph
downstream: endogenous variables first, then exogenous ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional

from .expr import (
    BinOp,
    Call,
    Const,
    Expr,
    FUNCTIONS,
    Neg,
    ParamRef,
    VarRef,
    param_refs,
    var_refs,
    walk,
)

KEYWORDS = frozenset({"model", "var", "exo", "param", "init", "check"})
RESERVED = KEYWORDS | frozenset(FUNCTIONS)
IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class VariableDecl:
    name: str
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class ExoDecl:
    """An exogenous variable; the last value of ``values`` is held forever."""

    name: str
    values: tuple[float, ...]
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class ParamDecl:
    name: str
    value: float
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class InitDecl:
    name: str
    value: float
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class Equation:
    lhs: str
    rhs: Expr
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class CheckExpr:
    """A post-solve accounting assertion ``lhs == rhs``."""

    lhs: Expr
    rhs: Expr
    line: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class Model:
    name: str
    endogenous: tuple[VariableDecl, ...]
    exogenous: tuple[ExoDecl, ...]
    parameters: tuple[ParamDecl, ...]
    equations: tuple[Equation, ...]
    initials: tuple[InitDecl, ...] = ()
    checks: tuple[CheckExpr, ...] = ()

    @cached_property
    def endogenous_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.endogenous)

    @cached_property
    def exogenous_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.exogenous)

    @cached_property
    def variable_names(self) -> tuple[str, ...]:
        """All variables in index order: endogenous, then exogenous."""
        return self.endogenous_names + self.exogenous_names

    @cached_property
    def param_values(self) -> dict[str, float]:
        return {p.name: p.value for p in self.parameters}

    @cached_property
    def initial_values(self) -> dict[str, float]:
        return {i.name: i.value for i in self.initials}

    @cached_property
    def equation_for(self) -> dict[str, Equation]:
        return {eq.lhs: eq for eq in self.equations}

    def exogenous_value(self, name: str, period: int) -> float:
        """Value of exogenous ``name`` in 1-based ``period``."""
        for decl in self.exogenous:
            if decl.name == name:
                return decl.values[min(period, len(decl.values)) - 1]
        raise KeyError(name)

    def exogenous_at(self, period: int) -> dict[str, float]:
        return {
            d.name: d.values[min(period, len(d.values)) - 1] for d in self.exogenous
        }

    def expressions(self) -> Iterator[Expr]:
        """Every expression tree: equation right-hand sides, then checks."""
        for eq in self.equations:
            yield eq.rhs
        for chk in self.checks:
            yield chk.lhs
            yield chk.rhs

    @cached_property
    def max_lags(self) -> dict[str, int]:
        """Deepest lag referenced for each lagged variable."""
        out: dict[str, int] = {}
        for expr in self.expressions():
            for ref in var_refs(expr):
                if ref.lag > 0:
                    out[ref.name] = max(out.get(ref.name, 0), ref.lag)
        return out


# --- errors and validation -------------------------------------------------


@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.message} [{self.code}]"


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Issue, ...] = ()
    warnings: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def format(self) -> str:
        lines = [f"error: {e}" for e in self.errors]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


class ModelError(ValueError):
    """A model that cannot be used; ``issues`` lists what is wrong."""

    def __init__(self, issues):
        self.issues = tuple(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__([Issue("syntax", f"{message} (column {column})", line)])


def validate_model(m: Model) -> ValidationReport:
    """Check every model invariant; violations are returned, never raised."""
    errors: list[Issue] = []
    warnings: list[Issue] = []

    seen: dict[str, str] = {}
    decls = (
        [(d.name, "endogenous", d.line) for d in m.endogenous]
        + [(d.name, "exogenous", d.line) for d in m.exogenous]
        + [(d.name, "parameter", d.line) for d in m.parameters]
    )
    for name, kind, line in decls:
        if not IDENT_RE.match(name) or name in RESERVED:
            errors.append(Issue("bad-identifier", f"invalid identifier {name!r}", line))
        if name in seen:
            errors.append(
                Issue(
                    "duplicate-declaration",
                    f"{name} declared {kind} but already declared {seen[name]}",
                    line,
                )
            )
        else:
            seen[name] = kind
    for d in m.exogenous:
        if not d.values:
            errors.append(Issue("empty-series", f"exogenous {d.name} has no values", d.line))

    endo = set(m.endogenous_names)
    variables = endo | set(m.exogenous_names)
    params = set(m.param_values)

    has_eq: set[str] = set()
    for eq in m.equations:
        if eq.lhs not in endo:
            if eq.lhs in variables or eq.lhs in params:
                msg = f"equation for {eq.lhs}, which is {seen[eq.lhs]}, not endogenous"
                errors.append(Issue("equation-lhs-not-endogenous", msg, eq.line))
            else:
                errors.append(
                    Issue("undeclared-identifier", f"undeclared identifier {eq.lhs}", eq.line)
                )
        elif eq.lhs in has_eq:
            errors.append(Issue("duplicate-equation", f"duplicate equation for {eq.lhs}", eq.line))
        has_eq.add(eq.lhs)
    for d in m.endogenous:
        if d.name not in has_eq:
            errors.append(Issue("missing-equation", f"no equation for {d.name}", d.line))

    located = [(eq.rhs, eq.line) for eq in m.equations]
    for chk in m.checks:
        located += [(chk.lhs, chk.line), (chk.rhs, chk.line)]
    reported: set[tuple[str, Optional[int]]] = set()
    for expr, line in located:
        for node in walk(expr):
            if isinstance(node, VarRef):
                if node.name not in variables and (node.name, line) not in reported:
                    reported.add((node.name, line))
                    errors.append(
                        Issue("undeclared-identifier", f"undeclared identifier {node.name}", line)
                    )
                if not isinstance(node.lag, int) or node.lag < 0:
                    errors.append(Issue("invalid-lag", f"invalid lag on {node.name}", line))
            elif isinstance(node, ParamRef):
                if node.name not in params and (node.name, line) not in reported:
                    reported.add((node.name, line))
                    errors.append(
                        Issue("undeclared-identifier", f"undeclared parameter {node.name}", line)
                    )
            elif isinstance(node, Call):
                if FUNCTIONS.get(node.func) != len(node.args):
                    errors.append(Issue("bad-call", f"bad call to {node.func}", line))
            elif isinstance(node, BinOp) and node.op not in "+-*/^":
                errors.append(Issue("bad-operator", f"unknown operator {node.op}", line))

    init_seen: set[str] = set()
    for init in m.initials:
        if init.name not in variables:
            errors.append(
                Issue("undeclared-identifier", f"initial value for undeclared {init.name}", init.line)
            )
        if init.name in init_seen:
            errors.append(Issue("duplicate-initial", f"duplicate initial for {init.name}", init.line))
        init_seen.add(init.name)
    lagged_lines: dict[str, Optional[int]] = {}
    for expr, line in located:
        for ref in var_refs(expr):
            if ref.lag > 0:
                lagged_lines.setdefault(ref.name, line)
    for name, line in lagged_lines.items():
        if name in variables and name not in init_seen:
            errors.append(Issue("missing-initial", f"missing initial for lagged {name}", line))
    for init in m.initials:
        if init.name in variables and init.name not in lagged_lines:
            warnings.append(
                Issue("unused-initial", f"initial for {init.name} is never used", init.line)
            )

    used_params = {ref.name for expr in m.expressions() for ref in param_refs(expr)}
    for p in m.parameters:
        if p.name not in used_params:
            warnings.append(Issue("unused-parameter", f"unused parameter {p.name}", p.line))

    referenced_by: dict[str, set[str]] = {}
    for eq in m.equations:
        for ref in var_refs(eq.rhs):
            referenced_by.setdefault(ref.name, set()).add(eq.lhs)
    for d in m.endogenous:
        if not referenced_by.get(d.name, set()) - {d.name}:
            warnings.append(
                Issue(
                    "unreferenced-variable",
                    f"endogenous {d.name} is not referenced by any other equation",
                    d.line,
                )
            )
    all_refs = {ref.name for expr in m.expressions() for ref in var_refs(expr)}
    for d in m.exogenous:
        if d.name not in all_refs:
            warnings.append(Issue("unused-exogenous", f"unused exogenous {d.name}", d.line))

    return ValidationReport(tuple(errors), tuple(warnings))


# --- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>==|[-+*/^()\[\],=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number, ident, op, end
    text: str
    column: int


def _tokenize(text: str, lineno: int) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, match.group(), pos + 1))
        pos = match.end()
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


class _LineParser:
    """Recursive descent over the tokens of one line.

    Precedence, loosest first: ``+ -``, ``* /``, unary minus, ``^``
    (right associative, and its exponent may itself be negated).
    """

    def __init__(self, tokens: list[_Token], lineno: int, params: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.params = params

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Optional[_Token] = None):
        tok = tok or self.tok
        found = f"'{tok.text}'" if tok.kind != "end" else "end of line"
        raise ModelSyntaxError(f"{message}, found {found}", self.lineno, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> _Token:
        tok = self.tok
        if not self.accept(text):
            self.error(f"expected '{text}'")
        return tok

    def ident(self) -> str:
        tok = self.tok
        if tok.kind != "ident":
            self.error("expected identifier")
        if tok.text in RESERVED:
            self.error(f"'{tok.text}' is reserved")
        self.pos += 1
        return tok.text

    def end(self):
        if self.tok.kind != "end":
            self.error("unexpected trailing input")

    def signed_number(self) -> float:
        negative = self.accept("-")
        tok = self.tok
        if tok.kind != "number":
            self.error("expected number")
        self.pos += 1
        value = float(tok.text)
        return -value if negative else value

    def number_or_series(self) -> tuple[float, ...]:
        if self.accept("["):
            values = [self.signed_number()]
            while self.accept(","):
                values.append(self.signed_number())
            self.expect("]")
            return tuple(values)
        return (self.signed_number(),)

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            return Const(float(tok.text))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident" and tok.text in FUNCTIONS:
            self.pos += 1
            self.expect("(")
            args = [self.expr()]
            while self.accept(","):
                args.append(self.expr())
            self.expect(")")
            if len(args) != FUNCTIONS[tok.text]:
                raise ModelSyntaxError(
                    f"{tok.text} takes {FUNCTIONS[tok.text]} argument(s), got {len(args)}",
                    self.lineno,
                    tok.column,
                )
            return Call(tok.text, tuple(args))
        if tok.kind == "ident":
            name = self.ident()
            lag = 0
            if self.accept("["):
                self.expect("-")
                lag_tok = self.tok
                if lag_tok.kind != "number" or not lag_tok.text.isdigit() or int(lag_tok.text) < 1:
                    self.error("expected a positive integer lag")
                self.pos += 1
                lag = int(lag_tok.text)
                self.expect("]")
            if name in self.params:
                if lag:
                    raise ModelSyntaxError(
                        f"parameter {name} cannot be lagged", self.lineno, tok.column
                    )
                return ParamRef(name)
            return VarRef(name, lag)
        self.error("expected expression")


def _logical_lines(source_text: str) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(source_text.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text


def parse_model(source_text: str, *, strict: bool = True) -> Model:
    """Parse ``.sfc`` source into a Model.

    Syntax errors always raise :class:`ModelSyntaxError`.  With ``strict``
    (the default) any error from :func:`validate_model` raises
    :class:`ModelError` too; pass ``strict=False`` to get the model back and
    inspect the report yourself.
    """
    name = "model"
    endogenous: list[VariableDecl] = []
    exogenous: list[ExoDecl] = []
    parameters: list[ParamDecl] = []
    initials: list[InitDecl] = []
    pending: list[tuple[int, list[_Token]]] = []

    # Pass 1: declarations.  Expressions wait until every parameter is known.
    for lineno, text in _logical_lines(source_text):
        tokens = _tokenize(text, lineno)
        head = tokens[0]
        p = _LineParser(tokens, lineno, frozenset())
        if head.kind == "ident" and head.text in KEYWORDS and head.text != "check":
            p.pos = 1
            if head.text == "model":
                name = p.ident()
            elif head.text == "var":
                endogenous.append(VariableDecl(p.ident(), lineno))
                while p.accept(","):
                    endogenous.append(VariableDecl(p.ident(), lineno))
            else:
                ident = p.ident()
                p.expect("=")
                if head.text == "exo":
                    exogenous.append(ExoDecl(ident, p.number_or_series(), lineno))
                elif head.text == "param":
                    parameters.append(ParamDecl(ident, p.signed_number(), lineno))
                else:
                    initials.append(InitDecl(ident, p.signed_number(), lineno))
            p.end()
        else:
            pending.append((lineno, tokens))

    params = frozenset(d.name for d in parameters)
    equations: list[Equation] = []
    checks: list[CheckExpr] = []
    for lineno, tokens in pending:
        p = _LineParser(tokens, lineno, params)
        if tokens[0].kind == "ident" and tokens[0].text == "check":
            p.pos = 1
            lhs = p.expr()
            p.expect("==")
            rhs = p.expr()
            p.end()
            checks.append(CheckExpr(lhs, rhs, lineno))
        else:
            lhs_name = p.ident()
            p.expect("=")
            rhs = p.expr()
            p.end()
            equations.append(Equation(lhs_name, rhs, lineno))

    model = Model(
        name=name,
        endogenous=tuple(endogenous),
        exogenous=tuple(exogenous),
        parameters=tuple(parameters),
        equations=tuple(equations),
        initials=tuple(initials),
        checks=tuple(checks),
    )
    if strict:
        report = validate_model(model)
        if report.errors:
            raise ModelError(report.errors)
    return model


def load_model(path, *, strict: bool = True) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), strict=strict)


# --- rendering ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def format_number(value: float) -> str:
    """Shortest text that reads back as exactly ``value``."""
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _prec(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _POW_PREC if expr.op == "^" else _PREC[expr.op]
    if isinstance(expr, Neg):
        return _UNARY_PREC
    if isinstance(expr, Const) and expr.value < 0:
        return _UNARY_PREC
    return _ATOM_PREC


def _render(expr: Expr, min_prec: int = 0) -> str:
    if isinstance(expr, Const):
        text = format_number(expr.value)
    elif isinstance(expr, VarRef):
        text = f"{expr.name}[-{expr.lag}]" if expr.lag else expr.name
    elif isinstance(expr, ParamRef):
        text = expr.name
    elif isinstance(expr, Neg):
        text = "-" + _render(expr.operand, _UNARY_PREC)
    elif isinstance(expr, Call):
        text = f"{expr.func}({', '.join(_render(a) for a in expr.args)})"
    elif expr.op == "^":
        text = f"{_render(expr.left, _ATOM_PREC)} ^ {_render(expr.right, _UNARY_PREC)}"
    else:
        prec = _PREC[expr.op]
        text = f"{_render(expr.left, prec)} {expr.op} {_render(expr.right, prec + 1)}"
    if _prec(expr) < min_prec:
        return f"({text})"
    return text


def render_expr(expr: Expr) -> str:
    return _render(expr)


def render_model(m: Model) -> str:
    """Canonical ``.sfc`` text; ``parse_model`` of the result equals ``m``."""
    out = [f"model {m.name}"]
    if m.endogenous:
        out.append("var " + ", ".join(m.endogenous_names))
    for d in m.exogenous:
        if len(d.values) == 1:
            out.append(f"exo {d.name} = {format_number(d.values[0])}")
        else:
            series = ", ".join(format_number(v) for v in d.values)
            out.append(f"exo {d.name} = [{series}]")
    out += [f"param {p.name} = {format_number(p.value)}" for p in m.parameters]
    out += [f"init {i.name} = {format_number(i.value)}" for i in m.initials]
    out += [f"{eq.lhs} = {render_expr(eq.rhs)}" for eq in m.equations]
    out += [f"check {render_expr(c.lhs)} == {render_expr(c.rhs)}" for c in m.checks]
    return "\n".join(out) + "\n"
