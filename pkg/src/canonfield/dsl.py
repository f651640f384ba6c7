"""A small expression language for parametrized immersions ``x: U -> E^m``.

Example source::

    dim 2 -> 3;
    param r = 2;
    domain u1 = [-pi, pi];
    domain u2 = [-pi/2, pi/2];
    grid 12, 12;
    x1 = r*cos(u1)*cos(u2);
    x2 = r*sin(u1)*cos(u2);
    x3 = r*sin(u2);

Statements are separated by ``;`` (a trailing one is optional). ``param``, ``domain`` and ``grid`` statements are
optional; undeclared axes default to ``[-1, 1]`` with 8 samples. Parameters are
bound when parsing, so evaluation depends on the chart point only. ``#`` starts
a comment that runs to the end of the line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .errors import DimensionMismatch, DomainError, SpecSyntaxError, UnknownIdentifier

BINARY = ("add", "sub", "mul", "div", "pow")
UNARY = ("neg", "sin", "cos", "exp", "sqrt")
LEAVES = ("const", "var", "param")
FUNCTIONS = ("sin", "cos", "exp", "sqrt")
KEYWORDS = ("dim", "param", "domain", "grid")
CONSTANTS = {"pi": math.pi}

MAX_AMBIENT = 8
DEFAULT_INTERVAL = (-1.0, 1.0)
DEFAULT_GRID = 8


@dataclass(frozen=True)
class ExprNode:
    """One node of an expression tree.

    ``payload`` is the float value for ``const``, the 0-based chart index for
    ``var`` and a ``(name, value)`` pair for ``param``.
    """

    kind: str
    children: tuple["ExprNode", ...] = ()
    payload: object = None

    def __post_init__(self):
        arity = 2 if self.kind in BINARY else 1 if self.kind in UNARY else 0
        if self.kind not in BINARY + UNARY + LEAVES:
            raise ValueError(f"unknown node kind {self.kind!r}")
        if len(self.children) != arity:
            raise ValueError(f"{self.kind} takes {arity} children, got {len(self.children)}")

    def walk(self) -> Iterator["ExprNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class ImmersionSpec:
    n: int
    m: int
    components: tuple[ExprNode, ...]
    params: Mapping[str, float] = field(default_factory=dict)
    domain: tuple[tuple[float, float], ...] = ()
    grid: tuple[int, ...] = ()
    label: str = field(default="custom", compare=False)

    def __post_init__(self):
        if not (1 <= self.n < self.m <= MAX_AMBIENT):
            raise DimensionMismatch(
                f"need 1 <= n < m <= {MAX_AMBIENT}, got n={self.n}, m={self.m}")
        if len(self.components) != self.m:
            raise DimensionMismatch(
                f"declared m={self.m} but got {len(self.components)} components")
        if not self.domain:
            object.__setattr__(self, "domain", (DEFAULT_INTERVAL,) * self.n)
        if not self.grid:
            object.__setattr__(self, "grid", (DEFAULT_GRID,) * self.n)
        if len(self.domain) != self.n or len(self.grid) != self.n:
            raise DimensionMismatch("domain and grid need one entry per chart axis")
        for lo, hi in self.domain:
            if not lo < hi:
                raise DomainError(f"empty interval [{lo}, {hi}]")
        for count in self.grid:
            if count < 2:
                raise DomainError(f"grid counts must be >= 2, got {count}")
        for comp in self.components:
            for node in comp.walk():
                if node.kind == "var" and not 0 <= node.payload < self.n:
                    raise UnknownIdentifier(f"u{node.payload + 1}")

    def with_grid(self, grid) -> "ImmersionSpec":
        grid = tuple(int(g) for g in grid)
        if len(grid) == 1 and self.n > 1:
            grid = grid * self.n
        return ImmersionSpec(self.n, self.m, self.components, dict(self.params),
                             self.domain, grid, self.label)


# -- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<arrow>->)
  | (?P<op>[-+*/^=;,()\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise SpecSyntaxError(f"unexpected character {source[pos]!r}",
                                  line, pos - line_start + 1)
        kind = match.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line, line_start = line + 1, match.end()
        elif kind == "arrow":
            tokens.append(Token("op", "->", line, col))
        elif kind in ("number", "ident", "op"):
            tokens.append(Token(kind, match.group(), line, col))
        pos = match.end()
    tokens.append(Token("eof", "<end of input>", line, pos - line_start + 1))
    return tokens


# -- parser ----------------------------------------------------------------

_VAR_RE = re.compile(r"u([1-9]\d*)$")
_COMP_RE = re.compile(r"x([1-9]\d*)$")


class _Parser:
    def __init__(self, source: str, params: Mapping[str, float]):
        self.tokens = tokenize(source)
        self.pos = 0
        self.external = dict(params)
        self.params: dict[str, float] = {}
        self.n = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, message: str, *expected: str):
        raise SpecSyntaxError(message, self.tok.line, self.tok.col, expected)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            self.fail(f"unexpected {tok.text!r}", repr(text))
        return tok

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.tok
        if tok.kind != kind:
            self.fail(f"unexpected {tok.text!r}", what)
        self.pos += 1
        return tok

    def integer(self) -> int:
        tok = self.expect_kind("number", "integer")
        if not tok.text.isdigit():
            raise SpecSyntaxError(f"expected an integer, got {tok.text!r}", tok.line, tok.col,
                                  ("integer",))
        return int(tok.text)

    # grammar
    def spec(self, label: str) -> ImmersionSpec:
        self.expect("dim")
        self.n = self.integer()
        self.expect("->")
        m = self.integer()
        self.expect(";")
        if not (1 <= self.n < m <= MAX_AMBIENT):
            raise DimensionMismatch(f"need 1 <= n < m <= {MAX_AMBIENT}, got n={self.n}, m={m}")

        components: dict[int, ExprNode] = {}
        domain = [DEFAULT_INTERVAL] * self.n
        grid = [DEFAULT_GRID] * self.n
        while self.tok.kind != "eof":
            tok = self.tok
            if self.accept("param"):
                name = self.expect_kind("ident", "parameter name").text
                self.expect("=")
                value = self.constant_expr()
                self.params[name] = self.external.pop(name, value)
            elif self.accept("domain"):
                axis = self.chart_axis()
                self.expect("=")
                self.expect("[")
                lo = self.constant_expr()
                self.expect(",")
                hi = self.constant_expr()
                self.expect("]")
                domain[axis] = (lo, hi)
            elif self.accept("grid"):
                counts = [self.integer()]
                while self.accept(","):
                    counts.append(self.integer())
                if len(counts) == 1:
                    counts *= self.n
                if len(counts) != self.n:
                    raise DimensionMismatch(f"grid needs {self.n} counts, got {len(counts)}")
                grid = counts
            elif tok.kind == "ident" and _COMP_RE.match(tok.text):
                self.pos += 1
                k = int(_COMP_RE.match(tok.text).group(1))
                if k > m:
                    raise DimensionMismatch(f"component {tok.text} exceeds declared m={m}")
                if k in components:
                    raise SpecSyntaxError(f"component {tok.text} assigned twice", tok.line, tok.col)
                self.expect("=")
                components[k] = self.expr()
            else:
                self.fail(f"unexpected {tok.text!r}", "'x<k>'", "'param'", "'domain'", "'grid'")
            if self.tok.kind != "eof":
                self.expect(";")
        if sorted(components) != list(range(1, m + 1)):
            missing = [f"x{k}" for k in range(1, m + 1) if k not in components]
            raise DimensionMismatch(f"missing components: {', '.join(missing)}")
        # unused external bindings are kept so catalog echoes stay complete
        self.params.update(self.external)
        return ImmersionSpec(self.n, m, tuple(components[k] for k in range(1, m + 1)),
                             dict(self.params), tuple(domain), tuple(grid), label)

    def chart_axis(self) -> int:
        tok = self.expect_kind("ident", "chart coordinate")
        match = _VAR_RE.match(tok.text)
        if not match or int(match.group(1)) > self.n:
            raise UnknownIdentifier(tok.text)
        return int(match.group(1)) - 1

    def constant_expr(self) -> float:
        tok = self.tok
        node = self.expr()
        if any(sub.kind == "var" for sub in node.walk()):
            raise SpecSyntaxError("expected a constant expression", tok.line, tok.col)
        return evaluate_constant(node)

    def expr(self) -> ExprNode:
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            kind = "add" if self.tok.text == "+" else "sub"
            self.pos += 1
            node = ExprNode(kind, (node, self.term()))
        return node

    def term(self) -> ExprNode:
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            kind = "mul" if self.tok.text == "*" else "div"
            self.pos += 1
            node = ExprNode(kind, (node, self.unary()))
        return node

    def unary(self) -> ExprNode:
        if self.accept("-"):
            return ExprNode("neg", (self.unary(),))
        return self.power()

    def power(self) -> ExprNode:
        base = self.atom()
        if self.accept("^"):
            return ExprNode("pow", (base, self.unary()))
        return base

    def atom(self) -> ExprNode:
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            return ExprNode("const", payload=float(tok.text))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.pos += 1
            name = tok.text
            if self.tok.text == "(" and self.tok.kind == "op":
                if name not in FUNCTIONS:
                    raise UnknownIdentifier(name)
                self.pos += 1
                arg = self.expr()
                self.expect(")")
                return ExprNode(name, (arg,))
            match = _VAR_RE.match(name)
            if match and int(match.group(1)) <= self.n:
                return ExprNode("var", payload=int(match.group(1)) - 1)
            if name in self.params:
                return ExprNode("param", payload=(name, self.params[name]))
            if name in self.external:
                self.params[name] = self.external.pop(name)
                return ExprNode("param", payload=(name, self.params[name]))
            if name in CONSTANTS:
                return ExprNode("const", payload=CONSTANTS[name])
            raise UnknownIdentifier(name)
        self.fail(f"unexpected {tok.text!r}", "number", "identifier", "'('", "'-'")


def parse(source: str, params: Mapping[str, float] | None = None,
          label: str = "custom") -> ImmersionSpec:
    """Parse immersion source text.

    ``params`` binds identifiers the source uses without declaring; a value
    given here also overrides a ``param`` statement of the same name.
    """
    return _Parser(source, params or {}).spec(label)


def evaluate_constant(node: ExprNode) -> float:
    """Evaluate a tree that contains no chart variables."""
    kind = node.kind
    if kind == "const":
        return node.payload
    if kind == "param":
        return node.payload[1]
    if kind == "var":
        raise ValueError("expression depends on a chart variable")
    args = [evaluate_constant(c) for c in node.children]
    try:
        if kind == "add":
            return args[0] + args[1]
        if kind == "sub":
            return args[0] - args[1]
        if kind == "mul":
            return args[0] * args[1]
        if kind == "div":
            return args[0] / args[1]
        if kind == "pow":
            return float(args[0] ** args[1])
        if kind == "neg":
            return -args[0]
        return float(getattr(math, kind)(args[0]))
    except (ZeroDivisionError, ValueError, TypeError) as exc:
        from .errors import EvalError
        raise EvalError(f"cannot evaluate constant {kind}: {exc}") from exc


# -- printer ---------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


def _prec(node: ExprNode) -> int:
    return _PREC.get(node.kind, 5)


def expr_to_source(node: ExprNode) -> str:
    kind = node.kind
    if kind == "const":
        text = repr(float(node.payload))
        return f"({text})" if text.startswith("-") or "inf" in text or "nan" in text else text
    if kind == "var":
        return f"u{node.payload + 1}"
    if kind == "param":
        return node.payload[0]
    if kind in FUNCTIONS:
        return f"{kind}({expr_to_source(node.children[0])})"

    def wrap(child: ExprNode, minimum: int) -> str:
        text = expr_to_source(child)
        return f"({text})" if _prec(child) < minimum else text

    if kind == "neg":
        return "-" + wrap(node.children[0], 3)
    left, right = node.children
    p = _PREC[kind]
    if kind == "pow":
        return f"{wrap(left, 5)}^{wrap(right, 3)}"
    return f"{wrap(left, p)} {_SYMBOL[kind]} {wrap(right, p + 1)}"


def to_source(spec: ImmersionSpec) -> str:
    """Render ``spec`` as source text that parses back to an equal spec."""
    lines = [f"dim {spec.n} -> {spec.m};"]
    lines += [f"param {name} = {value!r};" for name, value in spec.params.items()]
    lines += [f"domain u{i + 1} = [{lo!r}, {hi!r}];" for i, (lo, hi) in enumerate(spec.domain)]
    lines.append("grid " + ", ".join(str(g) for g in spec.grid) + ";")
    lines += [f"x{k + 1} = {expr_to_source(c)};" for k, c in enumerate(spec.components)]
    return "\n".join(lines) + "\n"
