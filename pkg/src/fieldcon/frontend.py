"""Model DSL: parsing, validation and printing of quadratic 1+1 dimensional Lagrangians.

Grammar (whitespace-insensitive, ``#`` starts a comment)::

    params a e;
    fields phi A0 A1;
    L = 1/2*dt(phi)^2 - 1/2*dx(phi)^2 + e*(dt(phi) + dx(phi))*(A0 - A1) + ...;

``dt(.)`` and ``dx(.)`` are time and space derivatives.  The same expression
syntax is used for constraint densities (gauge conditions), where momenta are
written ``pi_<field>`` and ``dx`` may be nested.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Mapping

from sympy.polys.fields import FracField

from .symkernel import ParamRat, format_rat, param_field, specialize_rat, to_rat


class ParseError(ValueError):
    """Syntax error carrying a 1-based line/column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class SemanticError(ValueError):
    """Well-formed input that is not an admissible model."""


# Symbols -------------------------------------------------------------------

DERIV_ORDER = {"": 0, "t": 1, "x": 2}


@dataclass(frozen=True, order=True)
class Sym:
    """A field value ``f``, velocity ``dt(f)`` or gradient ``dx(f)``.

    In density mode ``nx`` counts nested space derivatives.
    """

    name: str
    dt: int = 0
    nx: int = 0

    def __str__(self) -> str:
        s = self.name
        for _ in range(self.nx):
            s = f"dx({s})"
        if self.dt:
            s = f"dt({s})"
        return s


class Expr:
    """Polynomial in ``Sym`` atoms with ``ParamRat`` coefficients."""

    __slots__ = ("terms", "field")

    def __init__(self, terms: Mapping[tuple[Sym, ...], ParamRat], field: FracField):
        self.field = field
        self.terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def const(cls, c, field: FracField) -> Expr:
        return cls({(): to_rat(c, field)}, field)

    @classmethod
    def atom(cls, s: Sym, field: FracField) -> Expr:
        return cls({(s,): field(1)}, field)

    def degrees(self) -> set[int]:
        return {len(k) for k in self.terms}

    def is_const(self) -> bool:
        return all(len(k) == 0 for k in self.terms)

    def const_value(self) -> ParamRat:
        return self.terms.get((), self.field(0))

    def __add__(self, other: Expr) -> Expr:
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, self.field(0)) + v
        return Expr(out, self.field)

    def __neg__(self) -> Expr:
        return Expr({k: -v for k, v in self.terms.items()}, self.field)

    def __sub__(self, other: Expr) -> Expr:
        return self + (-other)

    def __mul__(self, other: Expr | int) -> Expr:
        if not isinstance(other, Expr):
            other = Expr.const(other, self.field)
        out: dict[tuple[Sym, ...], ParamRat] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(sorted(k1 + k2))
                out[k] = out.get(k, self.field(0)) + v1 * v2
        return Expr(out, self.field)

    __rmul__ = __mul__

    def scale(self, c: ParamRat) -> Expr:
        return Expr({k: v * c for k, v in self.terms.items()}, self.field)

    def map_atoms(self, fn) -> Expr:
        """Apply a linear map to every atom of a linear expression."""
        out = Expr({}, self.field)
        for k, v in self.terms.items():
            if len(k) != 1:
                raise ValueError("map_atoms needs a linear expression")
            out = out + fn(k[0]).scale(v)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Expr({render_expr(self)})"


def render_expr(e: Expr) -> str:
    if not e.terms:
        return "0"
    parts = []
    for mono in sorted(e.terms):
        c = e.terms[mono]
        factors = []
        for s in sorted(set(mono)):
            n = mono.count(s)
            factors.append(str(s) if n == 1 else f"{s}^{n}")
        cs = format_rat(c)
        body = "*".join(factors)
        if not body:
            parts.append(f"({cs})")
        elif cs == "1":
            parts.append(body)
        elif cs == "-1":
            parts.append(f"-{body}")
        else:
            parts.append(f"({cs})*{body}")
    return " + ".join(parts).replace("+ -", "- ")


# Lexer ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)|(?P<num>\d+(?:\.\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^();=])|(?P<bad>.)"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            continue
        elif kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r}", line, col)
        else:
            toks.append(Token(kind, m.group(), line, col))
    toks.append(Token("eof", "", line, len(text) - line_start + 1))
    return toks


# Parser --------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], field: FracField, names: Iterable[str], params: Iterable[str], density: bool):
        self.toks = tokens
        self.i = 0
        self.field = field
        self.names = set(names)
        self.params = list(params)
        self.density = density

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.tok
        if t.text != text:
            what = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {what!r}", t.line, t.col)
        return self.next()

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.next()
            rhs = self.unary()
            if op.text == "*":
                e = e * rhs
            else:
                if not rhs.is_const():
                    raise SemanticError(f"division by a field expression at line {op.line}, column {op.col}")
                c = rhs.const_value()
                if not c:
                    raise SemanticError(f"division by zero at line {op.line}, column {op.col}")
                e = e.scale(1 / c)
        return e

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.next()
            return -self.unary()
        if self.tok.text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.text == "^":
            self.next()
            t = self.next()
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be a non-negative integer", t.line, t.col)
            out = Expr.const(1, self.field)
            for _ in range(int(t.text)):
                out = out * base
            return out
        return base

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.next()
            return Expr.const(Fraction(t.text), self.field)
        if t.text == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            self.next()
            if t.text in ("dt", "dx") and self.tok.text == "(":
                self.next()
                inner = self.expr()
                self.expect(")")
                return self.derivative(t, inner)
            if t.text in self.params:
                return Expr({(): self.field.from_expr(_symbol(t.text))}, self.field)
            if t.text in self.names:
                return Expr.atom(Sym(t.text), self.field)
            raise SemanticError(f"undeclared name {t.text!r} at line {t.line}, column {t.col}")
        what = t.text or "end of input"
        raise ParseError(f"unexpected {what!r}", t.line, t.col)

    def derivative(self, tok: Token, inner: Expr) -> Expr:
        where = f"at line {tok.line}, column {tok.col}"
        if inner.degrees() - {1}:
            raise SemanticError(f"{tok.text}() of a non-linear or constant expression {where}")

        def shift(s: Sym) -> Expr:
            if tok.text == "dt":
                if self.density:
                    raise SemanticError(f"time derivative in a phase-space density {where}")
                if s.dt or s.nx:
                    raise SemanticError(f"second derivative {tok.text}({s}) {where}")
                return Expr.atom(Sym(s.name, dt=1), self.field)
            if s.dt or (s.nx and not self.density):
                raise SemanticError(f"second derivative {tok.text}({s}) {where}")
            return Expr.atom(Sym(s.name, s.dt, s.nx + 1), self.field)

        return inner.map_atoms(shift)


def _symbol(name: str):
    import sympy

    return sympy.Symbol(name)


def _statements(tokens: list[Token]) -> list[list[Token]]:
    out, cur = [], []
    for t in tokens:
        if t.kind == "eof":
            break
        if t.text == ";":
            out.append(cur)
            cur = []
        else:
            cur.append(t)
    if cur:
        raise ParseError("missing ';' at end of statement", cur[-1].line, cur[-1].col + len(cur[-1].text))
    return out


# Model IR ------------------------------------------------------------------


def _sym_key(fields: tuple[str, ...]):
    return lambda s: (fields.index(s.name), s.dt, s.nx)


@dataclass(frozen=True)
class ModelIR:
    """Validated quadratic Lagrangian over ``{f, dt(f), dx(f)}``.

    Conventions: metric diag(+1, -1), epsilon^{01} = +1 and
    ``{q(y), p(x)} = delta(y - x)``.
    """

    params: tuple[str, ...]
    fields: tuple[str, ...]
    terms: tuple[tuple[Sym, Sym, ParamRat], ...]
    name: str = ""

    @property
    def field(self) -> FracField:
        return param_field(self.params)

    @classmethod
    def from_expr(cls, params, fields, lag: Expr, name: str = "") -> ModelIR:
        params, fields = tuple(params), tuple(fields)
        key = _sym_key(fields)
        terms = []
        for mono, c in lag.terms.items():
            if len(mono) != 2:
                shown = "*".join(map(str, mono)) or "constant"
                raise SemanticError(f"non-quadratic term {shown} (degree {len(mono)})")
            s1, s2 = sorted(mono, key=key)
            terms.append((s1, s2, c))
        terms.sort(key=lambda t: (key(t[0]), key(t[1])))
        return cls(params, fields, tuple(terms), name)

    def lagrangian(self) -> Expr:
        return Expr({(s1, s2) if s1 <= s2 else (s2, s1): c for s1, s2, c in self.terms}, self.field)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModelIR)
            and self.params == other.params
            and self.fields == other.fields
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.params, self.fields, self.terms))

    def specialize(self, bindings: Mapping[str, object]) -> ModelIR:
        for k in bindings:
            if k not in self.params:
                raise SemanticError(f"unknown parameter {k!r}")
        rest = tuple(p for p in self.params if p not in bindings)
        field = param_field(rest)
        terms = []
        for s1, s2, c in self.terms:
            c2 = specialize_rat(c, bindings, field)
            if c2:
                terms.append((s1, s2, c2))
        return ModelIR(rest, self.fields, tuple(terms), self.name)


def print_model(ir: ModelIR) -> str:
    lines = []
    if ir.params:
        lines.append("params " + " ".join(ir.params) + ";")
    lines.append("fields " + " ".join(ir.fields) + ";")
    parts = []
    for s1, s2, c in ir.terms:
        body = f"{s1}^2" if s1 == s2 else f"{s1}*{s2}"
        parts.append(f"({format_rat(c)})*{body}")
    lines.append("L = " + (" + ".join(parts) if parts else "0") + ";")
    return "\n".join(lines) + "\n"


def parse_model(text: str, name: str = "") -> ModelIR:
    """Parse and validate DSL source into a ``ModelIR``."""
    toks = tokenize(text)
    params: list[str] = []
    fields: list[str] = []
    lag: Expr | None = None
    for stmt in _statements(toks):
        if not stmt:
            continue
        head = stmt[0]
        if head.text in ("params", "fields"):
            names = []
            for t in stmt[1:]:
                if t.kind != "name":
                    raise ParseError(f"expected a name, found {t.text!r}", t.line, t.col)
                if t.text in ("dt", "dx", "L") or t.text in params or t.text in fields or t.text in names:
                    raise SemanticError(f"name {t.text!r} declared twice or reserved (line {t.line})")
                names.append(t.text)
            (params if head.text == "params" else fields).extend(names)
        elif head.text == "L":
            if lag is not None:
                raise SemanticError(f"second Lagrangian definition at line {head.line}")
            if len(stmt) < 2 or stmt[1].text != "=":
                t = stmt[1] if len(stmt) > 1 else head
                raise ParseError("expected '=' after L", t.line, t.col)
            last = stmt[-1]
            eof = Token("eof", "", last.line, last.col + len(last.text))
            p = _Parser(stmt[2:] + [eof], param_field(tuple(params)), fields, params, False)
            lag = p.expr()
            if p.tok.kind != "eof":
                raise ParseError(f"unexpected {p.tok.text!r}", p.tok.line, p.tok.col)
        else:
            raise ParseError(f"unknown statement {head.text!r}", head.line, head.col)
    if not fields:
        raise SemanticError("no fields declared")
    if lag is None:
        raise SemanticError("no Lagrangian 'L = ...;' given")
    for mono in lag.terms:
        if len(mono) == 1:
            raise SemanticError(f"linear term {mono[0]} is not allowed (non-quadratic)")
    return ModelIR.from_expr(params, fields, lag, name)


def parse_density(text: str, coords: Iterable[str], field: FracField, params: Iterable[str] = ()) -> Expr:
    """Parse a linear phase-space density such as ``-pi_phi - dx(phi) + A0``."""
    toks = tokenize(text)
    p = _Parser(toks, field, coords, params, True)
    e = p.expr()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.line, p.tok.col)
    if e.degrees() - {1}:
        raise SemanticError(f"density {text!r} is not linear and homogeneous")
    return e


def parse_quadratic_density(text: str, coords: Iterable[str], field: FracField, params: Iterable[str] = ()) -> Expr:
    """Parse a homogeneous quadratic phase-space density such as a Hamiltonian."""
    toks = tokenize(text)
    p = _Parser(toks, field, coords, params, True)
    e = p.expr()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p.tok.text!r}", p.tok.line, p.tok.col)
    if e.degrees() - {2}:
        raise SemanticError(f"density {text!r} is not quadratic and homogeneous")
    return e


@dataclass(frozen=True)
class GaugeSpec:
    """Gauge-fixing conditions, kept as source text; resolved against a phase space later."""

    conditions: tuple[str, ...] = dc_field(default_factory=tuple)


def parse_gauge_file(text: str) -> GaugeSpec:
    lines = []
    for raw in text.splitlines():
        s = raw.split("#", 1)[0].strip().rstrip(";").strip()
        if s:
            lines.append(s)
    return GaugeSpec(tuple(lines))
