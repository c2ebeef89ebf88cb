"""Exact operator algebra for local field theory in one space dimension.

Every bracket between linear local densities is a distribution of the form
``sum_k c_k d_y^k delta(y - x)``.  Such kernels compose by plain polynomial
multiplication in the derivative symbol ``D``, so the whole constraint
analysis reduces to linear algebra over ``K[D]`` (operator polynomials) and
its fraction field ``K(D)``, where ``K`` is the field of rational functions in
the model parameters.

``ParamRat`` is sympy's ``FracElement``: it is always stored reduced with a
normalised denominator, so equality is structural.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import sympy
from sympy import ZZ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.rings import PolyRing

ParamRat = FracElement


class SingularMatrix(ArithmeticError):
    """Raised when an operator matrix has no inverse over ``K(D)``."""


@functools.lru_cache(maxsize=None)
def param_field(names: tuple[str, ...] = ()) -> FracField:
    """The rational function field in the given parameter names."""
    return FracField(tuple(names), ZZ)


def field_names(field: FracField) -> tuple[str, ...]:
    return tuple(str(s) for s in field.symbols)


def to_rat(value, field: FracField) -> ParamRat:
    if isinstance(value, FracElement):
        if value.field is field:
            return value
        return field.from_expr(value.as_expr())
    if isinstance(value, Fraction):
        return field(value.numerator) / field(value.denominator)
    if isinstance(value, int):
        return field(value)
    if isinstance(value, str):
        return parse_rat(value, field)
    raise TypeError(f"cannot convert {value!r} to a parameter rational")


def parse_rat(text: str, field: FracField) -> ParamRat:
    expr = sympy.sympify(text.replace("^", "**"), locals={s: sympy.Symbol(s) for s in field_names(field)})
    return field.from_expr(expr)


def format_rat(x: ParamRat) -> str:
    """Deterministic, decimal-free text form such as ``-3/2`` or ``1/(e^2*(a - 1))``."""
    if x.numer.is_ground and x.denom.is_ground:
        return str(Fraction(int(x.numer.LC) if x.numer else 0, int(x.denom.LC)))
    return str(sympy.factor(x.as_expr())).replace("**", "^")


def rat_is_negative(x: ParamRat) -> bool:
    """Sign convention: the leading (lex) numerator coefficient decides."""
    return bool(x) and x.numer.LC < 0


def specialize_rat(x: ParamRat, bindings: Mapping[str, object], field: FracField) -> ParamRat:
    subs = {sympy.Symbol(k): sympy.Rational(str(Fraction(v))) for k, v in bindings.items()}
    expr = x.as_expr().subs(subs)
    if expr.has(sympy.zoo, sympy.nan):
        raise ZeroDivisionError(f"specialisation {dict(bindings)} hits a pole of {format_rat(x)}")
    return field.from_expr(sympy.cancel(expr))


def rat_to_float(x: ParamRat, values: Mapping[str, float]) -> float:
    if x.numer.is_ground and x.denom.is_ground:
        return float(int(x.numer.LC)) / float(int(x.denom.LC)) if x else 0.0
    point = [float(values[n]) for n in field_names(x.field)]
    return float(x.numer.as_expr().evalf(subs=dict(zip(x.field.symbols, point)))) / float(
        x.denom.as_expr().evalf(subs=dict(zip(x.field.symbols, point)))
    )


# ---------------------------------------------------------------------------
# Operator polynomials


@dataclass(frozen=True, eq=False)
class OpPoly:
    """``sum_k coeffs[k] D^k`` with ``ParamRat`` coefficients, trailing zeros stripped."""

    coeffs: tuple[ParamRat, ...]
    field: FracField

    def __post_init__(self):
        cs = list(self.coeffs)
        while cs and not cs[-1]:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def zero(cls, field: FracField) -> OpPoly:
        return cls((), field)

    @classmethod
    def const(cls, c, field: FracField) -> OpPoly:
        return cls((to_rat(c, field),), field)

    @classmethod
    def monomial(cls, c, k: int, field: FracField) -> OpPoly:
        return cls((field(0),) * k + (to_rat(c, field),), field)

    @classmethod
    def D(cls, field: FracField) -> OpPoly:
        return cls.monomial(1, 1, field)

    @classmethod
    def from_list(cls, values: Iterable, field: FracField) -> OpPoly:
        return cls(tuple(to_rat(v, field) for v in values), field)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_const(self) -> bool:
        return len(self.coeffs) <= 1

    def lc(self) -> ParamRat:
        return self.coeffs[-1] if self.coeffs else self.field(0)

    def constant_term(self) -> ParamRat:
        return self.coeffs[0] if self.coeffs else self.field(0)

    def coeff(self, k: int) -> ParamRat:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.field(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, OpPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self == OpPoly.const(other, self.field)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _coerce(self, other) -> OpPoly:
        if isinstance(other, OpPoly):
            return other
        return OpPoly.const(other, self.field)

    def __add__(self, other) -> OpPoly:
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return OpPoly(tuple(self.coeff(k) + other.coeff(k) for k in range(n)), self.field)

    __radd__ = __add__

    def __neg__(self) -> OpPoly:
        return OpPoly(tuple(-c for c in self.coeffs), self.field)

    def __sub__(self, other) -> OpPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> OpPoly:
        return self._coerce(other) - self

    def __mul__(self, other) -> OpPoly:
        if not isinstance(other, OpPoly):
            c = to_rat(other, self.field)
            return OpPoly(tuple(c * x for x in self.coeffs), self.field)
        if not self.coeffs or not other.coeffs:
            return OpPoly.zero(self.field)
        out = [self.field(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if not x:
                continue
            for j, y in enumerate(other.coeffs):
                if y:
                    out[i + j] += x * y
        return OpPoly(tuple(out), self.field)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> OpPoly:
        out = OpPoly.const(1, self.field)
        for _ in range(n):
            out = out * self
        return out

    def divmod(self, other: OpPoly) -> tuple[OpPoly, OpPoly]:
        if other.is_zero():
            raise ZeroDivisionError("division by the zero operator polynomial")
        rem = list(self.coeffs)
        q = [self.field(0)] * max(len(rem) - other.degree, 1)
        inv_lc = 1 / other.lc()
        for k in range(len(rem) - 1, other.degree - 1, -1):
            c = rem[k] * inv_lc
            if not c:
                continue
            shift = k - other.degree
            q[shift] = c
            for j, y in enumerate(other.coeffs):
                rem[shift + j] -= c * y
        return OpPoly(tuple(q), self.field), OpPoly(tuple(rem), self.field)

    def __floordiv__(self, other: OpPoly) -> OpPoly:
        return self.divmod(other)[0]

    def __mod__(self, other: OpPoly) -> OpPoly:
        return self.divmod(other)[1]

    def monic(self) -> OpPoly:
        return self * (1 / self.lc()) if self.coeffs else self

    def adjoint(self) -> OpPoly:
        return op_adjoint(self)

    def compose_scale(self, s: int) -> OpPoly:
        """``p(s D)`` for an integer ``s``."""
        return OpPoly(tuple(c * (s**k) for k, c in enumerate(self.coeffs)), self.field)

    def evaluate(self, z: complex, values: Mapping[str, float] | None = None):
        """Numerical value of the symbol at ``D = z`` (numpy arrays accepted)."""
        values = values or {}
        out = 0
        for c in reversed(self.coeffs):
            out = out * z + rat_to_float(c, values)
        return out

    def specialize(self, bindings: Mapping[str, object], field: FracField) -> OpPoly:
        return OpPoly(tuple(specialize_rat(c, bindings, field) for c in self.coeffs), field)

    def __repr__(self) -> str:
        return f"OpPoly({format_poly(self)})"


def format_poly(p: OpPoly, var: str = "D") -> str:
    if p.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(p.coeffs):
        if not c:
            continue
        sym = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        cs = format_rat(c)
        if not sym:
            parts.append(cs)
        elif cs == "1":
            parts.append(sym)
        elif cs == "-1":
            parts.append(f"-{sym}")
        else:
            parts.append(f"({cs})*{sym}")
    return " + ".join(parts).replace("+ -", "- ")


def op_mul(a: OpPoly, b: OpPoly) -> OpPoly:
    """Kernel composition: ``a(D) delta`` followed by ``b(D) delta`` is ``(a b)(D) delta``."""
    return a * b


def op_adjoint(p: OpPoly) -> OpPoly:
    """``D -> -D``; the transpose rule for kernels on ``delta(y - x)``."""
    return p.compose_scale(-1)


@functools.lru_cache(maxsize=None)
def _integer_ring(names: tuple[str, ...]):
    """``Z[D, params]``; the operator symbol gets a private name."""
    return PolyRing(("_D",) + names, ZZ)


def _to_integer_poly(p: OpPoly, R):
    """Clear parameter denominators and lift to ``Z[D, params]``."""
    denom = p.field.ring(1)
    for c in p.coeffs:
        denom = denom.lcm(c.denom)
    terms = {}
    for k, c in enumerate(p.coeffs):
        if c:
            for monom, coef in (c.numer * denom.exquo(c.denom)).terms():
                terms[(k,) + monom] = coef
    return R.from_dict(terms)


def _from_integer_poly(g, field: FracField) -> OpPoly:
    parts: dict[int, dict] = {}
    for monom, coef in g.terms():
        parts.setdefault(monom[0], {})[monom[1:]] = coef
    deg = max(parts) if parts else -1
    return OpPoly(tuple(field(field.ring.from_dict(parts.get(k, {}))) for k in range(deg + 1)), field)


def poly_gcd(a: OpPoly, b: OpPoly) -> OpPoly:
    """Monic gcd in ``K[D]``.

    Euclid over rational-function coefficients suffers intermediate
    expression swell, so the gcd is taken in ``Z[D, params]`` instead; by
    Gauss's lemma the two agree up to a unit of ``K``.
    """
    if b.is_zero():
        return a.monic()
    if a.is_zero():
        return b.monic()
    if a.is_const() or b.is_const():
        return OpPoly.const(1, a.field)
    R = _integer_ring(field_names(a.field))
    g = _to_integer_poly(a, R).gcd(_to_integer_poly(b, R))
    return _from_integer_poly(g, a.field).monic()


# ---------------------------------------------------------------------------
# Fraction field K(D)


@dataclass(frozen=True, eq=False)
class OpRat:
    """Formal (possibly nonlocal) kernel ``num(D)/den(D) delta``; reduced, monic denominator."""

    num: OpPoly
    den: OpPoly

    def __post_init__(self):
        num, den = self.num, self.den
        if den.is_zero():
            raise ZeroDivisionError("operator fraction with zero denominator")
        if num.is_zero():
            den = OpPoly.const(1, den.field)
        else:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
            lc = den.lc()
            num, den = num * (1 / lc), den * (1 / lc)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def of(cls, x, field: FracField | None = None) -> OpRat:
        if isinstance(x, OpRat):
            return x
        if isinstance(x, OpPoly):
            return cls(x, OpPoly.const(1, x.field))
        return cls(OpPoly.const(x, field), OpPoly.const(1, field))

    @property
    def field(self) -> FracField:
        return self.num.field

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_local(self) -> bool:
        return self.den.degree == 0

    def as_poly(self) -> OpPoly:
        if not self.is_local():
            raise ValueError("kernel is nonlocal")
        return self.num

    def __eq__(self, other) -> bool:
        if isinstance(other, (OpPoly, int)):
            other = OpRat.of(other, self.field)
        if not isinstance(other, OpRat):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def _c(self, other) -> OpRat:
        return OpRat.of(other, self.field)

    def __add__(self, other) -> OpRat:
        o = self._c(other)
        if self.den == o.den:
            return OpRat(self.num + o.num, self.den)
        return OpRat(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> OpRat:
        return OpRat(-self.num, self.den)

    def __sub__(self, other) -> OpRat:
        return self + (-self._c(other))

    def __rsub__(self, other) -> OpRat:
        return self._c(other) - self

    def __mul__(self, other) -> OpRat:
        o = self._c(other)
        return OpRat(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> OpRat:
        o = self._c(other)
        if o.is_zero():
            raise ZeroDivisionError("division by the zero kernel")
        return OpRat(self.num * o.den, self.den * o.num)

    def adjoint(self) -> OpRat:
        return OpRat(op_adjoint(self.num), op_adjoint(self.den))

    def evaluate(self, z, values: Mapping[str, float] | None = None):
        return self.num.evaluate(z, values) / self.den.evaluate(z, values)

    def specialize(self, bindings: Mapping[str, object], field: FracField) -> OpRat:
        return OpRat(self.num.specialize(bindings, field), self.den.specialize(bindings, field))

    def __repr__(self) -> str:
        if self.is_local():
            return f"OpRat({format_poly(self.num)})"
        return f"OpRat(({format_poly(self.num)})/({format_poly(self.den)}))"


Entry = Union[OpPoly, OpRat]


# ---------------------------------------------------------------------------
# Matrices


@dataclass(frozen=True)
class OpMatrix:
    rows: tuple[tuple[Entry, ...], ...]
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if len(rows) != len(self.row_labels):
            raise ValueError("row label count does not match the matrix")
        for r in rows:
            if len(r) != len(self.col_labels):
                raise ValueError("matrix is not rectangular or column labels do not match")

    @classmethod
    def build(cls, rows: Sequence[Sequence[Entry]], row_labels=None, col_labels=None) -> OpMatrix:
        n = len(rows)
        m = len(rows[0]) if rows else 0
        row_labels = tuple(row_labels) if row_labels is not None else tuple(str(i + 1) for i in range(n))
        col_labels = tuple(col_labels) if col_labels is not None else tuple(str(j + 1) for j in range(m))
        return cls(tuple(tuple(r) for r in rows), row_labels, col_labels)

    @classmethod
    def identity(cls, labels: Sequence[str], field: FracField) -> OpMatrix:
        n = len(labels)
        one, zero = OpPoly.const(1, field), OpPoly.zero(field)
        return cls.build([[one if i == j else zero for j in range(n)] for i in range(n)], labels, labels)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.col_labels)

    def __getitem__(self, ij: tuple[int, int]) -> Entry:
        i, j = ij
        return self.rows[i][j]

    def is_square(self) -> bool:
        n, m = self.shape
        return n == m

    def as_rat(self) -> list[list[OpRat]]:
        return [[OpRat.of(x) for x in r] for r in self.rows]

    def to_local(self) -> OpMatrix:
        """Demote OpRat entries with unit denominator back to OpPoly."""
        return OpMatrix.build([[OpRat.of(x).as_poly() for x in r] for r in self.rows], self.row_labels, self.col_labels)

    def is_local(self) -> bool:
        return all(isinstance(x, OpPoly) or x.is_local() for r in self.rows for x in r)

    def matmul(self, other: OpMatrix) -> OpMatrix:
        """Operator composition ``int dz M(y, z) N(z, x)``."""
        a, b = self.as_rat(), other.as_rat()
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ValueError("inner dimensions differ")
        field = _matrix_field(self)
        out = []
        for i in range(n):
            row = []
            for j in range(m):
                acc = OpRat.of(0, field)
                for t in range(k):
                    if a[i][t] and b[t][j]:
                        acc = acc + a[i][t] * b[t][j]
                row.append(acc)
            out.append(row)
        return OpMatrix.build(out, self.row_labels, other.col_labels)

    def equals(self, other: OpMatrix) -> bool:
        if self.shape != other.shape:
            return False
        return all(OpRat.of(x) == OpRat.of(y) for r1, r2 in zip(self.rows, other.rows) for x, y in zip(r1, r2))

    def is_distributionally_antisymmetric(self) -> bool:
        n, m = self.shape
        return n == m and all(
            OpRat.of(self[i, j]) == -OpRat.of(self[j, i]).adjoint() for i in range(n) for j in range(n)
        )

    def specialize(self, bindings: Mapping[str, object], field: FracField) -> OpMatrix:
        return OpMatrix.build(
            [[x.specialize(bindings, field) for x in r] for r in self.rows], self.row_labels, self.col_labels
        )


def _matrix_field(m: OpMatrix) -> FracField:
    for r in m.rows:
        for x in r:
            return x.field
    raise ValueError("empty matrix has no coefficient field")


def _rref(rows: list[list[OpRat]]) -> tuple[list[list[OpRat]], list[int]]:
    """Reduced row echelon form over K(D); pivots scanned left to right."""
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    if not rows:
        return rows, pivots
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pivot = rows[r][c]
        rows[r] = [x / pivot for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def mat_det(m: OpMatrix) -> OpRat:
    """Exact determinant over ``K(D)``; zero iff the matrix is singular."""
    if not m.is_square():
        raise ValueError(f"determinant of a non-square {m.shape} matrix")
    n = m.shape[0]
    if n == 0:
        raise ValueError("determinant of an empty matrix")
    a = m.as_rat()
    det = OpRat.of(1, _matrix_field(m))
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return OpRat.of(0, det.field)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def mat_inverse(m: OpMatrix) -> OpMatrix:
    """Inverse kernel matrix over ``K(D)``; entries may be nonlocal ``OpRat``."""
    if not m.is_square():
        raise ValueError(f"inverse of a non-square {m.shape} matrix")
    n = m.shape[0]
    field = _matrix_field(m)
    a = m.as_rat()
    one, zero = OpRat.of(1, field), OpRat.of(0, field)
    aug = [a[i] + [one if i == j else zero for j in range(n)] for i in range(n)]
    red, pivots = _rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrix("constraint bracket matrix is singular; first-class content remains")
    inv = [row[n:] for row in red]
    # inverse maps constraint index space back: rows labelled by columns of m
    return OpMatrix.build(inv, m.col_labels, m.row_labels)


def _normalize_vector(vec: list[OpRat]) -> tuple[OpPoly, ...]:
    """Clear denominators, remove the polynomial content, make the first entry monic."""
    field = vec[0].field
    lcm = OpPoly.const(1, field)
    for x in vec:
        if x:
            g = poly_gcd(lcm, x.den)
            lcm = (lcm * x.den) // g
    polys = [(x * OpRat.of(lcm)).as_poly() for x in vec]
    content = OpPoly.zero(field)
    for p in polys:
        if p:
            content = poly_gcd(content, p) if content else p.monic()
    polys = [p // content for p in polys]
    first = next(p for p in polys if p)
    scale = 1 / first.lc()
    return tuple(p * scale for p in polys)


def mat_kernel(m: OpMatrix) -> list[tuple[OpPoly, ...]]:
    """Basis of the left kernel ``{v : v^T M = 0}``, local entries, deterministic order."""
    if not m.is_square():
        raise ValueError(f"kernel of a non-square {m.shape} matrix")
    n = m.shape[0]
    if n == 0:
        return []
    a = m.as_rat()
    transposed = [[a[i][j] for i in range(n)] for j in range(n)]
    red, pivots = _rref(transposed)
    field = _matrix_field(m)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        vec = [OpRat.of(0, field) for _ in range(n)]
        vec[f] = OpRat.of(1, field)
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][f]
        basis.append(_normalize_vector(vec))
    return basis


# ---------------------------------------------------------------------------
# Module membership over K[D]


def hermite_form(basis: Sequence[Sequence[OpPoly]]) -> list[tuple[int, list[OpPoly]]]:
    """Row Hermite normal form of the ``K[D]``-module spanned by ``basis``.

    Returns ``(pivot column, row)`` pairs with strictly increasing pivot
    columns and monic pivots.  The Euclidean norm is the degree in ``D``;
    ties go to the earliest row.
    """
    rows = [list(r) for r in basis if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out: list[tuple[int, list[OpPoly]]] = []
    for c in range(ncols):
        active = [r for r in rows if r[c]]
        rest = [r for r in rows if not r[c]]
        while len(active) > 1:
            active.sort(key=lambda r: r[c].degree)  # stable: ties keep earlier rows first
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[c] // piv[c]
                r2 = [x - q * y for x, y in zip(r, piv)]
                (nxt if r2[c] else rest).append(r2)
            active = nxt
        if active:
            piv = active[0]
            scale = 1 / piv[c].lc()
            piv = [x * scale for x in piv]
            for _, prev in out:
                q = prev[c] // piv[c]
                if q:
                    prev[:] = [x - q * y for x, y in zip(prev, piv)]
            out.append((c, piv))
        rows = [r for r in rest if any(r)]
    return out


def hermite_reduce(v: Sequence[OpPoly], basis: Sequence[Sequence[OpPoly]]) -> tuple[OpPoly, ...]:
    """Residual of ``v`` modulo the local module generated by ``basis``.

    The residual is zero exactly when ``v`` is a ``K[D]``-combination of the
    basis rows.
    """
    res = list(v)
    for c, row in hermite_form(basis):
        if res[c]:
            q = res[c] // row[c]
            if q:
                res = [x - q * y for x, y in zip(res, row)]
    return tuple(res)


# ---------------------------------------------------------------------------
# JSON forms


def poly_to_json(p: OpPoly) -> dict:
    return {"coeffs": [format_rat(c) for c in p.coeffs] or ["0"], "var": "D"}


def poly_from_json(obj: Mapping, field: FracField) -> OpPoly:
    if obj.get("var", "D") != "D":
        raise ValueError(f"unsupported operator variable {obj['var']!r}")
    return OpPoly(tuple(parse_rat(c, field) for c in obj["coeffs"]), field)


def rat_to_json(r: OpRat) -> dict:
    return {"num": poly_to_json(r.num), "den": poly_to_json(r.den)}


def rat_from_json(obj: Mapping, field: FracField) -> OpRat:
    return OpRat(poly_from_json(obj["num"], field), poly_from_json(obj["den"], field))


def entry_to_json(x: Entry) -> dict:
    if isinstance(x, OpRat):
        return rat_to_json(x) if not x.is_local() else poly_to_json(x.num)
    return poly_to_json(x)


def entry_from_json(obj: Mapping, field: FracField) -> Entry:
    if "num" in obj:
        return rat_from_json(obj, field)
    return poly_from_json(obj, field)


def matrix_to_json(m: OpMatrix) -> dict:
    return {
        "row_labels": list(m.row_labels),
        "col_labels": list(m.col_labels),
        "rows": [[entry_to_json(x) for x in r] for r in m.rows],
    }


def matrix_from_json(obj: Mapping, field: FracField) -> OpMatrix:
    return OpMatrix.build(
        [[entry_from_json(x, field) for x in r] for r in obj["rows"]], obj["row_labels"], obj["col_labels"]
    )


# ---------------------------------------------------------------------------
# Human-readable kernels


def _kernel_poly_text(p: OpPoly) -> str:
    terms = []
    for k, c in enumerate(p.coeffs):
        if not c:
            continue
        op = "" if k == 0 else ("d_y " if k == 1 else f"d_y^{k} ")
        cs = format_rat(c)
        if cs == "1":
            terms.append(f"{op}delta(y-x)")
        elif cs == "-1":
            terms.append(f"-{op}delta(y-x)")
        elif any(ch in cs for ch in "+*/ ") or cs.startswith("-") and not cs[1:].isdigit():
            terms.append(f"({cs}) {op}delta(y-x)")
        else:
            terms.append(f"{cs} {op}delta(y-x)")
    return " + ".join(terms).replace("+ -", "- ")


def kernel_text(x: Entry) -> str:
    """E.g. ``(1/(e^2*(a - 1))) d_y delta(y-x)``."""
    r = OpRat.of(x)
    if r.is_zero():
        return "0"
    if r.is_local():
        return _kernel_poly_text(r.num)
    return f"[{format_poly(r.num, 'd_y')}] / [{format_poly(r.den, 'd_y')}] delta(y-x)"


def parse_kernel(text: str, field: FracField) -> OpRat:
    """Read a kernel written as a rational expression in ``D`` and the parameters, e.g. ``2*D`` or ``-1/(e*(a-1))*D``."""
    names = field_names(field)
    if "D" in names:
        raise ValueError("parameter named D clashes with the derivative symbol")
    D = sympy.Symbol("D")
    local = {s: sympy.Symbol(s) for s in names}
    local["D"] = D
    expr = sympy.together(sympy.sympify(text.replace("^", "**"), locals=local))
    num, den = sympy.fraction(expr)

    def as_poly(e) -> OpPoly:
        p = sympy.Poly(sympy.expand(e), D)
        coeffs = [field.from_expr(c) for c in reversed(p.all_coeffs())]
        return OpPoly.from_list(coeffs, field)

    return OpRat(as_poly(num), as_poly(den))
