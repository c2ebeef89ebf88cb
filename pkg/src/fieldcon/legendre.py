"""Legendre transform of quadratic field Lagrangians.

Phase-space coordinates are ordered as fields, their momenta ``pi_<field>``,
then Lagrange multipliers ``lambda<k>`` and their momenta ``p_lambda<k>``.
A linear density ``F(y) = sum_i c_i(D) z_i(y)`` is a ``PhaseDensity``; a
quadratic Hamiltonian ``H = int 1/2 z^T K(D) z`` is a ``QuadHamiltonian``
with ``K_ij(D) = K_ji(-D)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from sympy.polys.fields import FracField

from .frontend import Expr, ModelIR, Sym, parse_density, parse_quadratic_density, render_expr
from .symkernel import (
    OpMatrix,
    OpPoly,
    OpRat,
    ParamRat,
    SingularMatrix,
    _rref,
    format_rat,
    mat_inverse,
    matrix_to_json,
    param_field,
    poly_to_json,
)


class InternalError(RuntimeError):
    """A bookkeeping invariant of the transform was violated."""


def momentum_name(field: str) -> str:
    return f"pi_{field}"


def multiplier_name(k: int) -> str:
    return f"lambda{k}"


@dataclass(frozen=True)
class PhaseSpace:
    """Ordered canonical coordinates for a model, optionally with multipliers."""

    fields: tuple[str, ...]
    multipliers: tuple[str, ...] = ()
    field_params: tuple[str, ...] = ()

    @property
    def field(self) -> FracField:
        return param_field(self.field_params)

    @cached_property
    def momenta(self) -> tuple[str, ...]:
        return tuple(momentum_name(f) for f in self.fields)

    @cached_property
    def multiplier_momenta(self) -> tuple[str, ...]:
        return tuple(f"p_{m}" for m in self.multipliers)

    @cached_property
    def coords(self) -> tuple[str, ...]:
        return self.fields + self.momenta + self.multipliers + self.multiplier_momenta

    @cached_property
    def canonical(self) -> tuple[str, ...]:
        """Field and momentum coordinates, the ones that enter bracket matrices."""
        return self.fields + self.momenta

    @cached_property
    def pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(zip(self.fields, self.momenta)) + tuple(zip(self.multipliers, self.multiplier_momenta))

    @cached_property
    def _index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.coords)}

    def index(self, coord: str) -> int:
        try:
            return self._index[coord]
        except KeyError:
            raise KeyError(f"{coord!r} is not a coordinate of this phase space") from None

    def conjugate(self, coord: str) -> tuple[str, int]:
        """Return the partner of ``coord`` and the sign of ``{coord, partner}``."""
        for q, p in self.pairs:
            if coord == q:
                return p, 1
            if coord == p:
                return q, -1
        raise KeyError(coord)

    def with_multipliers(self, count: int) -> PhaseSpace:
        return PhaseSpace(self.fields, tuple(multiplier_name(k) for k in range(count)), self.field_params)


@dataclass(frozen=True, eq=False)
class PhaseDensity:
    """``sum_i c_i(D) z_i`` with one coefficient slot per coordinate of ``space``."""

    space: PhaseSpace
    coeffs: tuple[OpPoly, ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.space.coords):
            raise ValueError("coefficient count does not match the phase space")

    @classmethod
    def zero(cls, space: PhaseSpace) -> PhaseDensity:
        z = OpPoly.zero(space.field)
        return cls(space, (z,) * len(space.coords))

    @classmethod
    def of(cls, space: PhaseSpace, terms: Mapping[str, OpPoly | ParamRat | int]) -> PhaseDensity:
        out = list(cls.zero(space).coeffs)
        for name, c in terms.items():
            if not isinstance(c, OpPoly):
                c = OpPoly.const(c, space.field)
            out[space.index(name)] = out[space.index(name)] + c
        return cls(space, tuple(out))

    @classmethod
    def coordinate(cls, space: PhaseSpace, name: str) -> PhaseDensity:
        return cls.of(space, {name: 1})

    @classmethod
    def from_expr(cls, space: PhaseSpace, expr: Expr) -> PhaseDensity:
        out = list(cls.zero(space).coeffs)
        for mono, c in expr.terms.items():
            (s,) = mono
            i = space.index(s.name)
            out[i] = out[i] + OpPoly.monomial(c, s.nx, space.field)
        return cls(space, tuple(out))

    @classmethod
    def parse(cls, space: PhaseSpace, text: str) -> PhaseDensity:
        return cls.from_expr(space, parse_density(text, space.coords, space.field, space.field_params))

    def __getitem__(self, name: str) -> OpPoly:
        return self.coeffs[self.space.index(name)]

    def items(self) -> list[tuple[str, OpPoly]]:
        return [(c, p) for c, p in zip(self.space.coords, self.coeffs) if p]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, PhaseDensity) and self.space == other.space and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: PhaseDensity) -> PhaseDensity:
        return PhaseDensity(self.space, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> PhaseDensity:
        return PhaseDensity(self.space, tuple(-a for a in self.coeffs))

    def __sub__(self, other: PhaseDensity) -> PhaseDensity:
        return self + (-other)

    def apply(self, op: OpPoly | ParamRat | int) -> PhaseDensity:
        """Left-compose with an operator: ``op(D) F``."""
        if not isinstance(op, OpPoly):
            op = OpPoly.const(op, self.space.field)
        return PhaseDensity(self.space, tuple(op * a for a in self.coeffs))

    def vector(self, coords: Sequence[str] | None = None) -> tuple[OpPoly, ...]:
        coords = self.space.canonical if coords is None else coords
        return tuple(self[c] for c in coords)

    @classmethod
    def from_vector(cls, space: PhaseSpace, vec: Sequence[OpPoly], coords: Sequence[str] | None = None) -> PhaseDensity:
        coords = space.canonical if coords is None else coords
        return cls.of(space, dict(zip(coords, vec)))

    def restrict(self, coords: Iterable[str]) -> PhaseDensity:
        keep = set(coords)
        z = OpPoly.zero(self.space.field)
        return PhaseDensity(self.space, tuple(p if c in keep else z for c, p in zip(self.space.coords, self.coeffs)))

    def split_multipliers(self) -> tuple[PhaseDensity, dict[str, OpPoly]]:
        """Separate the canonical part from multiplier coefficients."""
        lam = {m: self[m] for m in self.space.multipliers if self[m]}
        return self.restrict(self.space.canonical), lam

    def embed(self, space: PhaseSpace) -> PhaseDensity:
        """Re-express over a larger phase space sharing the same fields."""
        return PhaseDensity.of(space, dict(self.items()))

    def leading(self) -> tuple[str, OpPoly] | None:
        """Highest-index coordinate with a nonzero coefficient."""
        items = self.items()
        return items[-1] if items else None

    def normalized(self) -> PhaseDensity:
        """Scale so the leading coefficient operator is monic."""
        lead = self.leading()
        if lead is None:
            return self
        return self.apply(1 / lead[1].lc())

    def specialize(self, bindings: Mapping[str, object], space: PhaseSpace) -> PhaseDensity:
        return PhaseDensity(space, tuple(p.specialize(bindings, space.field) for p in self.coeffs))

    def to_json(self) -> dict:
        return {c: poly_to_json(p) for c, p in self.items()}

    def __str__(self) -> str:
        return render_density(self)

    def __repr__(self) -> str:
        return f"PhaseDensity({self})"


def _dx(name: str, n: int) -> str:
    for _ in range(n):
        name = f"dx({name})"
    return name


def render_density(f: PhaseDensity) -> str:
    parts = []
    for coord, poly in f.items():
        for k, c in enumerate(poly.coeffs):
            if not c:
                continue
            cs = format_rat(c)
            atom = _dx(coord, k)
            if cs == "1":
                parts.append(atom)
            elif cs == "-1":
                parts.append("-" + atom)
            else:
                parts.append(f"({cs})*{atom}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")


# Quadratic Hamiltonians ------------------------------------------------------


def _self_adjoint(bilinear: list[list[OpPoly]]) -> list[list[OpPoly]]:
    n = len(bilinear)
    return [[bilinear[i][j] + bilinear[j][i].adjoint() for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class QuadHamiltonian:
    """``H = int 1/2 z^T K(D) z + sum_a lambda_a Phi_a`` over the canonical coordinates."""

    space: PhaseSpace
    kernel: OpMatrix
    couplings: tuple[tuple[str, PhaseDensity], ...] = ()

    def __post_init__(self):
        n = len(self.space.canonical)
        if self.kernel.shape != (n, n):
            raise ValueError("kernel shape does not match the canonical coordinates")
        for i in range(n):
            for j in range(n):
                if self.kernel[i, j] != self.kernel[j, i].adjoint():
                    raise InternalError("Hamiltonian kernel is not self-adjoint")

    @classmethod
    def from_bilinear(cls, space: PhaseSpace, bilinear: list[list[OpPoly]], couplings=()) -> QuadHamiltonian:
        labels = space.canonical
        return cls(space, OpMatrix.build(_self_adjoint(bilinear), labels, labels), tuple(couplings))

    @classmethod
    def from_expr(cls, space: PhaseSpace, expr: Expr, couplings=()) -> QuadHamiltonian:
        """Build from a quadratic density over the canonical coordinates (with ``dx`` nesting)."""
        coords = space.canonical
        idx = {c: i for i, c in enumerate(coords)}
        K = space.field
        n = len(coords)
        B = [[OpPoly.zero(K) for _ in range(n)] for _ in range(n)]
        for mono, c in expr.terms.items():
            s1, s2 = mono
            # int (D^m z_i)(D^n z_j) = int z_i (-D)^m D^n z_j
            op = OpPoly.monomial(c * (-1) ** s1.nx, s1.nx + s2.nx, K)
            B[idx[s1.name]][idx[s2.name]] = B[idx[s1.name]][idx[s2.name]] + op
        return cls.from_bilinear(space, B, couplings)

    @classmethod
    def parse(cls, space: PhaseSpace, text: str, couplings=()) -> QuadHamiltonian:
        expr = parse_quadratic_density(text, space.canonical, space.field, space.field_params)
        return cls.from_expr(space, expr, couplings)

    def gradient(self, coord: str) -> PhaseDensity:
        """Functional derivative of the quadratic part with respect to ``coord``."""
        i = self.space.canonical.index(coord)
        return PhaseDensity.from_vector(self.space, [self.kernel[i, j] for j in range(len(self.space.canonical))])

    def same_density(self, other: QuadHamiltonian) -> bool:
        """Equality of the quadratic parts up to integration by parts."""
        return self.kernel.equals(other.kernel)

    def specialize(self, bindings: Mapping[str, object]) -> QuadHamiltonian:
        rest = tuple(p for p in self.space.field_params if p not in bindings)
        space = PhaseSpace(self.space.fields, self.space.multipliers, rest)
        kernel = self.kernel.specialize(bindings, space.field)
        couplings = tuple((m, f.specialize(bindings, space)) for m, f in self.couplings)
        return QuadHamiltonian(space, kernel, couplings)

    def render(self) -> str:
        """Density text with derivatives moved to a canonical placement."""
        coords = self.space.canonical
        n = len(coords)
        parts = []
        for i in range(n):
            for j in range(i, n):
                poly = self.kernel[i, j]
                for k, c in enumerate(poly.coeffs):
                    if not c:
                        continue
                    if i == j:
                        if k % 2:
                            continue
                        # 1/2 z D^{2m} z = 1/2 (-1)^m (D^m z)^2
                        coef = c * (-1) ** (k // 2) / 2
                        body = f"{_dx(coords[i], k // 2)}^2"
                    else:
                        coef = c
                        body = f"{coords[i]}*{_dx(coords[j], k)}"
                    cs = format_rat(coef)
                    parts.append(body if cs == "1" else ("-" + body if cs == "-1" else f"({cs})*{body}"))
        text = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        for m, f in self.couplings:
            text += f" + {m}*({f})"
        return text

    def to_json(self) -> dict:
        return {
            "kernel": matrix_to_json(self.kernel),
            "density": self.render(),
            "couplings": [{"multiplier": m, "constraint": f.to_json()} for m, f in self.couplings],
        }


# Legendre transform ----------------------------------------------------------


@dataclass(frozen=True)
class _Split:
    """Lagrangian ``1/2 v^T W v + v^T b(D) q + L_q`` in matrix form."""

    W: list[list[ParamRat]]
    b: list[list[OpPoly]]
    Lq: list[list[OpPoly]]  # bilinear form of the velocity-free part


def _split(m: ModelIR) -> _Split:
    K = m.field
    n = len(m.fields)
    idx = {f: i for i, f in enumerate(m.fields)}
    W = [[K(0)] * n for _ in range(n)]
    b = [[OpPoly.zero(K) for _ in range(n)] for _ in range(n)]
    Lq = [[OpPoly.zero(K) for _ in range(n)] for _ in range(n)]
    for s1, s2, c in m.terms:
        i, j = idx[s1.name], idx[s2.name]
        if s1.dt and s2.dt:
            if i == j:
                W[i][i] += 2 * c
            else:
                W[i][j] += c
                W[j][i] += c
        elif s1.dt or s2.dt:
            v, q = (s1, s2) if s1.dt else (s2, s1)
            b[idx[v.name]][idx[q.name]] = b[idx[v.name]][idx[q.name]] + OpPoly.monomial(c, q.nx, K)
        else:
            op = OpPoly.monomial(c * (-1) ** s1.nx, s1.nx + s2.nx, K)
            Lq[i][j] = Lq[i][j] + op
    return _Split(W, b, Lq)


def phase_space(m: ModelIR, multipliers: int = 0) -> PhaseSpace:
    return PhaseSpace(m.fields, tuple(multiplier_name(k) for k in range(multipliers)), m.params)


def compute_momenta(m: ModelIR) -> list[tuple[str, Expr]]:
    """``pi_i = dL/d(dt f_i)`` as linear expressions in velocities and fields."""
    sp = _split(m)
    K = m.field
    out = []
    for i, f in enumerate(m.fields):
        e = Expr({}, K)
        for j, g in enumerate(m.fields):
            if sp.W[i][j]:
                e = e + Expr.atom(Sym(g, dt=1), K).scale(sp.W[i][j])
            for k, c in enumerate(sp.b[i][j].coeffs):
                if c:
                    e = e + Expr.atom(Sym(g, nx=k), K).scale(c)
        out.append((momentum_name(f), e))
    return out


def _hessian_rref(sp: _Split, K: FracField) -> tuple[list[list[OpRat]], list[int]]:
    rows = [[OpRat.of(x, K) for x in row] for row in sp.W]
    return _rref(rows)


def _null_vectors(sp: _Split, K: FracField) -> list[list[ParamRat]]:
    n = len(sp.W)
    rows, pivots = _hessian_rref(sp, K)
    free = [j for j in range(n) if j not in pivots]
    vecs = []
    for fcol in free:
        v = [K(0)] * n
        v[fcol] = K(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][fcol].as_poly().constant_term()
        vecs.append(v)
    return vecs


def _momentum_residuals(m: ModelIR, sp: _Split, space: PhaseSpace) -> list[PhaseDensity]:
    """``u_i = pi_i - sum_j b_ij(D) f_j``."""
    out = []
    for i, f in enumerate(m.fields):
        terms: dict[str, OpPoly] = {momentum_name(f): OpPoly.const(1, space.field)}
        for j, g in enumerate(m.fields):
            if sp.b[i][j]:
                terms[g] = terms.get(g, OpPoly.zero(space.field)) - sp.b[i][j]
        out.append(PhaseDensity.of(space, terms))
    return out


def primary_constraints(m: ModelIR, space: PhaseSpace | None = None) -> list[PhaseDensity]:
    """One constraint ``n^T (pi - b(D) f)`` per null vector ``n`` of the velocity Hessian."""
    space = space or phase_space(m)
    sp = _split(m)
    u = _momentum_residuals(m, sp, space)
    out = []
    for vec in _null_vectors(sp, space.field):
        acc = PhaseDensity.zero(space)
        for c, ui in zip(vec, u):
            if c:
                acc = acc + ui.apply(c)
        out.append(acc)
    return out


def canonical_hamiltonian(m: ModelIR, extended: bool = True) -> QuadHamiltonian:
    """Eliminate velocities on the invertible Hessian block.

    Null-direction velocities are set to zero; they reappear through the
    multipliers of the extended Hamiltonian, one per primary constraint.
    """
    sp = _split(m)
    n = len(m.fields)
    base = phase_space(m)
    prim = primary_constraints(m, base)
    space = base.with_multipliers(len(prim)) if extended else base
    K = space.field
    _, pivots = _hessian_rref(sp, K)
    if len(pivots) + len(prim) != n:
        raise InternalError("Hessian rank and null space do not add up")
    block = OpMatrix.build([[OpPoly.const(sp.W[i][j], K) for j in pivots] for i in pivots])
    try:
        inv = mat_inverse(block) if pivots else block
    except SingularMatrix:
        raise InternalError("pivot block of the velocity Hessian is singular") from None
    u = _momentum_residuals(m, sp, space)
    coords = space.canonical
    nc = len(coords)
    B = [[OpPoly.zero(K) for _ in range(nc)] for _ in range(nc)]
    for r, pr in enumerate(pivots):
        for s, ps in enumerate(pivots):
            entry = inv[r, s]
            if not entry:
                continue
            if not (entry.is_local() and entry.as_poly().is_const()):
                raise InternalError("velocity survived elimination: Hessian inverse is not constant")
            mrs = entry.as_poly().constant_term() / 2
            ur, us = u[pr].vector(), u[ps].vector()
            for k in range(nc):
                if not ur[k]:
                    continue
                for l in range(nc):
                    if us[l]:
                        B[k][l] = B[k][l] + ur[k].adjoint() * us[l] * mrs
    for i in range(n):
        for j in range(n):
            B[i][j] = B[i][j] - sp.Lq[i][j]
    couplings = ()
    if extended:
        couplings = tuple((mname, c.embed(space)) for mname, c in zip(space.multipliers, prim))
    return QuadHamiltonian.from_bilinear(space, B, couplings)


def hamilton_equations(h: QuadHamiltonian) -> dict[str, PhaseDensity]:
    """``dz/dt = {z, H_E}`` for every coordinate, multipliers included."""
    space = h.space
    K = space.field
    out: dict[str, PhaseDensity] = {}
    for f, p in zip(space.fields, space.momenta):
        out[f] = h.gradient(p)
        out[p] = -h.gradient(f)
    for lam, phi in h.couplings:
        for f, p in zip(space.fields, space.momenta):
            if phi[p]:
                out[f] = out[f] + PhaseDensity.of(space, {lam: phi[p].adjoint()})
            if phi[f]:
                out[p] = out[p] - PhaseDensity.of(space, {lam: phi[f].adjoint()})
    for lam, phi in h.couplings:
        out[lam] = PhaseDensity.zero(space)
        out[f"p_{lam}"] = -phi
    return {c: out[c] for c in space.coords if c in out}


def momenta_json(momenta: Sequence[tuple[str, Expr]]) -> list[dict]:
    return [{"momentum": name, "expression": render_expr(e)} for name, e in momenta]
