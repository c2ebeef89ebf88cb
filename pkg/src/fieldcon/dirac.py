"""Dirac-Bergmann analysis: brackets, the consistency loop, classification,
gauge fixing and Dirac brackets for linear constraints."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

from .frontend import GaugeSpec, ModelIR
from .legendre import PhaseDensity, PhaseSpace, QuadHamiltonian, canonical_hamiltonian, hamilton_equations
from .symkernel import (
    OpMatrix,
    OpPoly,
    OpRat,
    SingularMatrix,
    entry_to_json,
    format_poly,
    hermite_reduce,
    kernel_text,
    mat_inverse,
    mat_kernel,
    matrix_to_json,
    poly_to_json,
)

log = logging.getLogger(__name__)

PRIMARY, SECONDARY, GAUGE = "primary", "secondary", "gauge"


class NonTermination(RuntimeError):
    pass


class GaugeIncomplete(ValueError):
    """The gauge-fixed bracket matrix is still singular."""

    def __init__(self, kernel: Sequence[tuple[OpPoly, ...]], labels: Sequence[str]):
        self.kernel = list(kernel)
        self.labels = list(labels)
        super().__init__("gauge conditions leave first-class directions: " + "; ".join(format_kernel_vector(v, labels) for v in kernel))


def format_kernel_vector(vec: Sequence[OpPoly], labels: Sequence[str]) -> str:
    parts = []
    for p, lab in zip(vec, labels):
        if not p:
            continue
        s = format_poly(p)
        parts.append(lab if s == "1" else f"({s})*{lab}")
    return " + ".join(parts) or "0"


# Brackets --------------------------------------------------------------------


def poisson_bracket(F: PhaseDensity, G: PhaseDensity) -> OpPoly:
    """Kernel of ``{F(y), G(x)}`` as a polynomial in ``D = d/dy`` acting on ``delta(y-x)``."""
    if F.space != G.space:
        raise ValueError("densities live on different phase spaces")
    out = OpPoly.zero(F.space.field)
    for q, p in F.space.pairs:
        fq, fp, gq, gp = F[q], F[p], G[q], G[p]
        if fq and gp:
            out = out + fq * gp.adjoint()
        if fp and gq:
            out = out - fp * gq.adjoint()
    return out


def bracket_with_hamiltonian(F: PhaseDensity, h: QuadHamiltonian, eqs: dict[str, PhaseDensity] | None = None) -> PhaseDensity:
    """``{F(y), H_E}`` as a density: ``sum_i c_i(D) dz_i/dt``."""
    if F.space != h.space:
        F = F.embed(h.space)
    eqs = eqs if eqs is not None else hamilton_equations(h)
    out = PhaseDensity.zero(h.space)
    for coord, c in F.items():
        out = out + eqs[coord].apply(c)
    return out


def bracket_matrix(densities: Sequence[PhaseDensity], labels: Sequence[str]) -> OpMatrix:
    rows = [[poisson_bracket(a, b) for b in densities] for a in densities]
    return OpMatrix.build(rows, labels, labels)


# Constraint sets -------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    label: str
    density: PhaseDensity
    provenance: str
    parent: str | None = None

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "provenance": self.provenance,
            "parent": self.parent,
            "density": str(self.density),
            "coeffs": self.density.to_json(),
        }


@dataclass(frozen=True)
class MultiplierDetermination:
    """``operator(D) multiplier = rhs`` obtained while checking ``source``.

    kind is ``determined`` (constant term of the operator is nonzero),
    ``spatially-constant`` (operator is a pure derivative and the phase-space
    remainder became a constraint) or ``unresolved``.
    """

    multiplier: str
    kind: str
    operator: OpPoly
    rhs: PhaseDensity
    source: str

    def text(self) -> str:
        if self.kind == "spatially-constant":
            return f"{self.multiplier}: spatially constant ({format_poly(self.operator)} {self.multiplier} = 0), from {self.source}"
        op = format_poly(self.operator)
        lhs = self.multiplier if op == "1" else f"({op}) {self.multiplier}"
        return f"{self.multiplier}: {self.kind}, {lhs} = {self.rhs}, from {self.source}"

    def to_json(self) -> dict:
        return {
            "multiplier": self.multiplier,
            "kind": self.kind,
            "operator": poly_to_json(self.operator),
            "rhs": str(self.rhs),
            "source": self.source,
        }


@dataclass(frozen=True)
class ConsistencyStep:
    constraint: str
    outcome: str

    def to_json(self) -> dict:
        return {"constraint": self.constraint, "outcome": self.outcome}


@dataclass(frozen=True)
class ConstraintSet:
    model: str
    hamiltonian: QuadHamiltonian
    constraints: tuple[Constraint, ...]
    determinations: tuple[MultiplierDetermination, ...] = ()
    steps: tuple[ConsistencyStep, ...] = ()
    closed: bool = False
    delta: OpMatrix | None = None
    first_class: tuple[tuple[OpPoly, ...], ...] = ()

    @property
    def space(self) -> PhaseSpace:
        return self.hamiltonian.space

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.constraints)

    @property
    def densities(self) -> tuple[PhaseDensity, ...]:
        return tuple(c.density for c in self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __getitem__(self, label: str) -> Constraint:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def classified(self) -> bool:
        return self.delta is not None

    @property
    def second_class_rank(self) -> int:
        return len(self.constraints) - len(self.first_class)

    @property
    def fully_second_class(self) -> bool:
        return self.classified and not self.first_class

    def multiplier_status(self) -> dict[str, MultiplierDetermination]:
        """Latest record per multiplier; later determinations supersede earlier conditions."""
        out: dict[str, MultiplierDetermination] = {}
        for d in self.determinations:
            out[d.multiplier] = d
        return out

    def free_multipliers(self) -> tuple[str, ...]:
        status = self.multiplier_status()
        return tuple(m for m in self.space.multipliers if m not in status or status[m].kind != "determined")

    @cached_property
    def delta_inverse(self) -> OpMatrix:
        if self.delta is None:
            raise ValueError("constraint set is not classified")
        return mat_inverse(self.delta)

    def to_json(self) -> dict:
        out = {
            "constraints": [c.to_json() for c in self.constraints],
            "closed": self.closed,
            "consistency": [s.to_json() for s in self.steps],
            "multipliers": [d.to_json() for d in self.determinations],
        }
        if self.delta is not None:
            out["delta"] = matrix_to_json(self.delta)
            out["first_class"] = [
                {"vector": [poly_to_json(p) for p in v], "text": format_kernel_vector(v, self.labels)}
                for v in self.first_class
            ]
            out["second_class_rank"] = self.second_class_rank
        return out


def _phase_only(expr: PhaseDensity, determinations: Sequence[MultiplierDetermination]) -> PhaseDensity:
    """Substitute multipliers already fixed by a constant operator."""
    known = {d.multiplier: d for d in determinations if d.kind == "determined" and d.operator.is_const()}
    for _ in range(len(known) + 1):
        _, lam = expr.split_multipliers()
        hit = [m for m in lam if m in known]
        if not hit:
            return expr
        for m in hit:
            d = known[m]
            coef = expr[m]
            expr = expr - PhaseDensity.of(expr.space, {m: coef}) + d.rhs.apply(coef * (1 / d.operator.lc()))
    raise NonTermination("circular multiplier determinations")


def consistency_closure(
    m: ModelIR,
    split_derivative_multipliers: bool = True,
    max_iterations: int | None = None,
) -> ConstraintSet:
    """Run the Dirac-Bergmann loop depth first from the primary constraints.

    Each constraint's time derivative under the extended Hamiltonian is split
    into multiplier and phase-space parts.  A multiplier whose operator has a
    nonzero constant term is marked determined and the chain stops there.  A
    pure-derivative operator records a spatially constant multiplier and the
    phase-space remainder is tested like any other residual.  Remainders that
    do not reduce to zero modulo the local constraint module become new
    secondary constraints.
    """
    h = canonical_hamiltonian(m)
    space = h.space
    eqs = hamilton_equations(h)
    limit = max_iterations if max_iterations is not None else 4 * len(space.coords)
    constraints: list[Constraint] = [
        Constraint(f"C{k + 1}", phi.normalized(), PRIMARY) for k, (_, phi) in enumerate(h.couplings)
    ]
    determinations: list[MultiplierDetermination] = []
    steps: list[ConsistencyStep] = []
    pending = [c.label for c in constraints]
    lookup = {c.label: c for c in constraints}
    iterations = 0

    while pending:
        iterations += 1
        label = pending.pop(0)
        if iterations > limit:
            chain = [label]
            while lookup[chain[-1]].parent:
                chain.append(lookup[chain[-1]].parent)
            raise NonTermination(f"consistency loop exceeded {limit} iterations along {' <- '.join(chain)}")
        expr = _phase_only(bracket_with_hamiltonian(lookup[label].density, h, eqs), determinations)
        phase, lam = expr.split_multipliers()
        if lam:
            invertible = [mu for mu in lam if lam[mu].constant_term()]
            if invertible:
                mu = invertible[0]
                u = lam[mu]
                rhs = -(expr - PhaseDensity.of(space, {mu: u}))
                determinations.append(MultiplierDetermination(mu, "determined", u, rhs, label))
                steps.append(ConsistencyStep(label, f"determines {mu}"))
                log.debug("%s determines %s", label, mu)
                continue
            if not split_derivative_multipliers:
                for mu, u in lam.items():
                    determinations.append(MultiplierDetermination(mu, "unresolved", u, -phase, label))
                steps.append(ConsistencyStep(label, "unresolved multiplier condition"))
                continue
            for mu, u in lam.items():
                determinations.append(MultiplierDetermination(mu, "spatially-constant", u, PhaseDensity.zero(space), label))
        basis = [c.density.vector() for c in constraints]
        residual = hermite_reduce(phase.vector(), basis)
        if not any(residual):
            steps.append(ConsistencyStep(label, "weakly zero"))
            continue
        new = Constraint(f"C{len(constraints) + 1}", phase.normalized(), SECONDARY, label)
        constraints.append(new)
        lookup[new.label] = new
        pending.insert(0, new.label)
        steps.append(ConsistencyStep(label, f"new constraint {new.label}"))
        log.debug("%s yields %s = %s", label, new.label, new.density)

    return ConstraintSet(m.name, h, tuple(constraints), tuple(determinations), tuple(steps), closed=True)


def classify(cs: ConstraintSet) -> ConstraintSet:
    """Fill in the strong bracket matrix and its left kernel (first-class directions)."""
    delta = bracket_matrix(cs.densities, cs.labels)
    if not delta.is_distributionally_antisymmetric():
        raise AssertionError("bracket matrix is not antisymmetric")
    kernel = tuple(mat_kernel(delta)) if len(cs) else ()
    return replace(cs, delta=delta, first_class=kernel)


def add_gauge_fixing(cs: ConstraintSet, gauge: GaugeSpec | Sequence[PhaseDensity]) -> ConstraintSet:
    """Append gauge conditions and require the enlarged bracket matrix to be invertible."""
    if not cs.classified:
        cs = classify(cs)
    if isinstance(gauge, GaugeSpec):
        densities = [PhaseDensity.parse(cs.space, text) for text in gauge.conditions]
    else:
        densities = [g.embed(cs.space) if g.space != cs.space else g for g in gauge]
    for g in densities:
        if any(g[m] for m in cs.space.multipliers + cs.space.multiplier_momenta):
            raise ValueError(f"gauge condition {g} involves a multiplier")
    n = len(cs)
    extra = tuple(Constraint(f"C{n + k + 1}", g, GAUGE) for k, g in enumerate(densities))
    fixed = classify(replace(cs, constraints=cs.constraints + extra, delta=None, first_class=()))
    if fixed.first_class:
        raise GaugeIncomplete(fixed.first_class, fixed.labels)
    return fixed


# Dirac brackets --------------------------------------------------------------


def dirac_bracket(u: PhaseDensity, v: PhaseDensity, cs: ConstraintSet) -> OpRat:
    """``{u,v} - {u,C_s} Delta^-1_{ss'} {C_s',v}`` composed as operator kernels."""
    if u.space != cs.space:
        u = u.embed(cs.space)
    if v.space != cs.space:
        v = v.embed(cs.space)
    out = OpRat.of(poisson_bracket(u, v))
    if not len(cs):
        return out
    if not cs.classified:
        cs = classify(cs)
    if cs.first_class:
        raise SingularMatrix("constraint set has first-class directions; add gauge conditions first")
    inv = cs.delta_inverse
    left = [poisson_bracket(u, c) for c in cs.densities]
    right = [poisson_bracket(c, v) for c in cs.densities]
    for s, ls in enumerate(left):
        if not ls:
            continue
        for t, rt in enumerate(right):
            if rt and inv[s, t]:
                out = out - OpRat.of(ls) * inv[s, t] * OpRat.of(rt)
    return out


@dataclass(frozen=True)
class BracketEntry:
    left: str
    right: str
    kernel: OpRat

    def text(self) -> str:
        k = kernel_text(self.kernel)
        rhs = f"-i {k[1:]}" if k.startswith("-") else f"i {k}"
        return f"[{self.left}(y), {self.right}(x)] = {rhs}"


@dataclass(frozen=True)
class BracketReport:
    """Nonvanishing Dirac brackets among canonical coordinates, upper triangle in coordinate order."""

    coords: tuple[str, ...]
    entries: tuple[BracketEntry, ...] = field(default_factory=tuple)

    def lookup(self, left: str, right: str) -> OpRat | None:
        """Kernel of ``[left(y), right(x)]``; ``None`` when it vanishes."""
        for e in self.entries:
            if (e.left, e.right) == (left, right):
                return e.kernel
            if (e.left, e.right) == (right, left):
                return -e.kernel.adjoint()
        if left not in self.coords or right not in self.coords:
            raise KeyError(f"unknown coordinate pair ({left}, {right})")
        return None

    def lines(self) -> list[str]:
        return [e.text() for e in self.entries]

    def to_json(self) -> list[dict]:
        return [{"left": e.left, "right": e.right, "kernel": entry_to_json(e.kernel), "text": e.text()} for e in self.entries]


def commutator_report(cs: ConstraintSet) -> BracketReport:
    space = cs.space
    coords = space.canonical
    units = [PhaseDensity.coordinate(space, c) for c in coords]
    entries = []
    for i, a in enumerate(coords):
        for j in range(i, len(coords)):
            k = dirac_bracket(units[i], units[j], cs)
            if k:
                entries.append(BracketEntry(a, coords[j], k))
    return BracketReport(coords, tuple(entries))


def analyze_model(m: ModelIR, gauge: GaugeSpec | None = None) -> ConstraintSet:
    """Closure, classification and optional gauge fixing in one call."""
    cs = classify(consistency_closure(m))
    if gauge is not None:
        cs = add_gauge_fixing(cs, gauge)
    return cs
