"""Known disagreements between published reference values and derived ones.

Each record carries the printed value, the value the engine derives, and a
confirmation routine: a numerical oracle where the quantity is a bracket
kernel, otherwise an exact symbolic identity.  ``SIGN_NORMALIZATION`` maps
engine constraint labels to the factor relating them to the reference
listing, since the engine normalises every new constraint to be monic in its
highest-index coordinate.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

from .dirac import ConstraintSet, analyze_model, bracket_with_hamiltonian
from .legendre import PhaseDensity
from .presets import preset_model
from .symkernel import parse_kernel
from .verifier.oracle import DiracOracle, Discretization, kernel_oracle, smeared_bracket_oracle

# engine label -> factor f such that reference = f * engine
SIGN_NORMALIZATION: dict[str, dict[str, int]] = {
    "jr-symbolic": {},
    "jr-a1": {"C4": -1},
    "jr-wz": {},
    "jr-wz-gaugefixed": {},
}


@dataclass(frozen=True)
class OracleProbe:
    """A bracket kernel to score numerically: ``delta`` (between constraints) or ``dirac`` (between coordinates)."""

    kind: str
    left: str
    right: str
    printed: str | None = None  # kernel in D, or None when the reference omits the entry


@dataclass(frozen=True)
class Discrepancy:
    id: str
    model: str
    quantity: str
    printed: str
    derived: str
    note: str
    probes: tuple[OracleProbe, ...] = ()
    identity: Callable[[], bool] | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "model": self.model,
            "quantity": self.quantity,
            "printed": self.printed,
            "derived": self.derived,
            "note": self.note,
            "confirmation": "oracle" if self.probes else "identity" if self.identity else "ansatz verifier",
        }


@functools.lru_cache(maxsize=None)
def _analysis(name: str) -> ConstraintSet:
    m, g = preset_model(name)
    return analyze_model(m, g)


def _no_momentum_square() -> bool:
    h = _analysis("jr-symbolic").hamiltonian
    i = h.space.canonical.index("pi_A0")
    return h.kernel[i, i].is_zero()


def _secondary_is_bracket() -> bool:
    cs = _analysis("jr-symbolic")
    eqs_part = bracket_with_hamiltonian(cs["C1"].density, cs.hamiltonian)
    canon, lam = eqs_part.split_multipliers()
    return not lam and canon == cs["C2"].density


def _lambda1_cancels() -> bool:
    cs = _analysis("jr-wz")
    rate = bracket_with_hamiltonian(cs["C3"].density, cs.hamiltonian)
    canon, lam = rate.split_multipliers()
    return not lam and canon == PhaseDensity.coordinate(cs.space, "pi_A1")


def _gauge_variants_agree() -> bool:
    cs = _analysis("jr-wz-gaugefixed")
    sp = cs.space
    variant = PhaseDensity.parse(sp, "-pi_phi - dx(phi) - 2*A1 + A0 - dx(theta)")
    return variant - cs["C6"].density == cs["C5"].density.apply(2)


def _wz_rank_two() -> bool:
    cs = _analysis("jr-wz")
    return len(cs.first_class) == 2 and cs.second_class_rank == 2


DISCREPANCIES: tuple[Discrepancy, ...] = (
    Discrepancy(
        "D1",
        "jr-symbolic",
        "bracket of the primary and secondary constraint",
        "-(a^2-1)*e^2 delta, with the transposed entry printed as (a-1)*e^2 delta",
        "-(a-1)*e^2 delta; the matrix is antisymmetric",
        "the printed matrix is not antisymmetric; the (a-1) form also matches the printed inverse",
        (OracleProbe("delta", "C1", "C2", "-(a^2-1)*e^2"), OracleProbe("delta", "C2", "C1", "(a-1)*e^2")),
    ),
    Discrepancy(
        "D2",
        "jr-symbolic",
        "canonical Hamiltonian",
        "contains 1/2 pi_A0^2",
        "no pi_A0 dependence; pi_A0 enters only through the multiplier term",
        "the term is quadratic in a primary constraint, so it only reshuffles the multiplier of pi_A0",
        identity=_no_momentum_square,
    ),
    Discrepancy(
        "D3",
        "jr-symbolic",
        "secondary constraint",
        "pi_A1' and phi' written with a raised-index derivative of inconsistent sign",
        "dx(pi_A1) + e*pi_phi + e*dx(phi) + e^2*(a-1)*A0 + e^2*A1",
        "equals {C1, H} exactly and reduces to the a=1 secondary constraint at a=e=1",
        identity=_secondary_is_bracket,
    ),
    Discrepancy(
        "D4",
        "jr-symbolic",
        "Dirac bracket [A0, pi_phi] (listed twice)",
        "-1/(a-1) delta and 1/(e*(a-1)) d_y delta",
        "[A0, pi_phi] = -1/(e*(a-1)) d_y delta; [A0, pi_A1] = -1/(a-1) delta",
        "the first printed row is the [A0, pi_A1] bracket; the second has the opposite sign",
        (
            OracleProbe("dirac", "A0", "pi_phi", "1/(e*(a-1))*D"),
            OracleProbe("dirac", "A0", "pi_A1", "-1/(a-1)"),
        ),
    ),
    Discrepancy(
        "D5",
        "jr-wz",
        "time derivative of the third constraint",
        "pi_A1 + lambda1', with lambda1 required to be spatially constant",
        "pi_A1 exactly; the lambda1' terms from pi_phi and dx(phi) cancel, and lambda1 is then determined by C4",
        "the spatially-constant condition on lambda1 is never generated; the lambda1 term of the rate is "
        "lambda1 times the bracket of C3 with C2, which vanishes",
        (OracleProbe("delta", "C3", "C2"),),
        identity=_lambda1_cancels,
    ),
    Discrepancy(
        "D6",
        "jr-wz",
        "classification",
        "all four constraints first class",
        "rank 2: C1 and C2 + C3 are first class, the C3/C4 pair is second class",
        "the zero row and column of pi_A0 agree; only the classification statement differs",
        (OracleProbe("delta", "C2", "C4"), OracleProbe("delta", "C3", "C4")),
        identity=_wz_rank_two,
    ),
    Discrepancy(
        "D7",
        "jr-wz-gaugefixed",
        "second gauge condition",
        "written once with -theta' and once with +theta'",
        "+theta' variant used",
        "the two variants differ by twice the first gauge condition, so the constraint surface agrees",
        identity=_gauge_variants_agree,
    ),
    Discrepancy(
        "D8",
        "jr-wz-gaugefixed",
        "constraint bracket matrix",
        "printed with seven rows for six constraints",
        "6x6, determinant -D^2; the (C2, C5) entry is -d_y delta and (C2, C6) is 2 d_y delta",
        "every entry of the engine matrix is scored against the oracle",
        (
            OracleProbe("delta", "C2", "C5", "D"),
            OracleProbe("delta", "C2", "C6", "0"),
            OracleProbe("delta", "C1", "C6"),
            OracleProbe("delta", "C4", "C6"),
            OracleProbe("delta", "C6", "C6"),
        ),
    ),
    Discrepancy(
        "D9",
        "jr-wz-gaugefixed",
        "Dirac brackets involving pi_theta",
        "[theta, pi_theta] = 2 delta, [pi_theta, phi] = -delta, [A0, pi_theta] = 2 d_y delta, "
        "[pi_theta, pi_phi] = d_y delta, [pi_theta, pi_theta] = -2 d_y delta",
        "0, delta, d_y delta, 0, 0; additionally [A1, pi_theta] = d_y delta",
        "the engine values agree with the lattice Dirac bracket; the printed ones do not",
        (
            OracleProbe("dirac", "theta", "pi_theta", "2"),
            OracleProbe("dirac", "pi_theta", "phi", "-1"),
            OracleProbe("dirac", "A0", "pi_theta", "2*D"),
            OracleProbe("dirac", "pi_theta", "pi_phi", "D"),
            OracleProbe("dirac", "pi_theta", "pi_theta", "-2*D"),
            OracleProbe("dirac", "A1", "pi_theta"),
        ),
    ),
    Discrepancy(
        "D10",
        "jr-symbolic",
        "covariant field equations",
        "scalar equation without the derivative on the coupling term; epsilon indices transposed in the gauge equation",
        "Euler-Lagrange forms: box phi + e (g - eps)^{mu nu} d_mu A_nu = 0 and "
        "d_mu F^{mu nu} + e (g - eps)^{mu nu} d_mu phi + a e^2 A^nu = 0",
        "the plane-wave verifier checks the derived forms; residuals are at machine precision",
    ),
)


def discrepancies_for(model: str) -> tuple[Discrepancy, ...]:
    base = model.removesuffix("-gaugefixed") if model.endswith("-gaugefixed") else model
    return tuple(d for d in DISCREPANCIES if d.model in (model, base))


def lookup(id_: str) -> Discrepancy:
    for d in DISCREPANCIES:
        if d.id == id_:
            return d
    raise KeyError(id_)


@dataclass(frozen=True)
class ProbeResult:
    probe: OracleProbe
    engine_error: float
    printed_error: float | None

    def to_json(self) -> dict:
        return {
            "kind": self.probe.kind,
            "left": self.probe.left,
            "right": self.probe.right,
            "engine_rel_error": float(f"{self.engine_error:.6g}"),
            "printed_rel_error": None if self.printed_error is None else float(f"{self.printed_error:.6g}"),
        }


def confirm(d: Discrepancy, n_delta: int = 512, n_dirac: int = 128, seeds=(0, 1, 2)) -> list[ProbeResult]:
    """Score the engine value (and the printed one, when given) against the lattice oracles."""
    if not d.probes:
        return []
    cs = _analysis(d.model)
    space = cs.space
    out = []
    dirac = DiracOracle(cs, n_dirac) if any(p.kind == "dirac" for p in d.probes) else None
    disc = Discretization(space, n_delta)
    for p in d.probes:
        printed = None if p.printed is None else parse_kernel(p.printed, space.field)
        if p.kind == "delta":
            F, G = cs[p.left].density, cs[p.right].density
            engine = max(smeared_bracket_oracle(F, G, seed=s, disc=disc).rel_error for s in seeds)
            alt = None
            if printed is not None:
                alt = max(kernel_oracle(F, G, printed, disc, s).rel_error for s in seeds)
        else:
            u, v = PhaseDensity.coordinate(space, p.left), PhaseDensity.coordinate(space, p.right)
            engine = max(dirac(u, v, s).rel_error for s in seeds)
            alt = None if printed is None else max(dirac(u, v, s, kernel=printed).rel_error for s in seeds)
        out.append(ProbeResult(p, engine, alt))
    return out



def check_identity(d: Discrepancy) -> bool | None:
    return None if d.identity is None else bool(d.identity())

