"""Built-in models: the bosonised chiral Schwinger (Jackiw-Rajaraman) family."""

from __future__ import annotations

from .frontend import Expr, GaugeSpec, ModelIR, SemanticError, Sym, parse_model
from .symkernel import param_field

JR_SYMBOLIC = """\
# bosonised chiral Schwinger model, regularisation parameter a, coupling e
params a e;
fields phi A0 A1;
L = 1/2*(dt(A1) - dx(A0))^2
  + 1/2*dt(phi)^2 - 1/2*dx(phi)^2
  + e*(dt(phi) + dx(phi))*(A0 - A1)
  + 1/2*a*e^2*(A0^2 - A1^2);
"""

JR_A1 = """\
# a = 1, e = 1
fields phi A0 A1;
L = 1/2*(dt(phi)^2 - dx(phi)^2) + (dt(phi) + dx(phi))*(A0 - A1)
  + 1/2*(dt(A1) - dx(A0))^2 + 1/2*(A0^2 - A1^2);
"""

JR_WZ = """\
# a = 1 model with the Wess-Zumino scalar theta restoring gauge invariance
fields phi A0 A1 theta;
L = 1/2*(dt(phi)^2 - dx(phi)^2) + (dt(phi) + dx(phi))*(A0 - A1)
  + 1/2*(dt(A1) - dx(A0))^2 + 1/2*(A0^2 - A1^2)
  + dx(phi)*dt(theta) - dt(phi)*dx(theta) + dt(theta)*A1 - dx(theta)*A0;
"""

# theta' = 0 and the theta-velocity condition; the second differs from its
# -theta' variant by a multiple of the first, so the constraint surface agrees.
WZ_GAUGE = GaugeSpec(("-dx(theta)", "-pi_phi - dx(phi) - 2*A1 + A0 + dx(theta)"))

FREE_SCALAR = """\
fields phi;
L = 1/2*dt(phi)^2 - 1/2*dx(phi)^2;
"""

_SOURCES = {
    "jr-symbolic": (JR_SYMBOLIC, None),
    "jr-a1": (JR_A1, None),
    "jr-wz": (JR_WZ, None),
    "jr-wz-gaugefixed": (JR_WZ, WZ_GAUGE),
}

PRESET_NAMES = tuple(_SOURCES)


def preset_model(name: str) -> tuple[ModelIR, GaugeSpec | None]:
    try:
        text, gauge = _SOURCES[name]
    except KeyError:
        raise SemanticError(f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}") from None
    return parse_model(text, name=name), gauge


# Covariant construction ------------------------------------------------------

METRIC = ((1, 0), (0, -1))
EPSILON = ((0, 1), (-1, 0))  # upper indices, epsilon^{01} = +1


def covariant_jr_lagrangian(params=("a", "e")) -> ModelIR:
    """Build the symbolic model from its index form by explicit sums.

    ``-1/4 F_{mn}F^{mn} + 1/2 d_m phi d^m phi + e (g^{mn} - eps^{mn}) A_n d_m phi + 1/2 a e^2 A_m A^m``
    """
    K = param_field(tuple(params))
    a, e = K.gens
    fields = ("phi", "A0", "A1")
    at = lambda s: Expr.atom(s, K)  # noqa: E731

    def d(name: str, mu: int) -> Expr:
        return at(Sym(name, dt=1)) if mu == 0 else at(Sym(name, nx=1))

    A_low = [at(Sym("A0")), at(Sym("A1"))]

    F_low = [[d(f"A{n}", m) - d(f"A{m}", n) for n in range(2)] for m in range(2)]
    F_up = [[F_low[m][n].scale(K(METRIC[m][m] * METRIC[n][n])) for n in range(2)] for m in range(2)]
    dphi_low = [d("phi", m) for m in range(2)]
    zero = Expr({}, K)
    lag = zero
    for m in range(2):
        for n in range(2):
            lag = lag + (F_low[m][n] * F_up[m][n]).scale(K(-1) / 4)
            lag = lag + (dphi_low[m] * dphi_low[n]).scale(K(METRIC[m][n]) / 2)
            coupling = K(METRIC[m][n] - EPSILON[m][n]) * e
            lag = lag + (A_low[n] * dphi_low[m]).scale(coupling)
            lag = lag + (A_low[m] * A_low[n]).scale(a * e**2 * K(METRIC[m][n]) / 2)
    return ModelIR.from_expr(params, fields, lag, name="jr-symbolic")


def stueckelberg(ir: ModelIR, scalar: str = "phi", new: str = "theta") -> ModelIR:
    """Apply ``phi -> phi - theta``, ``A_mu -> A_mu + d_mu theta`` and return the extended model.

    Second derivatives of ``theta`` produced by the shift must cancel (they do
    for gauge field strengths); otherwise the result is rejected.
    """
    K = ir.field
    at = lambda s: Expr.atom(s, K)  # noqa: E731

    def image(s: Sym) -> Expr:
        if s.name == scalar:
            return at(s) - at(Sym(new, s.dt, s.nx))
        if s.name in ("A0", "A1"):
            mu = int(s.name[1])
            grad = Sym(new, dt=1) if mu == 0 else Sym(new, nx=1)
            if s.dt == 0 and s.nx == 0:
                return at(s) + at(grad)
            return at(s) + at(Sym(new, dt=grad.dt + s.dt, nx=grad.nx + s.nx))
        return at(s)

    lag = Expr({}, K)
    for s1, s2, c in ir.terms:
        lag = lag + (image(s1) * image(s2)).scale(c)
    for mono in lag.terms:
        for s in mono:
            if s.dt + s.nx > 1:
                raise SemanticError(f"substitution leaves a second derivative {s}")
    return ModelIR.from_expr(ir.params, ir.fields + (new,), lag, name=ir.name + "+wz")
