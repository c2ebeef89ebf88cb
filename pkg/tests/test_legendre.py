import pytest
from hypothesis import given
from hypothesis import strategies as st

from fieldcon.frontend import parse_model
from fieldcon.legendre import (
    InternalError,
    PhaseDensity,
    QuadHamiltonian,
    canonical_hamiltonian,
    compute_momenta,
    hamilton_equations,
    momenta_json,
    phase_space,
    primary_constraints,
)
from fieldcon.presets import FREE_SCALAR, preset_model
from fieldcon.symkernel import OpMatrix, OpPoly

STATIC = ["u", "dx(u)", "v", "dx(v)"]
static_term = st.tuples(st.sampled_from(["1", "-2", "1/3", "g"]), st.sampled_from(STATIC), st.sampled_from(STATIC))


@given(st.lists(static_term, max_size=5))
def test_regular_lagrangian_gives_kinetic_minus_potential(terms):
    pot = " + ".join(f"{c}*{x}*{y}" for c, x, y in terms) or "0"
    m = parse_model(f"params g; fields u v; L = 1/2*dt(u)^2 + 1/2*dt(v)^2 + {pot};")
    h = canonical_hamiltonian(m)
    assert primary_constraints(m) == []
    expected = QuadHamiltonian.parse(h.space, f"1/2*pi_u^2 + 1/2*pi_v^2 - ({pot})")
    assert h.same_density(expected)


@given(st.sampled_from(["u", "dx(u)", "v"]), st.sampled_from(["1", "g", "-1/2"]))
def test_velocity_coupling_shifts_momentum(coord, c):
    m = parse_model(f"params g; fields u v; L = 1/2*dt(u)^2 + 1/2*dt(v)^2 + {c}*{coord}*dt(u);")
    h = canonical_hamiltonian(m)
    # dt(u) = pi_u - c*coord, whatever the coupling
    assert hamilton_equations(h)["u"] == PhaseDensity.parse(h.space, f"pi_u - {c}*{coord}")


def test_free_scalar():
    m = parse_model(FREE_SCALAR)
    h = canonical_hamiltonian(m)
    space = h.space
    assert h.same_density(QuadHamiltonian.parse(space, "1/2*pi_phi^2 + 1/2*dx(phi)^2"))
    eqs = hamilton_equations(h)
    assert eqs["phi"] == PhaseDensity.parse(space, "pi_phi")
    assert eqs["pi_phi"] == PhaseDensity.parse(space, "dx(dx(phi))")


@pytest.mark.parametrize("name", ["jr-symbolic", "jr-a1", "jr-wz"])
def test_gauge_momentum_vanishes(name):
    m, _ = preset_model(name)
    moms = {d["momentum"]: d["expression"] for d in momenta_json(compute_momenta(m))}
    assert moms["pi_A0"] == "0"
    assert moms["pi_A1"] == "-dx(A0) + dt(A1)"
    assert str(primary_constraints(m)[0]) == "pi_A0"


def test_wz_has_a_second_primary():
    m, _ = preset_model("jr-wz")
    prims = primary_constraints(m)
    assert len(prims) == 2
    assert prims[1] == PhaseDensity.parse(phase_space(m), "pi_theta - dx(phi) - A1")


@pytest.mark.parametrize("name", ["jr-a1", "jr-wz"])
def test_hamiltonian_matches_reference(name, reference):
    m, _ = preset_model(name)
    h = canonical_hamiltonian(m)
    assert h.same_density(QuadHamiltonian.parse(h.space, reference[name]["hamiltonian"]))


def test_symbolic_hamiltonian_specialises_to_a1():
    sym, _ = preset_model("jr-symbolic")
    a1, _ = preset_model("jr-a1")
    h_sym = canonical_hamiltonian(sym).specialize({"a": 1, "e": 1})
    h_a1 = canonical_hamiltonian(a1)
    assert h_sym.space.canonical == h_a1.space.canonical
    assert h_sym.same_density(h_a1)


def test_wz_hamilton_equations_match_reference(reference):
    m, _ = preset_model("jr-wz")
    h = canonical_hamiltonian(m)
    eqs = hamilton_equations(h)
    for coord, text in reference["jr-wz"]["hamilton_equations"].items():
        assert eqs[coord] == PhaseDensity.parse(h.space, text), coord


def test_multipliers_do_not_move():
    m, _ = preset_model("jr-wz")
    eqs = hamilton_equations(canonical_hamiltonian(m))
    assert eqs["lambda0"].is_zero() and eqs["lambda1"].is_zero()
    assert eqs["p_lambda0"] == -canonical_hamiltonian(m).couplings[0][1]


def test_non_self_adjoint_kernel_is_rejected():
    m, _ = preset_model("jr-a1")
    h = canonical_hamiltonian(m, extended=False)
    K, labels = h.space.field, h.space.canonical
    bad = [[OpPoly.zero(K) for _ in labels] for _ in labels]
    bad[0][1] = OpPoly.const(1, K)
    with pytest.raises(InternalError):
        QuadHamiltonian(h.space, OpMatrix.build(bad, labels, labels))
