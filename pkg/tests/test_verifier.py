import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import preset_analysis
from fieldcon.dirac import analyze_model, poisson_bracket
from fieldcon.frontend import parse_model
from fieldcon.legendre import PhaseDensity
from fieldcon.presets import FREE_SCALAR
from fieldcon.verifier import (
    CFLWarning,
    CheckRecord,
    DiracOracle,
    Discretization,
    DomainError,
    LatticeSystem,
    PlaneWaveConfig,
    SampleGrid,
    all_passed,
    ansatz_residuals,
    evolve_lattice,
    gradient_check,
    kernel_oracle,
    project,
    random_state,
    run_lattice,
    smeared_bracket_oracle,
    verify_ansatz,
)
from fieldcon.symkernel import OpPoly
from fieldcon.verifier.oracle import test_function as zero_mean_mode_sum

# plane-wave ansatz -------------------------------------------------------------------


@given(
    a=st.floats(1.05, 6.0),
    e=st.floats(0.1, 3.0),
    k=st.floats(-4.0, 4.0),
)
def test_ansatz_solves_field_equations(a, e, k):
    records = verify_ansatz(PlaneWaveConfig(a, e, k), SampleGrid(nt=5, nx=9), rel_tol=1e-9)
    assert all_passed(records), [r for r in records if not r.passed]


def test_ansatz_mass():
    cfg = PlaneWaveConfig(2.0, 1.0, 0.7)
    assert cfg.mass_squared == pytest.approx(4.0)
    assert cfg.omega == pytest.approx(np.sqrt(0.49 + 4.0))


@pytest.mark.parametrize("a, e", [(1.0, 1.0), (0.5, 1.0), (-2.0, 1.0), (2.0, 0.0)])
def test_ansatz_domain(a, e):
    with pytest.raises(DomainError):
        PlaneWaveConfig(a, e, 0.3)


def test_check_record_rejects_nan():
    assert not CheckRecord.below("x", "m", {}, float("nan"), 1.0).passed
    assert CheckRecord.below("x", "m", {}, 0.5, 1.0).to_json()["pass"] is True


# smeared bracket oracle ------------------------------------------------------------------


def test_test_functions_have_no_constant_mode():
    f = zero_mean_mode_sum(64, seed=3)
    assert abs(f.mean()) < 1e-14
    assert not np.allclose(f, zero_mean_mode_sum(64, seed=4))


@pytest.mark.parametrize("name", ["jr-symbolic", "jr-a1", "jr-wz"])
def test_delta_entries_agree_with_lattice(name):
    cs = preset_analysis(name)
    disc = Discretization(cs.space, 128)
    for a in cs.densities:
        for b in cs.densities:
            assert smeared_bracket_oracle(a, b, disc=disc).rel_error < 1e-8


def test_oracle_detects_wrong_kernels():
    cs = preset_analysis("jr-a1")
    disc = Discretization(cs.space, 128)
    c3, c4 = cs["C3"].density, cs["C4"].density
    right = poisson_bracket(c4, c4)
    D = OpPoly.D(cs.space.field)
    assert kernel_oracle(c4, c4, right, disc).rel_error < 1e-10
    assert kernel_oracle(c4, c4, right + D, disc).rel_error > 1e-2
    assert kernel_oracle(c3, c4, -poisson_bracket(c3, c4), disc).rel_error > 1e-2


@pytest.mark.parametrize("name", ["jr-symbolic", "jr-a1", "jr-wz-gaugefixed"])
def test_dirac_brackets_agree_with_lattice(name):
    cs = preset_analysis(name)
    oracle = DiracOracle(cs, n=64)
    units = [PhaseDensity.coordinate(cs.space, c) for c in cs.space.canonical]
    for u in units:
        for v in units:
            assert oracle(u, v, seed=1).rel_error < 1e-8, (u, v)


def test_dirac_oracle_is_not_the_poisson_bracket():
    cs = preset_analysis("jr-a1")
    oracle = DiracOracle(cs, n=64)
    a0 = PhaseDensity.coordinate(cs.space, "A0")
    phi = PhaseDensity.coordinate(cs.space, "phi")
    # canonically these commute; the constraints make the Dirac bracket a delta
    assert oracle(a0, phi, kernel=poisson_bracket(a0, phi)).rel_error > 1e-2
    assert oracle(a0, phi).rel_error < 1e-8


# lattice evolution ------------------------------------------------------------------------


def test_lattice_energy_gradient_matches_flow():
    cs = preset_analysis("jr-a1")
    system = LatticeSystem(cs, 32)
    state = random_state(system, seed=2)
    assert gradient_check(system, state) < 1e-6


def test_projection_lands_on_constraint_surface():
    cs = preset_analysis("jr-wz")
    system = LatticeSystem(cs, 32)
    raw = random_state(system, seed=5)
    assert system.constraint_residual(raw.flat()) > 1e-3
    assert system.constraint_residual(project(system, raw).flat()) < 1e-10


def test_unprojected_data_are_refused():
    cs = preset_analysis("jr-a1")
    system = LatticeSystem(cs, 32)
    with pytest.raises(ValueError, match="project"):
        evolve_lattice(system, random_state(system), 1e-3, 1)


def test_cfl_warning():
    cs = preset_analysis("jr-a1")
    system = LatticeSystem(cs, 32)
    init = project(system, random_state(system))
    with pytest.warns(CFLWarning):
        evolve_lattice(system, init, 0.5, 1)


@pytest.mark.parametrize("name", ["jr-a1", "jr-wz"])
def test_short_run_conserves(name):
    _, report = run_lattice(preset_analysis(name), n=64, dt=0.01, t_end=1.0)
    assert report.max_constraint_drift < 1e-8
    assert report.rel_energy_drift < 1e-6
    if report.current_divergence is not None:
        assert report.current_divergence < 1e-2


@pytest.mark.parametrize("name", ["free-scalar", "jr-a1"])
def test_energy_drift_is_fourth_order(name):
    cs = analyze_model(parse_model(FREE_SCALAR, name=name)) if name == "free-scalar" else preset_analysis(name)
    coarse = run_lattice(cs, n=64, dt=0.04, t_end=2.0)[1].rel_energy_drift
    fine = run_lattice(cs, n=64, dt=0.02, t_end=2.0)[1].rel_energy_drift
    assert coarse / fine > 12


@given(k=st.floats(0.1, 3.0))
def test_ansatz_parity(k):
    # h is a fixed right-mover, so field scales change under k -> -k;
    # relative residuals must stay at round-off either way
    grid = SampleGrid(nt=5, nx=9)
    plus = ansatz_residuals(PlaneWaveConfig(2.0, 1.0, k), grid)
    minus = ansatz_residuals(PlaneWaveConfig(2.0, 1.0, -k), grid)
    for name, (res, scale) in plus.items():
        assert abs(minus[name][0] / minus[name][1] - res / scale) < 1e-12
