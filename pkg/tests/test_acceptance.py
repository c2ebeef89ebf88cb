"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line through ``acceptance_log``; the lines are
printed in the terminal summary.  Run directly (``python3 tests/test_acceptance.py``)
to see only these.
"""

import functools
import subprocess
import sys

import sympy

from conftest import GOLDEN, preset_analysis
from fieldcon.dirac import analyze_model, commutator_report, poisson_bracket
from fieldcon.discrepancies import SIGN_NORMALIZATION
from fieldcon.frontend import parse_model
from fieldcon.legendre import PhaseDensity
from fieldcon.presets import FREE_SCALAR, PRESET_NAMES
from fieldcon.symkernel import OpMatrix, OpRat, mat_det, parse_kernel
from fieldcon.verifier import (
    DiracOracle,
    Discretization,
    PlaneWaveConfig,
    all_passed,
    delta_oracle_records,
    kernel_oracle,
    run_lattice,
    verify_ansatz,
)

ORACLE_TOL = 1e-6
SEEDS = (0, 1, 2)


def _report(log, number, checks):
    """``checks`` maps a short description to a bool; all must hold."""
    failed = [k for k, ok in checks.items() if not ok]
    detail = "; ".join(f"{k}: {'ok' if ok else 'FAILED'}" for k, ok in checks.items())
    log(number, not failed, detail)
    assert not failed, failed


def _constraints_match(name, reference):
    cs = preset_analysis(name)
    signs = SIGN_NORMALIZATION[name]
    ref = reference[name]["constraints"]
    if len(cs) != len(ref):
        return False
    for c, (text, provenance) in zip(cs.constraints, ref):
        expected = PhaseDensity.parse(cs.space, text).apply(signs.get(c.label, 1))
        if c.density != expected or c.provenance != provenance:
            return False
    return True


# 1 ---------------------------------------------------------------------------------------


def test_criterion_1_constraint_chains(reference, acceptance_log):
    wz = preset_analysis("jr-wz")
    lam1 = wz.multiplier_status().get("lambda1")
    _report(
        acceptance_log,
        1,
        {
            "jr-a1 four constraints with provenance (C4 sign-normalised)": _constraints_match("jr-a1", reference),
            "jr-wz four constraints with provenance": _constraints_match("jr-wz", reference),
            # the engine finds lambda1 determined by C4 instead (discrepancy D5)
            f"jr-wz lambda1 spatially-constant condition recorded (engine: {lam1.kind if lam1 else 'none'})": (
                lam1 is not None and lam1.kind == reference["jr-wz"]["lambda1_condition"]
            ),
        },
    )


# 2 ---------------------------------------------------------------------------------------


def _identity_holds(cs):
    ident = OpMatrix.identity(cs.labels, cs.space.field)
    inv = cs.delta_inverse
    return cs.delta.matmul(inv).equals(ident) and inv.matmul(cs.delta).equals(ident)


def test_criterion_2_matrices(reference, acceptance_log):
    a1 = preset_analysis("jr-a1")
    K = a1.space.field
    signs = [SIGN_NORMALIZATION["jr-a1"].get(lab, 1) for lab in a1.labels]
    ref = reference["jr-a1"]["delta"]
    n = len(a1)
    delta_ok = all(
        a1.delta[i, j] * (signs[i] * signs[j]) == parse_kernel(ref[i][j], K) for i in range(n) for j in range(n)
    )

    sym = preset_analysis("jr-symbolic")
    Ks = sym.space.field
    ref_inv = reference["jr-symbolic"]["delta_inverse"]
    inverse_ok = all(sym.delta_inverse[i, j] == parse_kernel(ref_inv[i][j], Ks) for i in range(2) for j in range(2))

    inverses = [name for name in PRESET_NAMES if preset_analysis(name).fully_second_class]
    _report(
        acceptance_log,
        2,
        {
            "jr-a1 delta entry-for-entry (C4 sign-normalised)": delta_ok,
            "jr-symbolic delta inverse exact": inverse_ok,
            f"multiply-back identity for {', '.join(inverses)}": all(
                _identity_holds(preset_analysis(n)) for n in inverses
            ),
        },
    )


# 3 ---------------------------------------------------------------------------------------


def _delta_oracle_error(cs, left, right, kernel=None):
    disc = Discretization(cs.space, 512)
    F, G = cs[left].density, cs[right].density
    kernel = poisson_bracket(F, G) if kernel is None else kernel
    return max(kernel_oracle(F, G, kernel, disc, s).rel_error for s in SEEDS)


def test_criterion_3_classification(acceptance_log):
    sym = preset_analysis("jr-symbolic")
    K = sym.space.field
    c12 = sym.delta[0, 1]
    engine_ok = c12 == parse_kernel("-(a-1)*e^2", K)
    engine_err = _delta_oracle_error(sym, "C1", "C2")
    printed_err = _delta_oracle_error(sym, "C1", "C2", parse_kernel("-(a^2-1)*e^2", K))

    wz = preset_analysis("jr-wz")
    wz_records = delta_oracle_records(wz, "jr-wz", n=512, seeds=SEEDS, rel_tol=ORACLE_TOL)
    gf = preset_analysis("jr-wz-gaugefixed")
    _report(
        acceptance_log,
        3,
        {
            "jr-symbolic fully second class": sym.fully_second_class and len(sym) == 2,
            f"{{C1,C2}} = -(a-1) e^2 delta, oracle {engine_err:.1e} (printed form: {printed_err:.2f})": (
                engine_ok and engine_err < ORACLE_TOL and printed_err > ORACLE_TOL
            ),
            "jr-wz det = 0 exactly": mat_det(wz.delta).is_zero(),
            f"jr-wz kernel dimension {len(wz.first_class)} (oracle-confirmed delta)": (
                len(wz.first_class) == 2 and all_passed(wz_records)
            ),
            "jr-wz-gaugefixed nonsingular 6x6": len(gf) == 6 and not mat_det(gf.delta).is_zero(),
        },
    )


# 4 ---------------------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _dirac_oracle(name):
    return DiracOracle(preset_analysis(name), n=128)


def _dirac_error(name, left, right, kernel=None):
    cs = preset_analysis(name)
    u, v = PhaseDensity.coordinate(cs.space, left), PhaseDensity.coordinate(cs.space, right)
    return max(_dirac_oracle(name)(u, v, s, kernel=kernel).rel_error for s in SEEDS)


def _commutator_table(name, reference):
    """(reproduced, disagreements, engine entries all oracle-confirmed)."""
    cs = preset_analysis(name)
    report = commutator_report(cs)
    K = cs.space.field
    reproduced, disagreements = 0, []
    for left, right, text in reference[name]["commutators"]:
        printed = parse_kernel(text, K)
        engine = report.lookup(left, right) or OpRat.of(0, K)
        if engine == printed:
            reproduced += 1
            continue
        engine_err = _dirac_error(name, left, right)
        printed_err = _dirac_error(name, left, right, printed)
        disagreements.append((left, right, engine_err, printed_err))
    all_ok = all(_dirac_error(name, e.left, e.right) < ORACLE_TOL for e in report.entries)
    return reproduced, disagreements, all_ok


def test_criterion_4_dirac_brackets(reference, acceptance_log):
    checks = {}
    for name in ("jr-symbolic", "jr-a1", "jr-wz-gaugefixed"):
        total = len(reference[name]["commutators"])
        reproduced, disagreements, all_ok = _commutator_table(name, reference)
        confirmed = all(e < ORACLE_TOL for _, _, e, _ in disagreements)
        text = f"{name} {reproduced}/{total} printed entries reproduced"
        if disagreements:
            pairs = ", ".join(f"[{l},{r}]" for l, r, _, _ in disagreements)
            text += f", disagreements {pairs} oracle-confirmed for the engine"
        checks[text] = confirmed and all_ok
    a1 = commutator_report(preset_analysis("jr-a1"))
    K = preset_analysis("jr-a1").space.field
    checks["jr-a1 [A0,A0] = 2 d_y delta"] = a1.lookup("A0", "A0") == parse_kernel("2*D", K)
    _report(acceptance_log, 4, checks)


# 5 ---------------------------------------------------------------------------------------


def test_criterion_5_mass_and_solution(reference, acceptance_log):
    a, e = sympy.symbols("a e")
    mass = sympy.sympify(reference["mass_squared"].replace("^", "**"))
    checks = {}
    for k in (0.0, 0.7, 1.3):
        cfg = PlaneWaveConfig(2.0, 1.0, k)
        ok = abs(cfg.mass_squared - 4.0) < 1e-12 and all_passed(verify_ansatz(cfg, rel_tol=1e-10))
        checks[f"a=2 e=1 k={k}: m^2=4, residuals < 1e-10"] = ok
    near = PlaneWaveConfig(1.01, 1.0, 0.7)
    expected = float(mass.subs({a: sympy.Rational(101, 100), e: 1}))
    checks[f"a=1.01: m^2={near.mass_squared:.2f}, residuals < 1e-9"] = (
        abs(near.mass_squared - expected) <= 1e-9 * expected
        and abs(near.mass_squared - 102.01) < 1e-9 * 102.01
        and all_passed(verify_ansatz(near, rel_tol=1e-9))
    )
    _report(acceptance_log, 5, checks)


# 6 ---------------------------------------------------------------------------------------


def test_criterion_6_dynamics(acceptance_log):
    a1 = preset_analysis("jr-a1")
    _, r_a1 = run_lattice(a1, n=256, dt=1e-3, t_end=10.0)
    _, r_a1_coarse = run_lattice(a1, n=256, dt=2e-3, t_end=10.0)
    _, r_wz = run_lattice(preset_analysis("jr-wz"), n=256, dt=1e-3, t_end=10.0)
    free = analyze_model(parse_model(FREE_SCALAR, name="free-scalar"))
    _, f1 = run_lattice(free, n=256, dt=1e-3, t_end=10.0)
    _, f2 = run_lattice(free, n=256, dt=5e-4, t_end=10.0)
    free_ratio = f1.rel_energy_drift / f2.rel_energy_drift
    a1_ratio = r_a1_coarse.rel_energy_drift / r_a1.rel_energy_drift
    _report(
        acceptance_log,
        6,
        {
            f"jr-a1 constraint drift {r_a1.max_constraint_drift:.1e} < 1e-6": r_a1.max_constraint_drift < 1e-6,
            f"jr-a1 energy drift {r_a1.rel_energy_drift:.1e} < 1e-8": r_a1.rel_energy_drift < 1e-8,
            f"jr-wz current divergence {r_wz.current_divergence:.1e} < 1e-3": r_wz.current_divergence < 1e-3,
            f"free scalar dt 1e-3 -> 5e-4 improves energy drift {free_ratio:.0f}x": free_ratio >= 8,
            f"jr-a1 dt 2e-3 -> 1e-3 improves energy drift {a1_ratio:.0f}x": a1_ratio >= 8,
        },
    )


# 7 ---------------------------------------------------------------------------------------


def test_criterion_7_oracle_suite(acceptance_log):
    checks = {}
    for name in PRESET_NAMES:
        records = delta_oracle_records(preset_analysis(name), name, n=512, seeds=SEEDS, rel_tol=ORACLE_TOL)
        worst = max(r.value for r in records)
        checks[f"{name} {len(records)} entries, worst {worst:.1e}"] = all_passed(records)
    _report(acceptance_log, 7, checks)


# 8 ---------------------------------------------------------------------------------------

_REPORTS = """
import contextlib, io, sys
from fieldcon.cli import main
from fieldcon.presets import PRESET_NAMES
runs = [["analyze", n, "--format", "json"] for n in PRESET_NAMES] + [
    ["verify", "ansatz", "--a", "2", "--e", "1", "--k", "0.7"],
    ["verify", "oracle", "--preset", "jr-a1", "--n", "64", "--dirac", "--dirac-n", "32"],
    ["verify", "lattice", "--preset", "jr-wz", "--n", "32", "--dt", "0.01", "--t-end", "0.5"],
]
for argv in runs:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        main(argv)
    sys.stdout.write("=== " + " ".join(argv) + "\\n" + buf.getvalue())
"""


def _reports():
    return subprocess.run([sys.executable, "-c", _REPORTS], capture_output=True, check=True).stdout


def test_criterion_8_determinism(acceptance_log):
    first, second = _reports(), _reports()
    text = first.decode()
    golden_ok = all(
        (GOLDEN / f"analyze_{n}.json").read_text() in text for n in PRESET_NAMES
    )
    _report(
        acceptance_log,
        8,
        {
            f"two processes emit byte-identical JSON ({len(first)} bytes, 7 reports)": first == second,
            "analysis JSON identical to the committed golden reports": golden_ok,
        },
    )


if __name__ == "__main__":
    # a fresh interpreter, so pytest can rewrite asserts in modules imported above
    sys.exit(subprocess.call([sys.executable, "-m", "pytest", __file__, "-q", "-p", "no:cacheprovider"]))
