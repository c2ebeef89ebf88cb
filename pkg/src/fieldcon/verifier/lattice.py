"""Lattice integration of the engine's Hamilton equations.

``D`` becomes the periodic second-order central difference and ``D^k`` its
k-fold power, so every polynomial identity the symbolic engine relies on
(constraint preservation, energy conservation on the constraint surface)
holds exactly for the semi-discrete system.  Time stepping is classical RK4.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sps

from ..dirac import ConstraintSet, MultiplierDetermination
from ..legendre import PhaseDensity, hamilton_equations
from ..symkernel import OpPoly, rat_to_float
from .oracle import DEFAULT_VALUES
from .records import CheckRecord

LENGTH = 2 * math.pi


class CFLWarning(UserWarning):
    pass


@dataclass
class LatticeState:
    """Values of the canonical coordinates on a periodic grid, one row per coordinate."""

    coords: tuple[str, ...]
    values: np.ndarray
    dx: float
    t: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[0] != len(self.coords):
            raise ValueError("values must have one row per coordinate")
        if self.values.shape[1] < 8:
            raise ValueError("lattice needs at least 8 sites")

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, coord: str) -> np.ndarray:
        return self.values[self.coords.index(coord)]

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def with_flat(self, z: np.ndarray, t: float) -> LatticeState:
        return LatticeState(self.coords, z.reshape(self.values.shape).copy(), self.dx, t)

    def scale(self) -> float:
        return float(np.max(np.abs(self.values)))


def central_difference(n: int, dx: float) -> sps.csr_matrix:
    """Periodic ``(f[j+1] - f[j-1]) / (2 dx)``."""
    off = np.full(n, 1.0 / (2 * dx))
    D = sps.diags([off[:-1], -off[:-1]], [1, -1], shape=(n, n), format="lil")
    D[n - 1, 0] = 1.0 / (2 * dx)
    D[0, n - 1] = -1.0 / (2 * dx)
    return D.tocsr()


class LatticeSystem:
    """Sparse semi-discrete system ``dz/dt = A z + b`` for a constraint set."""

    def __init__(
        self,
        cs: ConstraintSet,
        n: int,
        values: Mapping[str, float] | None = None,
        gauge_multipliers: Mapping[str, float] | None = None,
    ):
        self.cs = cs
        self.space = cs.space
        self.coords = self.space.canonical
        self.n = n
        self.dx = LENGTH / n
        self.values = dict(DEFAULT_VALUES if values is None else values)
        self.D = central_difference(n, self.dx)
        self.gauge = dict(gauge_multipliers or {})
        self._powers = [sps.identity(n, format="csr")]
        self.A, self.b = self._assemble()
        self.G = self._blocks([c.density for c in cs.constraints]) if len(cs) else None
        self.K = self._blocks([cs.hamiltonian.gradient(c) for c in self.coords])

    def op(self, p: OpPoly) -> sps.csr_matrix:
        while len(self._powers) <= p.degree:
            self._powers.append((self._powers[-1] @ self.D).tocsr())
        out = sps.csr_matrix((self.n, self.n))
        for k, c in enumerate(p.coeffs):
            if c:
                out = out + rat_to_float(c, self.values) * self._powers[k]
        return out

    def _blocks(self, rows: list[PhaseDensity]) -> sps.csr_matrix:
        zero = sps.csr_matrix((self.n, self.n))
        return sps.bmat([[self.op(r[c]) if r[c] else zero for c in self.coords] for r in rows], format="csr")

    def _substitute(self, expr: PhaseDensity, status: Mapping[str, MultiplierDetermination]) -> tuple[PhaseDensity, np.ndarray]:
        """Replace determined multipliers; free ones become constant forcing."""
        forcing = np.zeros(self.n)
        for _ in range(len(self.space.multipliers) + 1):
            _, lam = expr.split_multipliers()
            if not lam:
                break
            for mu, coef in lam.items():
                expr = expr - PhaseDensity.of(self.space, {mu: coef})
                d = status.get(mu)
                if d is not None and d.kind == "determined":
                    if not d.operator.is_const():
                        raise NotImplementedError(f"{mu} is determined through a nonlocal operator")
                    expr = expr + d.rhs.apply(coef * (1 / d.operator.lc()))
                else:
                    # a constant multiplier only sees the constant term of its operator
                    forcing += rat_to_float(coef.constant_term(), self.values) * self.gauge.get(mu, 0.0)
        else:
            raise RuntimeError("multiplier substitution did not terminate")
        return expr, forcing

    def _assemble(self):
        eqs = hamilton_equations(self.cs.hamiltonian)
        status = self.cs.multiplier_status()
        rows, forcing = [], []
        for c in self.coords:
            expr, f = self._substitute(eqs[c], status)
            rows.append(expr)
            forcing.append(f)
        return self._blocks(rows), np.concatenate(forcing)

    def rhs(self, z: np.ndarray) -> np.ndarray:
        return self.A @ z + self.b

    def energy(self, z: np.ndarray) -> float:
        return float(0.5 * self.dx * z @ (self.K @ z))

    def constraint_residual(self, z: np.ndarray) -> float:
        return 0.0 if self.G is None else float(np.max(np.abs(self.G @ z)))

    def hamiltonian_flow(self, z: np.ndarray) -> np.ndarray:
        """``J grad E`` with the lattice bracket ``{q_j, p_k} = delta_jk / dx``."""
        grad = self.dx * (self.K @ z)
        half = len(self.space.fields) * self.n
        return np.concatenate([grad[half:], -grad[:half]]) / self.dx

    def state(self, z: np.ndarray, t: float = 0.0) -> LatticeState:
        return LatticeState(self.coords, z.reshape(len(self.coords), self.n), self.dx, t)


def random_state(system: LatticeSystem, seed: int = 0, modes: int = 8, amplitude: float = 1.0) -> LatticeState:
    """Low-pass random data (Fourier modes 0..modes) for every canonical coordinate."""
    rng = np.random.default_rng(seed)
    x = np.arange(system.n) * system.dx
    rows = []
    for _ in system.coords:
        row = np.full(system.n, rng.normal() * 0.5)
        for m in range(1, modes + 1):
            c, s = rng.normal(size=2) / m
            row += c * np.cos(m * x) + s * np.sin(m * x)
        rows.append(amplitude * row)
    return LatticeState(system.coords, np.array(rows), system.dx)


def project(system: LatticeSystem, state: LatticeState) -> LatticeState:
    """Least-norm correction onto the lattice constraint surface."""
    if system.G is None:
        return state
    z = state.flat()
    G = system.G.toarray()
    corr, *_ = np.linalg.lstsq(G, G @ z, rcond=None)
    return state.with_flat(z - corr, state.t)


@dataclass
class DriftReport:
    model: str
    steps: int
    dt: float
    max_constraint_drift: float
    rel_energy_drift: float
    current_divergence: float | None = None
    times: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)

    def records(self, params: dict, constraint_tol=1e-6, energy_tol=1e-8, current_tol=1e-3) -> list[CheckRecord]:
        out = [
            CheckRecord.below("lattice.constraint_drift", self.model, params, self.max_constraint_drift, constraint_tol),
            CheckRecord.below("lattice.energy_drift", self.model, params, self.rel_energy_drift, energy_tol),
        ]
        if self.current_divergence is not None:
            out.append(CheckRecord.below("lattice.current_divergence", self.model, params, self.current_divergence, current_tol))
        return out


def _rk4_step(system: LatticeSystem, z: np.ndarray, dt: float) -> np.ndarray:
    k1 = system.rhs(z)
    k2 = system.rhs(z + 0.5 * dt * k1)
    k3 = system.rhs(z + 0.5 * dt * k2)
    k4 = system.rhs(z + dt * k3)
    return z + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _has_gauge_current(coords) -> bool:
    return all(c in coords for c in ("phi", "A0", "A1"))


def _current_divergence(system: LatticeSystem, prev: np.ndarray, cur: np.ndarray, nxt: np.ndarray, dt: float) -> np.ndarray:
    """``phi_tt - phi_xx + (A0)_t - (A1)_x`` with central differences in t and x."""
    n = system.n
    idx = {c: i for i, c in enumerate(system.coords)}

    def part(z, c):
        return z[idx[c] * n : (idx[c] + 1) * n]

    phi_tt = (part(nxt, "phi") - 2 * part(cur, "phi") + part(prev, "phi")) / dt**2
    a0_t = (part(nxt, "A0") - part(prev, "A0")) / (2 * dt)
    D = system.D
    return phi_tt - D @ (D @ part(cur, "phi")) + a0_t - D @ part(cur, "A1")


def evolve_lattice(
    system: LatticeSystem,
    init: LatticeState,
    dt: float,
    steps: int,
    sample_every: int = 100,
    check_current: bool | None = None,
) -> tuple[list[LatticeState], DriftReport]:
    """Integrate with RK4 and monitor constraints, energy and the gauge current."""
    if dt > 0.5 * system.dx:
        warnings.warn(f"dt={dt:g} exceeds 0.5*dx={0.5 * system.dx:g}", CFLWarning, stacklevel=2)
    z = init.flat().copy()
    scale = init.scale() or 1.0
    if system.constraint_residual(z) > 1e-12 * scale:
        raise ValueError("initial data violate the constraints; use project() first")
    if check_current is None:
        check_current = _has_gauge_current(system.coords)
    e0 = system.energy(z)
    drift_c, drift_e, div = 0.0, 0.0, 0.0
    traj = [init]
    times, energies = [init.t], [e0]
    prev = None
    t = init.t
    for step in range(1, steps + 1):
        nxt = _rk4_step(system, z, dt)
        if check_current and prev is not None and step % sample_every == 0:
            div = max(div, float(np.max(np.abs(_current_divergence(system, prev, z, nxt, dt)))))
        prev, z = z, nxt
        t = init.t + step * dt
        if step % sample_every == 0 or step == steps:
            drift_c = max(drift_c, system.constraint_residual(z) / scale)
            e = system.energy(z)
            drift_e = max(drift_e, abs(e - e0) / abs(e0) if e0 else abs(e))
            traj.append(system.state(z, t))
            times.append(t)
            energies.append(e)
    report = DriftReport(
        system.cs.model,
        steps,
        dt,
        drift_c,
        drift_e,
        div / scale if check_current else None,
        times,
        energies,
    )
    return traj, report


def gradient_check(system: LatticeSystem, state: LatticeState, samples: int = 24, eps: float = 1e-5, seed: int = 0) -> float:
    """Worst relative mismatch between the Hamiltonian flow and finite differences of the energy."""
    rng = np.random.default_rng(seed)
    z = state.flat()
    flow = system.hamiltonian_flow(z)
    half = len(system.space.fields) * system.n
    worst = 0.0
    scale = float(np.max(np.abs(flow))) or 1.0
    for j in rng.choice(len(z), size=min(samples, len(z)), replace=False):
        e = np.zeros_like(z)
        e[j] = eps
        dE = (system.energy(z + e) - system.energy(z - e)) / (2 * eps)
        # flow[q] = dE/dp / dx, flow[p] = -dE/dq / dx
        partner = j + half if j < half else j - half
        sign = -1.0 if j < half else 1.0
        predicted = sign * dE / system.dx
        worst = max(worst, abs(flow[partner] - predicted) / scale)
    return worst


def run_lattice(
    cs: ConstraintSet,
    n: int = 256,
    dt: float = 1e-3,
    t_end: float = 10.0,
    seed: int = 0,
    values: Mapping[str, float] | None = None,
    gauge_multipliers: Mapping[str, float] | None = None,
    sample_every: int = 100,
) -> tuple[LatticeSystem, DriftReport]:
    """Random projected initial data evolved to ``t_end``."""
    system = LatticeSystem(cs, n, values, gauge_multipliers)
    init = project(system, random_state(system, seed))
    steps = int(round(t_end / dt))
    _, report = evolve_lattice(system, init, dt, steps, sample_every=sample_every)
    return system, report
