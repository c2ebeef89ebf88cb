"""Plane-wave check of the closed-form solution of the bosonised model.

With ``sigma = S cos(w t - k x)`` (``w^2 = k^2 + m^2``, ``m^2 = a^2 e^2/(a-1)``)
and a light-cone wave ``h = H cos(k (x - t))``, the field ``phi = sigma - h``
and the vector potential

    A^mu = -(1/(a e)) [d^mu phi + (1-a) eps^{mu nu} d_nu phi - a eps^{mu nu} d_nu h]

solve the field equations.  All derivatives are taken analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .records import CheckRecord

METRIC = np.diag([1.0, -1.0])
EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])  # eps^{mu nu}, eps^{01} = +1


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class PlaneWaveConfig:
    a: float
    e: float
    k: float
    sigma_amp: float = 1.0
    h_amp: float = 0.5

    def __post_init__(self):
        if not self.a > 1:
            raise DomainError(f"a must exceed 1 for a real mass (got a={self.a}); m^2 = a^2 e^2/(a-1)")
        if self.e == 0:
            raise DomainError("coupling e must be nonzero")

    @property
    def mass_squared(self) -> float:
        return self.a**2 * self.e**2 / (self.a - 1)

    @property
    def omega(self) -> float:
        return math.sqrt(self.k**2 + self.mass_squared)


@dataclass(frozen=True)
class SampleGrid:
    nt: int = 17
    nx: int = 33
    t_max: float = 3.0
    x_max: float = 2 * math.pi

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.linspace(0.0, self.t_max, self.nt)
        x = np.linspace(-self.x_max / 2, self.x_max / 2, self.nx)
        return np.meshgrid(t, x, indexing="ij")


class Wave:
    """Finite sum ``sum c cos(w t - q x + s pi/2)`` closed under differentiation."""

    def __init__(self, terms=()):
        self.terms = list(terms)

    @classmethod
    def cos(cls, amp: float, w: float, q: float) -> Wave:
        return cls([(amp, w, q, 0)])

    def dt(self) -> Wave:
        return Wave([(c * w, w, q, s + 1) for c, w, q, s in self.terms])

    def dx(self) -> Wave:
        return Wave([(-c * q, w, q, s + 1) for c, w, q, s in self.terms])

    def d(self, mu: int) -> Wave:
        return self.dt() if mu == 0 else self.dx()

    def __add__(self, other: Wave) -> Wave:
        return Wave(self.terms + other.terms)

    def __sub__(self, other: Wave) -> Wave:
        return self + other * -1.0

    def __mul__(self, c: float) -> Wave:
        return Wave([(c * a, w, q, s) for a, w, q, s in self.terms])

    __rmul__ = __mul__

    def __call__(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(t, dtype=float)
        for c, w, q, s in self.terms:
            out += c * np.cos(w * t - q * x + s * math.pi / 2)
        return out


def zero() -> Wave:
    return Wave()


def box(f: Wave) -> Wave:
    return f.dt().dt() - f.dx().dx()


def build_fields(cfg: PlaneWaveConfig) -> dict:
    sigma = Wave.cos(cfg.sigma_amp, cfg.omega, cfg.k)
    h = Wave.cos(cfg.h_amp, cfg.k, cfg.k)
    phi = sigma - h
    a, e = cfg.a, cfg.e
    A_up = []
    for mu in range(2):
        term = phi.d(mu) * METRIC[mu, mu]
        for nu in range(2):
            if EPS[mu, nu]:
                term = term + phi.d(nu) * ((1 - a) * EPS[mu, nu]) - h.d(nu) * (a * EPS[mu, nu])
        A_up.append(term * (-1.0 / (a * e)))
    A_low = [A_up[mu] * METRIC[mu, mu] for mu in range(2)]
    return {"sigma": sigma, "h": h, "phi": phi, "A_up": A_up, "A_low": A_low}


def _residual(terms: list[Wave], t, x) -> tuple[float, float]:
    """Max-norm of the sum of ``terms`` and the largest single-term magnitude."""
    values = [w(t, x) for w in terms]
    total = np.sum(values, axis=0)
    scale = max(float(np.max(np.abs(v))) for v in values)
    return float(np.max(np.abs(total))), scale


def ansatz_residuals(cfg: PlaneWaveConfig, grid: SampleGrid = SampleGrid()) -> dict[str, tuple[float, float]]:
    """Map of check name to (residual, field scale)."""
    f = build_fields(cfg)
    t, x = grid.mesh()
    a, e = cfg.a, cfg.e
    phi, h, A_up, A_low = f["phi"], f["h"], f["A_up"], f["A_low"]
    out = {}

    # scalar field equation: box phi + e (g^{mu nu} - eps^{mu nu}) d_mu A_nu = 0
    terms = [box(phi)]
    for mu in range(2):
        for nu in range(2):
            c = METRIC[mu, nu] - EPS[mu, nu]
            if c:
                terms.append(A_low[nu].d(mu) * (e * c))
    out["scalar_equation"] = _residual(terms, t, x)

    # gauge field equation: d_mu F^{mu nu} + e (g^{mu nu} - eps^{mu nu}) d_mu phi + a e^2 A^nu = 0
    def F_up(mu, nu):
        return A_up[nu].d(mu) * METRIC[mu, mu] - A_up[mu].d(nu) * METRIC[nu, nu]

    for nu in range(2):
        terms = [F_up(mu, nu).d(mu) for mu in range(2)]
        for mu in range(2):
            c = METRIC[mu, nu] - EPS[mu, nu]
            if c:
                terms.append(phi.d(mu) * (e * c))
        terms.append(A_up[nu] * (a * e**2))
        out[f"gauge_equation_{nu}"] = _residual(terms, t, x)

    F = zero()
    for mu in range(2):
        for nu in range(2):
            if EPS[mu, nu]:
                F = F + A_low[nu].d(mu) * EPS[mu, nu]
    out["klein_gordon_F"] = _residual([box(F), F * cfg.mass_squared], t, x)
    out["F_identity"] = _residual([F, (phi + h) * (a * e)], t, x)
    out["wave_equation_h"] = _residual([h.dt().dt(), h.dx().dx() * -1.0], t, x)
    out["klein_gordon_sigma"] = _residual([box(f["sigma"]), f["sigma"] * cfg.mass_squared], t, x)
    return out


def verify_ansatz(cfg: PlaneWaveConfig, grid: SampleGrid = SampleGrid(), rel_tol: float = 1e-10) -> list[CheckRecord]:
    params = {"a": cfg.a, "e": cfg.e, "k": cfg.k}
    records = []
    for name, (res, scale) in ansatz_residuals(cfg, grid).items():
        value = res / scale if scale else res
        records.append(CheckRecord.below(f"ansatz.{name}", "jr-symbolic", params, value, rel_tol))
    return records
