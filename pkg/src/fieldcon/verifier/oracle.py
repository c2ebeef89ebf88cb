"""Numerical oracle for symbolic bracket kernels.

Linear densities are discretised on a periodic grid with spectral
differentiation.  A smeared functional ``F[f] = int f(y) F(y) dy`` then has an
explicit gradient in the lattice coordinates, and brackets follow from the
finite-dimensional formula with ``{q_j, p_k} = delta_jk / h``.  The symbolic
prediction is ``int f(y) (k(D) g)(y) dy`` for a kernel ``k(D) delta(y-x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..dirac import ConstraintSet, classify, dirac_bracket, poisson_bracket
from ..legendre import PhaseDensity
from ..symkernel import OpPoly, OpRat
from .records import CheckRecord

DEFAULT_VALUES = {"a": 2.5, "e": 0.75}
LENGTH = 2 * math.pi


def test_function(n: int, seed: int, modes: int = 8) -> np.ndarray:
    """Smooth zero-mean periodic function built from Fourier modes 1..modes."""
    rng = np.random.default_rng(seed)
    x = np.arange(n) * LENGTH / n
    out = np.zeros(n)
    for m in range(1, modes + 1):
        c, s = rng.normal(size=2) / m
        out += c * np.cos(m * x) + s * np.sin(m * x)
    return out


def _wavenumbers(n: int) -> np.ndarray:
    k = np.fft.fftfreq(n, d=LENGTH / n) * 2 * math.pi
    if n % 2 == 0:
        k[n // 2] = 0.0  # drop the Nyquist mode so real data stay real
    return k


def symbol(op: OpPoly | OpRat, n: int, values: Mapping[str, float]) -> np.ndarray:
    """Fourier multiplier ``op(ik)``; poles of a nonlocal kernel map to zero."""
    k = _wavenumbers(n)
    if isinstance(op, OpRat):
        num = np.array([op.num.evaluate(1j * kk, values) for kk in k])
        den = np.array([op.den.evaluate(1j * kk, values) for kk in k])
        out = np.zeros(n, dtype=complex)
        ok = np.abs(den) > 1e-12
        out[ok] = num[ok] / den[ok]
        return out
    return np.array([op.evaluate(1j * kk, values) for kk in k], dtype=complex)


def spectral_apply(op: OpPoly | OpRat, f: np.ndarray, values: Mapping[str, float]) -> np.ndarray:
    """Apply ``op(D)`` to periodic samples ``f``."""
    return np.real(np.fft.ifft(symbol(op, len(f), values) * np.fft.fft(f)))


def spectral_matrix(op: OpPoly, n: int, values: Mapping[str, float]) -> np.ndarray:
    """Dense circulant matrix of ``op(D)``."""
    return np.real(np.fft.ifft(symbol(op, n, values)[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


class Discretization:
    """Lattice representation of the densities of one phase space."""

    def __init__(self, space, n: int, values: Mapping[str, float] | None = None):
        self.space = space
        self.n = n
        self.h = LENGTH / n
        self.values = dict(DEFAULT_VALUES if values is None else values)
        self.coords = space.canonical
        self._cache: dict = {}

    def _block(self, op: OpPoly) -> np.ndarray:
        key = tuple(str(c) for c in op.coeffs)
        if key not in self._cache:
            self._cache[key] = spectral_matrix(op, self.n, self.values)
        return self._cache[key]

    def gradient_matrix(self, F: PhaseDensity) -> np.ndarray:
        """Rows: ``F(x_j)``; columns: lattice coordinates ``z_i(x_k)``."""
        n = self.n
        G = np.zeros((n, n * len(self.coords)))
        for i, c in enumerate(self.coords):
            if F[c]:
                G[:, i * n : (i + 1) * n] = self._block(F[c])
        return G

    def apply_poisson(self, w: np.ndarray) -> np.ndarray:
        """``J w`` with ``J = [[0, I/h], [-I/h, 0]]`` in (fields, momenta) blocks, along axis 0."""
        half = len(self.space.fields) * self.n
        return np.concatenate([w[half:], -w[:half]]) / self.h

    def smear(self, F: PhaseDensity, f: np.ndarray) -> np.ndarray:
        """Gradient of ``F[f]`` with respect to the lattice coordinates."""
        return self.h * self.gradient_matrix(F).T @ f

    def bracket(self, F: PhaseDensity, G: PhaseDensity, f: np.ndarray, g: np.ndarray) -> float:
        return float(self.smear(F, f) @ self.apply_poisson(self.smear(G, g)))


@dataclass(frozen=True)
class OracleResult:
    numeric: float
    symbolic: float
    scale: float

    @property
    def rel_error(self) -> float:
        return abs(self.numeric - self.symbolic) / max(abs(self.symbolic), self.scale)


def _smeared_kernel(kernel: OpPoly | OpRat, f: np.ndarray, g: np.ndarray, h: float, values) -> float:
    return float(h * np.dot(f, spectral_apply(kernel, g, values)))


def _scale(f: np.ndarray, g: np.ndarray, h: float) -> float:
    return float(h * np.linalg.norm(f) * np.linalg.norm(g))


def smeared_bracket_oracle(
    F: PhaseDensity,
    G: PhaseDensity,
    n: int = 512,
    seed: int = 0,
    values: Mapping[str, float] | None = None,
    disc: Discretization | None = None,
) -> OracleResult:
    """Compare ``{F[f], G[g]}`` computed on the lattice with the symbolic kernel."""
    disc = disc or Discretization(F.space, n, values)
    return kernel_oracle(F, G, poisson_bracket(F, G), disc, seed)


def kernel_oracle(F: PhaseDensity, G: PhaseDensity, kernel: OpPoly | OpRat, disc: Discretization, seed: int = 0) -> OracleResult:
    """Lattice ``{F[f], G[g]}`` scored against an arbitrary candidate kernel."""
    f, g = test_function(disc.n, seed), test_function(disc.n, seed + 1000)
    numeric = disc.bracket(F, G, f, g)
    return OracleResult(numeric, _smeared_kernel(kernel, f, g, disc.h, disc.values), _scale(f, g, disc.h))


class DiracOracle:
    """Finite-dimensional Dirac bracket with lattice constraints ``C_s(x_j)``.

    The lattice bracket matrix can have zero modes (e.g. ``d_x theta``); the
    pseudo-inverse is used and test functions carry no constant mode, which
    decouples the zero-mode sector by translation invariance.
    """

    def __init__(self, cs: ConstraintSet, n: int = 128, values=None):
        self.cs = cs if cs.classified else classify(cs)
        self.disc = Discretization(self.cs.space, n, values)
        if len(self.cs):
            self.C = np.vstack([self.disc.gradient_matrix(c) for c in self.cs.densities])
            self.JCt = self.disc.apply_poisson(self.C.T)
            self.delta_pinv = np.linalg.pinv(self.C @ self.JCt, rcond=1e-10)
        else:
            self.C = None

    def __call__(self, u: PhaseDensity, v: PhaseDensity, seed: int = 0, kernel: OpPoly | OpRat | None = None) -> OracleResult:
        """Lattice value against ``kernel`` (default: the engine's Dirac bracket)."""
        disc, cs = self.disc, self.cs
        u, v = u.embed(cs.space), v.embed(cs.space)
        n, h = disc.n, disc.h
        f, g = test_function(n, seed), test_function(n, seed + 1000)
        gu, gv = disc.smear(u, f), disc.smear(v, g)
        numeric = float(gu @ disc.apply_poisson(gv))
        if self.C is not None:
            left = gu @ self.JCt  # {u, C_s(x_j)}
            right = self.C @ disc.apply_poisson(gv)  # {C_s(x_j), v}
            numeric -= float(left @ self.delta_pinv @ right)
        if kernel is None:
            kernel = dirac_bracket(u, v, cs)
        symbolic = _smeared_kernel(kernel, f, g, h, disc.values)
        return OracleResult(numeric, symbolic, _scale(f, g, h))


def dirac_bracket_oracle(
    u: PhaseDensity, v: PhaseDensity, cs: ConstraintSet, n: int = 128, seed: int = 0, values=None
) -> OracleResult:
    return DiracOracle(cs, n, values)(u, v, seed)


def delta_oracle_records(
    cs: ConstraintSet, model: str, n: int = 512, seeds: Sequence[int] = (0, 1, 2), rel_tol: float = 1e-6, values=None
) -> list[CheckRecord]:
    """One record per bracket-matrix entry, worst case over seeds."""
    vals = dict(DEFAULT_VALUES if values is None else values)
    params = {k: vals[k] for k in cs.space.field_params}
    disc = Discretization(cs.space, n, vals)
    out = []
    for i, a in enumerate(cs.constraints):
        for j, b in enumerate(cs.constraints):
            worst = max(smeared_bracket_oracle(a.density, b.density, seed=s, disc=disc).rel_error for s in seeds)
            out.append(CheckRecord.below(f"oracle.delta[{a.label},{b.label}]", model, params, worst, rel_tol))
    return out


def dirac_oracle_records(
    cs: ConstraintSet, model: str, n: int = 128, seeds: Sequence[int] = (0, 1, 2), rel_tol: float = 1e-6, values=None
) -> list[CheckRecord]:
    """Check every Dirac bracket among canonical coordinates against the lattice."""
    vals = dict(DEFAULT_VALUES if values is None else values)
    params = {k: vals[k] for k in cs.space.field_params}
    coords = cs.space.canonical
    units = [PhaseDensity.coordinate(cs.space, c) for c in coords]
    oracle = DiracOracle(cs, n, vals)
    out = []
    for i, a in enumerate(coords):
        for j in range(i, len(coords)):
            worst = max(oracle(units[i], units[j], s).rel_error for s in seeds)
            out.append(CheckRecord.below(f"oracle.dirac[{a},{coords[j]}]", model, params, worst, rel_tol))
    return out
