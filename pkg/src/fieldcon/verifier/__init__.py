"""Numerical cross-checks of the symbolic engine."""

from .ansatz import DomainError, PlaneWaveConfig, SampleGrid, ansatz_residuals, verify_ansatz
from .lattice import (
    CFLWarning,
    DriftReport,
    LatticeState,
    LatticeSystem,
    evolve_lattice,
    gradient_check,
    project,
    random_state,
    run_lattice,
)
from .oracle import (
    DEFAULT_VALUES,
    DiracOracle,
    Discretization,
    OracleResult,
    delta_oracle_records,
    dirac_bracket_oracle,
    dirac_oracle_records,
    kernel_oracle,
    smeared_bracket_oracle,
)
from .records import CheckRecord, all_passed

__all__ = [
    "CFLWarning",
    "CheckRecord",
    "DEFAULT_VALUES",
    "DiracOracle",
    "Discretization",
    "DomainError",
    "DriftReport",
    "LatticeState",
    "LatticeSystem",
    "OracleResult",
    "PlaneWaveConfig",
    "SampleGrid",
    "all_passed",
    "ansatz_residuals",
    "delta_oracle_records",
    "dirac_bracket_oracle",
    "dirac_oracle_records",
    "evolve_lattice",
    "gradient_check",
    "kernel_oracle",
    "project",
    "random_state",
    "run_lattice",
    "smeared_bracket_oracle",
    "verify_ansatz",
]
