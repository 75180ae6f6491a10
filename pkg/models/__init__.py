"""
Physical models for the sonification tool.

Each builder produces a LindbladModel:
    - double_well: quartic double well in a heat bath, truncated to its
      lowest eigenstates
    - xxz: boundary-driven XXZ spin chain
    - qubit_damping: amplitude-damped qubit (closed-form oracle)

prepare_system() turns a model config into everything the commands need:
the model, its energy basis, named observables and plotting data.
"""

from dataclasses import dataclass, field
from typing import ClassVar, Dict, Optional, Union

import numpy as np

from config import DEFAULT_RANK, MIN_RANK
from core.operators import EnergyBasis, Operator, hermitian_eig, hermitize
from exceptions import InvalidParameterError
from models.base import LindbladModel, project_operator, truncate_to_eigenbasis
from models.double_well import (
    DoubleWellParams,
    GridSpec,
    build_double_well,
    build_position_operators,
    potential,
)
from models.qubit import build_qubit_damping, qubit_observables
from models.xxz_chain import XXZParams, build_xxz_chain, spin_observables, xxz_hamiltonian


# =============================================================================
# MODEL CONFIGS
# =============================================================================

@dataclass(frozen=True)
class DoubleWellConfig:
    kind: ClassVar[str] = "double_well"

    params: DoubleWellParams = field(default_factory=DoubleWellParams)
    grid: GridSpec = field(default_factory=GridSpec)
    rank: int = DEFAULT_RANK

    def __post_init__(self):
        if int(self.rank) != self.rank or self.rank < MIN_RANK:
            raise InvalidParameterError(f"rank must be an integer >= {MIN_RANK}, got {self.rank}")
        if self.rank > self.grid.n_points:
            raise InvalidParameterError(f"rank {self.rank} exceeds n_points {self.grid.n_points}")

    @property
    def dim(self) -> int:
        return self.rank

    @property
    def n_sites(self) -> Optional[int]:
        return None


@dataclass(frozen=True)
class XXZConfig:
    kind: ClassVar[str] = "xxz"

    params: XXZParams = field(default_factory=XXZParams)

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def n_sites(self) -> Optional[int]:
        return self.params.n_sites


@dataclass(frozen=True)
class QubitDampingConfig:
    kind: ClassVar[str] = "qubit_damping"

    gamma: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidParameterError(f"gamma must be non-negative, got {self.gamma}")

    @property
    def dim(self) -> int:
        return 2

    @property
    def n_sites(self) -> Optional[int]:
        return 1


ModelConfig = Union[DoubleWellConfig, XXZConfig, QubitDampingConfig]

MODEL_KINDS = {cls.kind: cls for cls in (DoubleWellConfig, XXZConfig, QubitDampingConfig)}


# =============================================================================
# PREPARED SYSTEM
# =============================================================================

@dataclass(frozen=True)
class PreparedSystem:
    """
    A model ready to evolve and sonify.

    Attributes:
        model: Dynamics in model coordinates
        energy_basis: Eigenbasis of the closed Hamiltonian, in model coordinates
        observables: Named Hermitian observables for the observables table
        n_sites: Chain length for spin models (enables per-site moments)
        grid_basis: Closed-Hamiltonian eigenvectors on the position grid
        positions: Grid positions (double well only)
        potential: Potential on the grid (double well only)
    """

    model: LindbladModel
    energy_basis: EnergyBasis
    observables: Dict[str, Operator]
    n_sites: Optional[int] = None
    grid_basis: Optional[EnergyBasis] = None
    positions: Optional[np.ndarray] = None
    potential: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.model.dim


def _prepare_double_well(cfg: DoubleWellConfig) -> PreparedSystem:
    full = build_double_well(cfg.grid, cfg.params)
    closed = build_double_well(cfg.grid, cfg.params.closed())
    grid_basis = hermitian_eig(closed.h_eff).truncated(cfg.rank)

    # The closed part is diagonal in its own eigenbasis; only the bath terms
    # need projecting.
    energies = grid_basis.kept_energies
    bath = project_operator(full.h_eff - closed.h_eff, grid_basis, cfg.rank)
    h_eff = hermitize(np.diag(energies).astype(complex) + bath)
    truncated = truncate_to_eigenbasis(full, grid_basis, cfg.rank)
    model = LindbladModel(h_eff=h_eff, jumps=truncated.jumps, hbar=full.hbar, label=truncated.label)

    X, P = build_position_operators(cfg.grid, full.hbar)
    observables = {
        "X": hermitize(project_operator(X, grid_basis, cfg.rank)),
        "P": hermitize(project_operator(P, grid_basis, cfg.rank)),
        "H": np.diag(energies).astype(complex),
    }
    return PreparedSystem(
        model=model,
        energy_basis=EnergyBasis(energies, np.eye(cfg.rank, dtype=complex), cfg.rank),
        observables=observables,
        grid_basis=grid_basis,
        positions=cfg.grid.positions,
        potential=potential(cfg.grid.positions, cfg.params),
    )


def _prepare_xxz(cfg: XXZConfig) -> PreparedSystem:
    model = build_xxz_chain(cfg.params)
    hamiltonian = xxz_hamiltonian(cfg.params)
    observables = dict(spin_observables(cfg.params.n_sites))
    observables["H"] = hamiltonian
    return PreparedSystem(
        model=model,
        energy_basis=hermitian_eig(hamiltonian),
        observables=observables,
        n_sites=cfg.params.n_sites,
    )


def _prepare_qubit(cfg: QubitDampingConfig) -> PreparedSystem:
    return PreparedSystem(
        model=build_qubit_damping(cfg.gamma),
        energy_basis=EnergyBasis(np.zeros(2), np.eye(2, dtype=complex), 2),
        observables=qubit_observables(),
    )


def prepare_system(cfg: ModelConfig) -> PreparedSystem:
    """
    Build the model, energy basis and observables for a model config.

    Args:
        cfg: One of DoubleWellConfig, XXZConfig, QubitDampingConfig

    Returns:
        PreparedSystem
    """
    if isinstance(cfg, DoubleWellConfig):
        return _prepare_double_well(cfg)
    if isinstance(cfg, XXZConfig):
        return _prepare_xxz(cfg)
    if isinstance(cfg, QubitDampingConfig):
        return _prepare_qubit(cfg)
    raise InvalidParameterError(f"unknown model config {type(cfg).__name__}")


__all__ = [
    "DoubleWellConfig",
    "DoubleWellParams",
    "GridSpec",
    "LindbladModel",
    "MODEL_KINDS",
    "ModelConfig",
    "PreparedSystem",
    "QubitDampingConfig",
    "XXZConfig",
    "XXZParams",
    "prepare_system",
]
