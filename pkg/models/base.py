"""
================================================================================
MODELS / BASE.PY - Lindblad Model Container & Eigenbasis Truncation
================================================================================
A LindbladModel is the complete dynamical description: effective
Hamiltonian, ordered jump operators and the value of hbar. Builders in this
package produce full-size models; truncate_to_eigenbasis projects them onto
the lowest eigenstates of the closed (gamma = 0) Hamiltonian so that long runs
and sonification stay small.
================================================================================
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from config import HBAR, MIN_RANK
from core.operators import (
    EnergyBasis,
    Operator,
    as_operator,
    hermitize,
    require_hermitian,
)
from exceptions import DimensionError, InvalidParameterError


@dataclass(frozen=True)
class LindbladModel:
    """
    Effective Hamiltonian plus jump operators.

    Attributes:
        h_eff: Hermitian effective Hamiltonian
        jumps: Ordered jump operators, each of h_eff's dimension
        hbar: Reduced Planck constant in simulation units
        label: Human-readable description used in metadata
    """

    h_eff: Operator
    jumps: Tuple[Operator, ...] = field(default_factory=tuple)
    hbar: float = HBAR
    label: str = ""

    def __post_init__(self):
        h_eff = np.array(as_operator(self.h_eff, "h_eff"))
        require_hermitian(h_eff, "h_eff")
        if not self.hbar > 0:
            raise InvalidParameterError(f"hbar must be positive, got {self.hbar}")

        jumps = []
        for k, jump in enumerate(self.jumps):
            jump = np.array(as_operator(jump, f"jump {k}"))
            if jump.shape != h_eff.shape:
                raise DimensionError(f"jump {k}", h_eff.shape, jump.shape)
            jump.setflags(write=False)
            jumps.append(jump)

        h_eff.setflags(write=False)
        object.__setattr__(self, "h_eff", h_eff)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.h_eff.shape[0]

    @cached_property
    def jump_products(self) -> Tuple[Operator, ...]:
        """L_k† L_k for every jump."""
        return tuple(jump.conj().T @ jump for jump in self.jumps)

    @cached_property
    def generator(self) -> Operator:
        """K = -(i/hbar) H - (1/(2 hbar)) sum_k L_k† L_k."""
        K = (-1j / self.hbar) * self.h_eff
        for product in self.jump_products:
            K = K - (0.5 / self.hbar) * product
        return K


def project_operator(op: Operator, basis: EnergyBasis, rank: int) -> Operator:
    """U_r† O U_r with U_r the first `rank` eigenvector columns."""
    op = as_operator(op)
    if op.shape[0] != basis.dim:
        raise DimensionError("projected operator", (basis.dim, basis.dim), op.shape)
    U = basis.vectors[:, :rank]
    return U.conj().T @ op @ U


def truncate_to_eigenbasis(model: LindbladModel, basis: EnergyBasis, rank: int) -> LindbladModel:
    """
    Project every operator of a model onto the lowest `rank` eigenstates.

    Args:
        model: Full-size model
        basis: Eigenbasis of the closed Hamiltonian of the same model family
        rank: Number of eigenstates kept (at least 2)

    Returns:
        Model of dimension `rank` expressed in the eigenbasis
    """
    if rank < MIN_RANK:
        raise InvalidParameterError(f"truncation rank must be at least {MIN_RANK}, got {rank}")
    if rank > model.dim:
        raise InvalidParameterError(f"truncation rank {rank} exceeds model dimension {model.dim}")
    if basis.dim != model.dim:
        raise DimensionError("energy basis", (model.dim,), (basis.dim,))

    h_eff = hermitize(project_operator(model.h_eff, basis, rank))
    jumps: Sequence[Operator] = [project_operator(jump, basis, rank) for jump in model.jumps]
    return LindbladModel(
        h_eff=h_eff,
        jumps=tuple(jumps),
        hbar=model.hbar,
        label=f"{model.label} [rank {rank}]".strip(),
    )
