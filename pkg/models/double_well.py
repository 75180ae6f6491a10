"""
================================================================================
MODELS / DOUBLE_WELL.PY - Quartic Double Well in a Heat Bath
================================================================================
Builds the double-well particle coupled to a thermal bath:

    H_gamma = P^2/(2m) + c4 X^4 - c2 X^2 + (gamma/2)(XP + PX)
    L       = sqrt(4 gamma m kT / hbar) X + i sqrt(gamma hbar / (4 m kT)) P

on a uniform finite-difference grid over [-x_max, +x_max] with Dirichlet
boundaries. P is the central first difference (exactly Hermitian); the
kinetic term uses the 3-point second difference, which keeps every level
single (squaring the central difference would decouple even and odd grid
sites and duplicate the spectrum).

With c4 = 0 and c2 < 0 the potential is the harmonic well +|c2| x^2.
================================================================================
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from config import (
    DEFAULT_C2,
    DEFAULT_C4,
    DEFAULT_KT,
    DEFAULT_MASS,
    DEFAULT_N_POINTS,
    DEFAULT_X_MAX,
    HBAR,
    MIN_N_POINTS,
)
from core.operators import Operator
from exceptions import InvalidParameterError
from models.base import LindbladModel


# =============================================================================
# PARAMETERS
# =============================================================================

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over [-x_max, +x_max], endpoints included."""

    n_points: int = DEFAULT_N_POINTS
    x_max: float = DEFAULT_X_MAX
    mass: float = DEFAULT_MASS

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < MIN_N_POINTS:
            raise InvalidParameterError(f"n_points must be an integer >= {MIN_N_POINTS}, got {self.n_points}")
        if not self.x_max > 0:
            raise InvalidParameterError(f"x_max must be positive, got {self.x_max}")
        if not self.mass > 0:
            raise InvalidParameterError(f"mass must be positive, got {self.mass}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.x_max / (self.n_points - 1)

    @property
    def positions(self) -> np.ndarray:
        # Built around the centre so the grid is exactly mirror-symmetric.
        return self.spacing * (np.arange(self.n_points) - (self.n_points - 1) / 2.0)


@dataclass(frozen=True)
class DoubleWellParams:
    c4: float = DEFAULT_C4
    c2: float = DEFAULT_C2
    gamma: float = 0.0
    kT: float = DEFAULT_KT
    mass: float = DEFAULT_MASS

    def __post_init__(self):
        if self.c4 < 0:
            raise InvalidParameterError(f"c4 must be non-negative, got {self.c4}")
        if self.gamma < 0:
            raise InvalidParameterError(f"gamma must be non-negative, got {self.gamma}")
        if not self.mass > 0:
            raise InvalidParameterError(f"mass must be positive, got {self.mass}")

    @property
    def barrier_height(self) -> float:
        """c2^2 / (4 c4); zero for a single well."""
        if self.c4 > 0 and self.c2 > 0:
            return self.c2 ** 2 / (4.0 * self.c4)
        return 0.0

    @property
    def minimum_position(self) -> float:
        """Positive well minimum sqrt(c2 / (2 c4)); zero for a single well."""
        if self.c4 > 0 and self.c2 > 0:
            return float(np.sqrt(self.c2 / (2.0 * self.c4)))
        return 0.0

    def closed(self) -> "DoubleWellParams":
        """Same well without the bath."""
        return replace(self, gamma=0.0)


def potential(x: np.ndarray, params: DoubleWellParams) -> np.ndarray:
    """V(x) = c4 x^4 - c2 x^2."""
    x = np.asarray(x, dtype=float)
    return params.c4 * x ** 4 - params.c2 * x ** 2


# =============================================================================
# OPERATORS
# =============================================================================

def build_position_operators(grid: GridSpec, hbar: float = HBAR) -> Tuple[Operator, Operator]:
    """
    Position and momentum on the grid.

    Returns:
        (X, P): X diagonal with the grid positions, P = -i hbar D with D the
        central first-difference matrix (Dirichlet boundaries)
    """
    n, h = grid.n_points, grid.spacing
    X = np.diag(grid.positions).astype(complex)

    D = np.zeros((n, n))
    idx = np.arange(n - 1)
    D[idx, idx + 1] = 1.0 / (2.0 * h)
    D[idx + 1, idx] = -1.0 / (2.0 * h)
    P = -1j * hbar * D
    return X, P


def kinetic_operator(grid: GridSpec, mass: float, hbar: float = HBAR) -> Operator:
    """-hbar^2/(2m) times the 3-point second difference."""
    n, h = grid.n_points, grid.spacing
    D2 = (np.diag(np.full(n, -2.0)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / h ** 2
    return (-(hbar ** 2) / (2.0 * mass) * D2).astype(complex)


def build_double_well(grid: GridSpec, params: DoubleWellParams, hbar: float = HBAR) -> LindbladModel:
    """
    Assemble the heat-bath double well.

    Args:
        grid: Finite-difference grid
        params: Potential and bath parameters
        hbar: Reduced Planck constant (1 in simulation units)

    Returns:
        LindbladModel on the full grid; jumps are empty when gamma = 0
    """
    if params.gamma > 0 and not params.kT > 0:
        raise InvalidParameterError(f"kT must be positive when gamma > 0, got {params.kT}")
    if grid.mass != params.mass:
        raise InvalidParameterError(f"grid mass {grid.mass} differs from particle mass {params.mass}")

    X, P = build_position_operators(grid, hbar)
    m, gamma, kT = params.mass, params.gamma, params.kT

    h_eff = kinetic_operator(grid, m, hbar) + np.diag(potential(grid.positions, params)).astype(complex)
    jumps = ()
    if gamma > 0:
        h_eff = h_eff + 0.5 * gamma * (X @ P + P @ X)
        L = np.sqrt(4.0 * gamma * m * kT / hbar) * X + 1j * np.sqrt(gamma * hbar / (4.0 * m * kT)) * P
        jumps = (L,)

    label = f"double well c4={params.c4:g} c2={params.c2:g} gamma={gamma:g} kT={kT:g} n={grid.n_points}"
    return LindbladModel(h_eff=h_eff, jumps=jumps, hbar=hbar, label=label)
