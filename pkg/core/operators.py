#!/usr/bin/env python3
"""
Operators - Dense Complex Linear Algebra Kernel
Value types and contracts shared by every other module: operators are dense
complex numpy matrices, density matrices are validated Hermitian unit-trace
positive operators, state vectors are unit-norm complex arrays.

Location: core/operators.py
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg

from config import (
    DEGENERACY_TOL,
    EIG_TOL,
    HERMITIAN_TOL,
    MAX_DENSE_DIM,
    NORM_COLLAPSE_TOL,
    POSITIVITY_TOL,
    TRACE_TOL,
)
from exceptions import (
    DimensionError,
    HermiticityError,
    ModelTooLargeError,
    NormCollapseError,
    PositivityError,
    NumericalError,
)

logger = logging.getLogger(__name__)

# Operators are plain (dim, dim) complex128 arrays; state vectors are (dim,).
Operator = np.ndarray
StateVector = np.ndarray


# =============================================================================
# SINGLE-SITE SPIN OPERATORS  (basis ordering: up, down)
# =============================================================================

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# sigma+ |down> = |up>
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

for _op in (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_PLUS, SIGMA_MINUS):
    _op.setflags(write=False)


# =============================================================================
# VALIDATION HELPERS
# =============================================================================

def as_operator(A, what: str = "operator") -> Operator:
    """Coerce to a square complex matrix, rejecting anything else."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionError(what, ("n", "n"), A.shape)
    return A


def _require_same_dim(A: Operator, B: Operator, what: str) -> None:
    if A.shape != B.shape:
        raise DimensionError(what, A.shape, B.shape)


def hermitian_residue(A: Operator) -> float:
    """Max-norm of A - A†."""
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def max_norm(A) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A))) if A.size else 0.0


def require_hermitian(A: Operator, what: str = "operator", tol: float = HERMITIAN_TOL) -> None:
    """
    Raise HermiticityError unless A is Hermitian.

    The tolerance is absolute for operators of max-norm up to 1 and scales
    with the max-norm above that, so grid Hamiltonians with large kinetic
    entries are judged on the same relative footing.
    """
    residue = hermitian_residue(A)
    limit = tol * max(1.0, max_norm(A))
    if residue > limit:
        raise HermiticityError(what, residue, limit)


def hermitize(A: Operator) -> Operator:
    return 0.5 * (A + A.conj().T)


# =============================================================================
# PRIMITIVES
# =============================================================================

def dagger(A: Operator) -> Operator:
    """Conjugate transpose."""
    return np.ascontiguousarray(as_operator(A).conj().T)


def matmul(A: Operator, B: Operator) -> Operator:
    A, B = as_operator(A), as_operator(B)
    _require_same_dim(A, B, "matmul")
    return A @ B


def add(A: Operator, B: Operator) -> Operator:
    A, B = as_operator(A), as_operator(B)
    _require_same_dim(A, B, "add")
    return A + B


def scale(c: complex, A: Operator) -> Operator:
    return complex(c) * as_operator(A)


def commutator(A: Operator, B: Operator) -> Operator:
    """AB - BA."""
    A, B = as_operator(A), as_operator(B)
    _require_same_dim(A, B, "commutator")
    return A @ B - B @ A


def kron(A: Operator, B: Operator, max_dim: int = MAX_DENSE_DIM) -> Operator:
    """
    Kronecker product with the dense-representation cap.

    Args:
        A: Left factor (the more significant index)
        B: Right factor
        max_dim: Largest allowed result dimension

    Returns:
        Operator of dimension dim(A) * dim(B)
    """
    A, B = as_operator(A), as_operator(B)
    dim = A.shape[0] * B.shape[0]
    if dim > max_dim:
        raise ModelTooLargeError(
            f"kron result dimension {dim} exceeds the dense limit {max_dim}"
        )
    return np.kron(A, B)


def site_operator(op: Operator, site: int, n_sites: int) -> Operator:
    """
    Embed a single-site operator on `site` of an n-site spin chain.

    Site 0 is the leftmost (most significant) tensor factor.
    """
    if not 0 <= site < n_sites:
        raise DimensionError("site index", (n_sites,), (site,))
    factors = [IDENTITY2] * n_sites
    factors[site] = as_operator(op)
    return reduce(kron, factors)


def trace(A: Operator) -> complex:
    return complex(np.trace(as_operator(A)))


def expectation(rho: Operator, A: Operator) -> complex:
    """Tr(rho A)."""
    rho, A = as_operator(rho), as_operator(A)
    _require_same_dim(rho, A, "expectation")
    return complex(np.einsum("ij,ji->", rho, A))


# =============================================================================
# EIGENBASIS
# =============================================================================

@dataclass(frozen=True)
class EnergyBasis:
    """Ascending energies, unitary eigenvector columns and truncation rank."""

    energies: np.ndarray
    vectors: np.ndarray
    rank: int

    def __post_init__(self):
        energies = np.array(self.energies, dtype=float)
        vectors = np.array(self.vectors, dtype=complex)
        if vectors.ndim != 2 or vectors.shape[1] != energies.shape[0]:
            raise DimensionError("energy basis", (vectors.shape[0], energies.shape[0]), vectors.shape)
        if not 1 <= self.rank <= energies.shape[0]:
            raise DimensionError("energy basis rank", (energies.shape[0],), (self.rank,))
        energies.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def kept_energies(self) -> np.ndarray:
        return self.energies[: self.rank]

    @property
    def kept_vectors(self) -> np.ndarray:
        return self.vectors[:, : self.rank]

    def truncated(self, rank: int) -> "EnergyBasis":
        return EnergyBasis(self.energies, self.vectors, rank)


def _fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest-modulus entry real and non-negative."""
    columns = np.arange(vectors.shape[1])
    pivots_idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[pivots_idx, columns]
    magnitudes = np.abs(pivots)
    phases = np.where(magnitudes > 0, pivots / np.where(magnitudes > 0, magnitudes, 1.0), 1.0)
    fixed = vectors * phases.conj()[np.newaxis, :]
    fixed[pivots_idx, columns] = magnitudes
    return fixed


def _order_degenerate(energies: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """
    Order eigenvector columns inside each degenerate cluster lexicographically.

    The ordering is a reproducibility convention only; it carries no physics.
    """
    scale_ = max(1.0, float(np.max(np.abs(energies))))
    order = list(range(len(energies)))
    start = 0
    while start < len(energies):
        stop = start + 1
        while stop < len(energies) and energies[stop] - energies[stop - 1] <= DEGENERACY_TOL * scale_:
            stop += 1
        if stop - start > 1:
            cluster = order[start:stop]
            keys = {
                c: tuple(np.round(np.column_stack([vectors[:, c].real, vectors[:, c].imag]).ravel(), 10))
                for c in cluster
            }
            order[start:stop] = sorted(cluster, key=lambda c: keys[c])
        start = stop
    return vectors[:, order]


def hermitian_eig(H: Operator) -> EnergyBasis:
    """
    Diagonalize a Hermitian operator.

    Args:
        H: Hermitian operator (checked against HERMITIAN_TOL)

    Returns:
        EnergyBasis with ascending energies, gauge-fixed unitary eigenvectors
        and full rank
    """
    H = as_operator(H, "Hamiltonian")
    require_hermitian(H, "Hamiltonian")
    energies, vectors = scipy.linalg.eigh(hermitize(H))
    vectors = _order_degenerate(energies, _fix_gauge(vectors))

    unitarity = max_norm(vectors.conj().T @ vectors - np.eye(len(energies)))
    if unitarity > EIG_TOL:
        raise NumericalError(f"eigenvectors not unitary: residue {unitarity:.3e}")
    return EnergyBasis(energies, vectors, len(energies))


# =============================================================================
# STATES
# =============================================================================

def state_vector(amplitudes: Sequence[complex]) -> StateVector:
    """Normalize amplitudes to a unit state vector."""
    psi = np.array(amplitudes, dtype=complex).ravel()
    if psi.size < 1:
        raise DimensionError("state vector", ("n",), psi.shape)
    norm = float(np.linalg.norm(psi))
    if norm < NORM_COLLAPSE_TOL:
        raise NormCollapseError(f"state vector norm {norm:.3e} too small to normalize")
    return psi / norm


def pure_density(psi: StateVector) -> Operator:
    """|psi><psi|."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def density_invariants(rho: Operator) -> Tuple[float, float, float]:
    """Return (Hermiticity residue, |Tr - 1|, smallest eigenvalue)."""
    rho = as_operator(rho, "density matrix")
    residue = hermitian_residue(rho)
    trace_error = abs(np.trace(rho) - 1.0)
    min_eig = float(np.linalg.eigvalsh(hermitize(rho))[0])
    return residue, float(trace_error), min_eig


def validate_density_matrix(rho: Operator, positivity_tol: float = POSITIVITY_TOL) -> None:
    """Raise if rho violates the density-matrix invariants."""
    residue, trace_error, min_eig = density_invariants(rho)
    if residue > HERMITIAN_TOL:
        raise HermiticityError("density matrix", residue, HERMITIAN_TOL)
    if trace_error > TRACE_TOL:
        raise NumericalError(f"density matrix trace off by {trace_error:.3e}")
    if min_eig < positivity_tol:
        raise PositivityError(f"density matrix eigenvalue {min_eig:.3e} below {positivity_tol:.0e}")


def density_matrix(rho: Operator) -> Operator:
    """Validated, read-only copy of a density matrix."""
    rho = np.array(as_operator(rho, "density matrix"))
    validate_density_matrix(rho)
    rho.setflags(write=False)
    return rho


def maximally_mixed(dim: int) -> Operator:
    return np.eye(dim, dtype=complex) / dim


# =============================================================================
# DIAGNOSTICS
# =============================================================================

def purity(rho: Operator) -> float:
    """Tr(rho^2) for Hermitian rho."""
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho) ** 2))


def trace_distance(rho: Operator, sigma: Operator) -> float:
    """Half the trace norm of rho - sigma."""
    rho, sigma = as_operator(rho), as_operator(sigma)
    _require_same_dim(rho, sigma, "trace distance")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(rho - sigma)))))


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """|<psi|phi>|^2 for pure states."""
    return float(abs(np.vdot(psi, phi)) ** 2)
