"""
================================================================================
MODELS / XXZ_CHAIN.PY - Boundary-Driven XXZ Heisenberg Chain
================================================================================
    H   = J sum_j [ sx_j sx_{j+1} + sy_j sy_{j+1} + Delta (sz_j sz_{j+1} - I) ]
    L_L = a_L (r s-_1 s+_1) - b_L ((sz_1 - I)/2 - r s-_1)
    L_R = a_R (r e^{-i Phi} s-_N s+_N) - b_R ((sz_N - I)/2 - r e^{i Phi} s-_N)

The boundary operators are taken literally, including the missing phase on
the first term of L_L. Per-site basis is (up, down); site 0 is the leftmost
tensor factor.
================================================================================
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from config import HBAR, MAX_CHAIN_SITES
from core.operators import (
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    Operator,
    site_operator,
)
from exceptions import InvalidParameterError, ModelTooLargeError
from models.base import LindbladModel


@dataclass(frozen=True)
class XXZParams:
    n_sites: int = 4
    J: float = 1.0
    delta: float = 1.0
    alpha_l: complex = 0.0
    beta_l: complex = 0.0
    alpha_r: complex = 0.0
    beta_r: complex = 0.0
    r: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise InvalidParameterError(f"n_sites must be an integer >= 2, got {self.n_sites}")
        if self.n_sites > MAX_CHAIN_SITES:
            raise ModelTooLargeError(
                f"n_sites={self.n_sites} exceeds the dense limit of {MAX_CHAIN_SITES} sites"
            )
        if self.r < 0:
            raise InvalidParameterError(f"r must be non-negative, got {self.r}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites


def boundary_jump(n_sites: int, site: int, alpha: complex, beta: complex, r: float, phase: float) -> Operator:
    """
    One boundary operator: alpha (r e^{-i phase} s-s+) - beta ((sz - I)/2 - r e^{i phase} s-).

    The left boundary uses phase = 0.
    """
    identity = np.eye(2 ** n_sites, dtype=complex)
    s_minus = site_operator(SIGMA_MINUS, site, n_sites)
    s_plus = site_operator(SIGMA_PLUS, site, n_sites)
    s_z = site_operator(SIGMA_Z, site, n_sites)
    return alpha * (r * np.exp(-1j * phase) * (s_minus @ s_plus)) - beta * (
        (s_z - identity) / 2.0 - r * np.exp(1j * phase) * s_minus
    )


def xxz_hamiltonian(params: XXZParams) -> Operator:
    n = params.n_sites
    identity = np.eye(params.dim, dtype=complex)
    sx = [site_operator(SIGMA_X, j, n) for j in range(n)]
    sy = [site_operator(SIGMA_Y, j, n) for j in range(n)]
    sz = [site_operator(SIGMA_Z, j, n) for j in range(n)]

    H = np.zeros((params.dim, params.dim), dtype=complex)
    for j in range(n - 1):
        H += sx[j] @ sx[j + 1] + sy[j] @ sy[j + 1] + params.delta * (sz[j] @ sz[j + 1] - identity)
    return params.J * H


def build_xxz_chain(params: XXZParams, hbar: float = HBAR) -> LindbladModel:
    """
    Assemble the boundary-driven chain.

    Returns:
        LindbladModel of dimension 2**n_sites with jumps [L_L, L_R]
    """
    n = params.n_sites
    left = boundary_jump(n, 0, params.alpha_l, params.beta_l, params.r, 0.0)
    right = boundary_jump(n, n - 1, params.alpha_r, params.beta_r, params.r, params.phi)
    label = f"xxz N={n} J={params.J:g} delta={params.delta:g} r={params.r:g} phi={params.phi:g}"
    return LindbladModel(h_eff=xxz_hamiltonian(params), jumps=(left, right), hbar=hbar, label=label)


def spin_observables(n_sites: int) -> Dict[str, Operator]:
    """Per-site sx, sy, sz keyed as 'sx_0', 'sy_0', 'sz_0', ..."""
    observables = {}
    for j in range(n_sites):
        observables[f"sx_{j}"] = site_operator(SIGMA_X, j, n_sites)
        observables[f"sy_{j}"] = site_operator(SIGMA_Y, j, n_sites)
        observables[f"sz_{j}"] = site_operator(SIGMA_Z, j, n_sites)
    return observables


def total_magnetization(n_sites: int) -> Operator:
    return sum(site_operator(SIGMA_Z, j, n_sites) for j in range(n_sites))


def product_state(angles) -> np.ndarray:
    """
    Product of single-site spinors cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>.

    Args:
        angles: Sequence of (theta, phi) Bloch angles, site 0 first
    """
    psi = np.array([1.0 + 0j])
    for theta, phi in angles:
        spinor = np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)], dtype=complex)
        psi = np.kron(psi, spinor)
    return psi
