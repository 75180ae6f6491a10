"""
================================================================================
MODELS / QUBIT.PY - Amplitude-Damped Qubit
================================================================================
H = 0, L = sqrt(gamma) s- in the (up, down) basis. The only closed-form
Lindblad solution in the tool: rho_upup(t) = exp(-gamma t) rho_upup(0).
Shipped as a verification oracle for the integrators.
================================================================================
"""

from typing import Dict

import numpy as np

from config import HBAR
from core.operators import SIGMA_MINUS, SIGMA_X, SIGMA_Y, SIGMA_Z, Operator
from exceptions import InvalidParameterError
from models.base import LindbladModel


def build_qubit_damping(gamma: float, hbar: float = HBAR) -> LindbladModel:
    if gamma < 0:
        raise InvalidParameterError(f"gamma must be non-negative, got {gamma}")
    return LindbladModel(
        h_eff=np.zeros((2, 2), dtype=complex),
        jumps=(np.sqrt(gamma) * SIGMA_MINUS,),
        hbar=hbar,
        label=f"qubit amplitude damping gamma={gamma:g}",
    )


def qubit_observables() -> Dict[str, Operator]:
    return {
        "p_up": np.diag([1.0, 0.0]).astype(complex),
        "sx": SIGMA_X,
        "sy": SIGMA_Y,
        "sz": SIGMA_Z,
    }
