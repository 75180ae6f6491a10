"""
Quantum Sonification Tool - open quantum system dynamics rendered as binaural audio.

Simulates Lindblad dynamics (master equation or stochastic trajectories) for a
double well in a heat bath, a boundary-driven XXZ chain and an amplitude-damped
qubit, then plays the density matrix in the Hamiltonian eigenbasis: populations
in both ears, coherences split between left (ket) and right (bra).

Usage:
    python main.py render --config double_well_thermal
"""

__version__ = "1.0.0"
__description__ = "Open quantum system simulator with binaural density-matrix sonification"
