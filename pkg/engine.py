"""
================================================================================
ENGINE.PY - Open-System Dynamics Engine
================================================================================
The heart of the tool. Time-evolves a LindbladModel three ways:

- integrate_lindblad: fixed-step classical RK4 on the master equation,
  Hermitized and trace-renormalized after every step
- sse_step / run_ensemble: Euler-Maruyama on the diffusive stochastic
  Schrödinger equation with real Wiener increments, one independent stream
  per jump operator, averaged over seeded trajectories
- observables_series: expectation-value tables over a stored trajectory
- liouvillian / steady_state: dense superoperator and its stationary state

Key Features:
- Uniform frame times (every frame_stride-th step) so audio rendering can
  interpolate between frames without resampling
- Counter-based Philox streams keyed by (base_seed, trajectory): trajectories
  may run in any order or concurrently, the average is merged in batch order
- Invariant monitoring with hard aborts on positivity or norm failures
================================================================================
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from config import (
    CONVERGENCE_TOL,
    DEFAULT_BASE_SEED,
    DEFAULT_DT,
    DEFAULT_FRAME_STRIDE,
    ENSEMBLE_BATCH_SIZE,
    HERMITIAN_TOL,
    MAX_DENSE_DIM,
    NOISE_BLOCK_STEPS,
    NORM_COLLAPSE_TOL,
    POSITIVITY_ABORT,
    POSITIVITY_TOL,
    RENORMALIZE_TOL,
    STEP_COUNT_TOL,
)
from core.operators import (
    SIGMA_PLUS,
    Operator,
    StateVector,
    as_operator,
    density_matrix,
    hermitian_residue,
    hermitize,
    max_norm,
    require_hermitian,
    site_operator,
    state_vector,
    validate_density_matrix,
)
from exceptions import (
    ConvergenceError,
    DimensionError,
    FrameSpacingError,
    InvalidParameterError,
    ModelTooLargeError,
    NormCollapseError,
    PositivityError,
    TrajectoryAbortError,
)
from models.base import LindbladModel

logger = logging.getLogger(__name__)

UINT64_MAX = 2 ** 64 - 1


# =============================================================================
# TIME GRID, TRAJECTORY, ENSEMBLE
# =============================================================================

@dataclass(frozen=True)
class TimeGrid:
    """
    Fixed-step time grid; every frame_stride-th step is stored.

    The step count is (t_end - t_start)/dt rounded up, so the actual step
    never exceeds dt and the grid ends exactly at t_end.
    """

    t_end: float
    dt: float = DEFAULT_DT
    frame_stride: int = DEFAULT_FRAME_STRIDE
    t_start: float = 0.0

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise InvalidParameterError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if not self.dt > 0:
            raise InvalidParameterError(f"dt must be positive, got {self.dt}")
        if int(self.frame_stride) != self.frame_stride or self.frame_stride < 1:
            raise InvalidParameterError(f"frame_stride must be a positive integer, got {self.frame_stride}")
        if (self.t_end - self.t_start) / self.dt < 1 - STEP_COUNT_TOL:
            raise InvalidParameterError("time span must cover at least one step")
        if abs(self.step - self.dt) > STEP_COUNT_TOL * self.dt:
            logger.warning(
                "dt=%g does not divide the span %g; integrating with step %.6g",
                self.dt, self.t_end - self.t_start, self.step,
            )

    @property
    def n_steps(self) -> int:
        ratio = (self.t_end - self.t_start) / self.dt
        return max(1, int(np.ceil(ratio * (1.0 - STEP_COUNT_TOL))))

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def n_frames(self) -> int:
        return self.n_steps // self.frame_stride + 1

    @property
    def frame_times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_frames) * self.frame_stride * self.step

    def halved(self) -> "TimeGrid":
        """Same frames, half the step."""
        return TimeGrid(self.t_end, self.step / 2.0, self.frame_stride * 2, self.t_start)


@dataclass(frozen=True)
class StateTrajectory:
    """Stored density-matrix frames and their times."""

    times: np.ndarray
    frames: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        frames = np.array(self.frames, dtype=complex)
        if frames.ndim != 3 or frames.shape[1] != frames.shape[2] or frames.shape[0] != times.shape[0]:
            raise DimensionError("trajectory frames", (times.shape[0], "d", "d"), frames.shape)
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise InvalidParameterError("trajectory times must be strictly increasing")
        times.setflags(write=False)
        frames.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", frames)

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def __len__(self) -> int:
        return self.frames.shape[0]

    def frame_interval(self) -> float:
        """Uniform spacing between frames; raises if the spacing is not uniform."""
        if len(self) < 2:
            raise FrameSpacingError("trajectory needs at least two frames")
        gaps = np.diff(self.times)
        if np.max(np.abs(gaps - gaps[0])) > 1e-9 * max(1.0, abs(gaps[0])):
            raise FrameSpacingError("trajectory frames are not uniformly spaced")
        return float(gaps[0])

    def validate(self, positivity_tol: float = POSITIVITY_TOL) -> None:
        for frame in self.frames:
            validate_density_matrix(frame, positivity_tol)


@dataclass(frozen=True)
class EnsembleSpec:
    n_traj: int = 500
    base_seed: int = DEFAULT_BASE_SEED

    def __post_init__(self):
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise InvalidParameterError(f"n_traj must be a positive integer, got {self.n_traj}")
        if int(self.base_seed) != self.base_seed or not 0 <= self.base_seed <= UINT64_MAX:
            raise InvalidParameterError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed}")

    def generator(self, index: int) -> np.random.Generator:
        """Philox stream of trajectory `index`, derived from (base_seed, index)."""
        seed = np.random.SeedSequence(int(self.base_seed), spawn_key=(int(index),))
        return np.random.Generator(np.random.Philox(seed))


# =============================================================================
# MASTER EQUATION
# =============================================================================

def _check_model_dim(model: LindbladModel, shape: Tuple[int, ...], what: str) -> None:
    if shape[-1] != model.dim:
        raise DimensionError(what, (model.dim,), shape)


def lindblad_rhs(rho: Operator, model: LindbladModel) -> Operator:
    """
    Right-hand side of the master equation.

    -(i/hbar)[H, rho] + (1/hbar) sum_k (L rho L† - 1/2 L†L rho - 1/2 rho L†L),
    evaluated as K rho + rho K† + (1/hbar) sum_k L rho L†.
    """
    rho = as_operator(rho, "rho")
    _check_model_dim(model, rho.shape, "rho")
    K = model.generator
    out = K @ rho + rho @ K.conj().T
    for jump in model.jumps:
        out += (jump @ rho @ jump.conj().T) / model.hbar
    return out


def liouvillian(model: LindbladModel) -> np.ndarray:
    """
    Superoperator matrix of lindblad_rhs on row-major vec(rho).

    vec(A rho B) = (A kron B^T) vec(rho), so the generator is
    K kron I + I kron conj(K) + (1/hbar) sum_k L kron conj(L).
    """
    if model.dim ** 2 > MAX_DENSE_DIM:
        raise ModelTooLargeError(
            f"superoperator of dimension {model.dim ** 2} exceeds the dense limit of {MAX_DENSE_DIM}"
        )
    K = model.generator
    identity = np.eye(model.dim, dtype=complex)
    out = np.kron(K, identity) + np.kron(identity, K.conj())
    for jump in model.jumps:
        out += np.kron(jump, jump.conj()) / model.hbar
    return out


def steady_state(model: LindbladModel) -> Operator:
    """
    Stationary density matrix: the Liouvillian eigenvector closest to zero.

    With several stationary states the choice among them is arbitrary.
    """
    values, vectors = np.linalg.eig(liouvillian(model))
    k = int(np.argmin(np.abs(values)))
    logger.debug("steady state of %s: |lambda| = %.3g", model.label or "model", abs(values[k]))
    rho = vectors[:, k].reshape(model.dim, model.dim)
    return density_matrix(hermitize(rho / np.trace(rho)))


def _rk4_step(rho: Operator, model: LindbladModel, dt: float) -> Operator:
    k1 = lindblad_rhs(rho, model)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, model)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, model)
    k4 = lindblad_rhs(rho + dt * k3, model)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_frames(model: LindbladModel, rho0: Operator, grid: TimeGrid) -> np.ndarray:
    dt, stride = grid.step, grid.frame_stride
    frames = np.empty((grid.n_frames, model.dim, model.dim), dtype=complex)
    frames[0] = rho0
    rho = np.array(rho0, dtype=complex)
    worst_drift = 0.0

    for step in range(1, grid.n_steps + 1):
        rho = _rk4_step(rho, model, dt)

        drift = hermitian_residue(rho)
        worst_drift = max(worst_drift, drift)
        if drift > HERMITIAN_TOL:
            logger.debug("step %d: Hermiticity drift %.3e before symmetrization", step, drift)
        rho = hermitize(rho)

        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > RENORMALIZE_TOL:
            rho = rho / tr

        if step % stride == 0:
            min_eig = float(np.linalg.eigvalsh(rho)[0])
            t = grid.t_start + step * dt
            if min_eig < POSITIVITY_ABORT:
                raise PositivityError(
                    f"t={t:.6g}: smallest eigenvalue {min_eig:.3e} below {POSITIVITY_ABORT:.0e} "
                    f"(reduce dt={dt:.3g} or check the model)"
                )
            if min_eig < POSITIVITY_TOL:
                logger.warning("t=%.6g: smallest eigenvalue %.3e below %.0e", t, min_eig, POSITIVITY_TOL)
            frames[step // stride] = rho

    logger.debug("worst pre-symmetrization Hermiticity drift %.3e", worst_drift)
    return frames


def integrate_lindblad(
    model: LindbladModel,
    rho0: Operator,
    grid: TimeGrid,
    check_convergence: bool = False,
) -> StateTrajectory:
    """
    Integrate the master equation with fixed-step RK4.

    Args:
        model: Dynamics to integrate
        rho0: Initial density matrix
        grid: Time grid and frame stride
        check_convergence: Also run at dt/2 and require the final frames to
            agree within CONVERGENCE_TOL (max-norm)

    Returns:
        StateTrajectory with grid.n_frames frames
    """
    rho0 = density_matrix(rho0)
    _check_model_dim(model, rho0.shape, "rho0")
    logger.info("integrating %s: %d steps of %.4g", model.label or "model", grid.n_steps, grid.step)

    frames = _integrate_frames(model, rho0, grid)

    if check_convergence:
        fine = _integrate_frames(model, rho0, grid.halved())
        delta = max_norm(frames[-1] - fine[-1])
        logger.info("step-halving check: final-frame delta %.3e", delta)
        if delta > CONVERGENCE_TOL:
            raise ConvergenceError(
                f"dt={grid.step:.4g} and dt/2 disagree by {delta:.3e} > {CONVERGENCE_TOL:.0e}"
            )

    return StateTrajectory(grid.frame_times, frames)


# =============================================================================
# STOCHASTIC SCHRÖDINGER EQUATION
# =============================================================================

def _sse_step_batch(psi: np.ndarray, model: LindbladModel, dt: float, dW: np.ndarray) -> np.ndarray:
    """
    One Euler-Maruyama step for a batch of states.

    Args:
        psi: (M, d) unit-norm states
        dW: (M, K) real Wiener increments, one per jump

    Returns:
        (M, d) renormalized states
    """
    hbar = model.hbar
    drift = psi @ model.generator.T
    diffusion = np.zeros_like(psi)

    for k, jump in enumerate(model.jumps):
        l_psi = psi @ jump.T
        mean = np.einsum("mi,mi->m", psi.conj(), l_psi)
        drift += (mean.conj()[:, None] * l_psi - 0.5 * (np.abs(mean) ** 2)[:, None] * psi) / hbar
        diffusion += (l_psi - mean[:, None] * psi) * (dW[:, k] / np.sqrt(hbar))[:, None]

    updated = psi + drift * dt + diffusion
    norms = np.linalg.norm(updated, axis=1)
    collapsed = np.flatnonzero(norms < NORM_COLLAPSE_TOL)
    if collapsed.size:
        error = NormCollapseError(
            f"state norm {norms[collapsed[0]]:.3e} collapsed below {NORM_COLLAPSE_TOL:.0e} (dt too large)"
        )
        error.rows = collapsed
        raise error
    return updated / norms[:, None]


def sse_step(psi: StateVector, model: LindbladModel, dt: float, noise) -> StateVector:
    """
    Advance one trajectory by one Euler-Maruyama step.

    Args:
        psi: Unit-norm state
        model: Dynamics
        dt: Step
        noise: One real increment dW_k ~ N(0, dt) per jump operator

    Returns:
        Renormalized state
    """
    psi = np.asarray(psi, dtype=complex)
    _check_model_dim(model, psi.shape, "psi")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise NormCollapseError("sse_step needs a unit-norm state")
    noise = np.asarray(noise, dtype=float).reshape(-1)
    if noise.shape[0] != len(model.jumps):
        raise DimensionError("noise increments", (len(model.jumps),), noise.shape)
    return _sse_step_batch(psi[np.newaxis, :], model, dt, noise[np.newaxis, :])[0]


def _run_batch(
    model: LindbladModel,
    psi0: StateVector,
    grid: TimeGrid,
    spec: EnsembleSpec,
    start: int,
    stop: int,
) -> np.ndarray:
    """Sum of |psi><psi| over trajectories start..stop-1 at every frame."""
    count = stop - start
    n_jumps = len(model.jumps)
    dt, stride = grid.step, grid.frame_stride
    generators = [spec.generator(i) for i in range(start, stop)]

    psi = np.tile(psi0, (count, 1))
    accum = np.empty((grid.n_frames, model.dim, model.dim), dtype=complex)
    accum[0] = np.einsum("mi,mj->ij", psi, psi.conj())

    for block_start in range(0, grid.n_steps, NOISE_BLOCK_STEPS):
        block = min(NOISE_BLOCK_STEPS, grid.n_steps - block_start)
        noise = np.stack([g.standard_normal((block, n_jumps)) for g in generators]) * np.sqrt(dt)

        for offset in range(block):
            step = block_start + offset + 1
            try:
                psi = _sse_step_batch(psi, model, dt, noise[:, offset, :])
            except NormCollapseError as exc:
                raise TrajectoryAbortError(start + int(exc.rows[0]), exc) from exc
            if step % stride == 0:
                accum[step // stride] = np.einsum("mi,mj->ij", psi, psi.conj())

    return accum


def run_ensemble(
    model: LindbladModel,
    psi0: StateVector,
    grid: TimeGrid,
    spec: EnsembleSpec,
    workers: int = 1,
) -> StateTrajectory:
    """
    Average many stochastic trajectories into density-matrix frames.

    Trajectories are processed in fixed batches of ENSEMBLE_BATCH_SIZE; the
    batch sums are merged in batch order, so the result does not depend on
    `workers` or on scheduling.

    Args:
        model: Dynamics
        psi0: Initial pure state
        grid: Time grid shared by every trajectory
        spec: Trajectory count and base seed
        workers: Threads used to run batches

    Returns:
        StateTrajectory of ensemble-averaged density matrices
    """
    psi0 = state_vector(psi0)
    _check_model_dim(model, psi0.shape, "psi0")
    logger.info(
        "running %d trajectories of %s: %d steps of %.4g",
        spec.n_traj, model.label or "model", grid.n_steps, grid.step,
    )

    bounds: List[Tuple[int, int]] = [
        (start, min(start + ENSEMBLE_BATCH_SIZE, spec.n_traj))
        for start in range(0, spec.n_traj, ENSEMBLE_BATCH_SIZE)
    ]

    def batch(bound: Tuple[int, int]) -> np.ndarray:
        return _run_batch(model, psi0, grid, spec, *bound)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(batch, bounds))
    else:
        partials = [batch(bound) for bound in bounds]

    total = partials[0]
    for partial in partials[1:]:
        total = total + partial

    frames = np.empty_like(total)
    for index, summed in enumerate(total):
        rho = hermitize(summed / spec.n_traj)
        frames[index] = rho / float(np.trace(rho).real)
    return StateTrajectory(grid.frame_times, frames)


# =============================================================================
# OBSERVABLES
# =============================================================================

def frame_expectations(frames: np.ndarray, op: Operator) -> np.ndarray:
    """Tr(rho A) for every frame."""
    return np.einsum("fij,ji->f", frames, op)


def transverse_moments(frames: np.ndarray, n_sites: int) -> np.ndarray:
    """(n_frames, n_sites) complex <s+_j>."""
    frames = np.asarray(frames)
    if frames.ndim == 2:
        frames = frames[np.newaxis]
    columns = [frame_expectations(frames, site_operator(SIGMA_PLUS, j, n_sites)) for j in range(n_sites)]
    return np.stack(columns, axis=1)


def phase_increments(moments: np.ndarray) -> np.ndarray:
    """Wrapped site-to-site phase steps arg(m_{j+1} conj(m_j)) along the last axis."""
    moments = np.asarray(moments)
    return np.angle(moments[..., 1:] * moments[..., :-1].conj())


def observables_series(
    traj: StateTrajectory,
    observables: Mapping[str, Operator],
    n_sites: Optional[int] = None,
) -> Dict[str, np.ndarray]:
    """
    Expectation-value table over a trajectory.

    Args:
        traj: Stored frames
        observables: Named Hermitian observables
        n_sites: For chain models, also emit |<s+_j>| and arg <s+_j> per site

    Returns:
        Ordered mapping column name -> real series, starting with 'time'
        and always containing 'purity'
    """
    table: Dict[str, np.ndarray] = {"time": np.asarray(traj.times)}
    for name, op in observables.items():
        op = as_operator(op, name)
        if op.shape[0] != traj.dim:
            raise DimensionError(f"observable {name}", (traj.dim, traj.dim), op.shape)
        require_hermitian(op, f"observable {name}")
        table[name] = frame_expectations(traj.frames, op).real

    table["purity"] = np.sum(np.abs(traj.frames) ** 2, axis=(1, 2))

    if n_sites:
        if 2 ** n_sites != traj.dim:
            raise DimensionError("chain trajectory", (2 ** n_sites,), (traj.dim,))
        moments = transverse_moments(traj.frames, n_sites)
        for j in range(n_sites):
            table[f"sp_abs_{j}"] = np.abs(moments[:, j])
            table[f"sp_arg_{j}"] = np.angle(moments[:, j])
    return table

