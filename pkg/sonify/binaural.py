"""
================================================================================
SONIFY / BINAURAL.PY - Density Matrix to Binaural Stereo
================================================================================
Renders a trajectory of density matrices, expressed in the Hamiltonian
eigenbasis, as two-channel additive synthesis:

    rho_kl = r_kl e^{i theta_kl}
    left(tau)  = sum_{k>=l} r_kl sin(2 pi f_k tau + theta_kl)
    right(tau) = sum_{k>=l} r_kl sin(2 pi f_l tau - theta_kl)

Each level n sounds at a pitch proportional to its (shifted) energy,
f_n = f0 E'_n / E'_0. Populations feed both ears identically; coherences put
the ket pitch in the left ear and the bra pitch in the right ear, so a fully
decohered state is heard as a mono chord.
================================================================================
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from config import (
    ALIAS_GUARD_HZ,
    DEFAULT_AMPLITUDE_FLOOR,
    DEFAULT_COHERENCE_WINDOW,
    DEFAULT_DURATION,
    DEFAULT_F0,
    DEFAULT_HEADROOM,
    DEFAULT_SAMPLE_RATE,
    DEGENERACY_TOL,
    DILATION_PHASE_FRACTION,
    HERMITIAN_TOL,
    MIN_COHERENCE_WINDOW,
    MIN_RANK,
    PHASE_FLOOR,
    RENDER_BLOCK_SIZE,
    RENDER_PAIR_CHUNK,
)
from core.operators import EnergyBasis
from engine import StateTrajectory
from exceptions import (
    AliasingError,
    DimensionError,
    FrameSpacingError,
    HermiticityError,
    InvalidParameterError,
)

logger = logging.getLogger(__name__)


# =============================================================================
# PARAMETERS & BUFFERS
# =============================================================================

@dataclass(frozen=True)
class SonificationParams:
    """
    Audio rendering settings.

    Attributes:
        f0: Pitch of the ground level in Hz
        sample_rate: Samples per second
        duration: Length of the render in seconds; simulation time is
            stretched affinely onto it
        amplitude_floor: Terms with r_kl below this are silent
        headroom: Peak sample magnitude after normalization
        coherence_window: Window of the channel-coherence series in seconds
    """

    f0: float = DEFAULT_F0
    sample_rate: int = DEFAULT_SAMPLE_RATE
    duration: float = DEFAULT_DURATION
    amplitude_floor: float = DEFAULT_AMPLITUDE_FLOOR
    headroom: float = DEFAULT_HEADROOM
    coherence_window: float = DEFAULT_COHERENCE_WINDOW

    def __post_init__(self):
        if not self.f0 > 0:
            raise InvalidParameterError(f"f0 must be positive, got {self.f0}")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise InvalidParameterError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        if not self.duration > 0:
            raise InvalidParameterError(f"duration must be positive, got {self.duration}")
        if self.amplitude_floor < 0:
            raise InvalidParameterError(f"amplitude_floor must be non-negative, got {self.amplitude_floor}")
        if not 0 < self.headroom <= 1:
            raise InvalidParameterError(f"headroom must lie in (0, 1], got {self.headroom}")
        if self.coherence_window < MIN_COHERENCE_WINDOW:
            raise InvalidParameterError(
                f"coherence_window must be at least {MIN_COHERENCE_WINDOW} s, got {self.coherence_window}"
            )
        if self.f0 > self.max_frequency:
            raise AliasingError(f"f0={self.f0:g} Hz is above the alias guard of {self.max_frequency:g} Hz")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def max_frequency(self) -> float:
        """Highest partial allowed: Nyquist minus the alias guard."""
        return self.sample_rate / 2.0 - ALIAS_GUARD_HZ


@dataclass(frozen=True)
class StereoBuffer:
    """Two equal-length channels of float samples in [-1, 1]."""

    sample_rate: int
    left: np.ndarray
    right: np.ndarray
    gain: float = 1.0

    def __post_init__(self):
        left = np.array(self.left, dtype=float).ravel()
        right = np.array(self.right, dtype=float).ravel()
        if left.shape != right.shape:
            raise DimensionError("stereo channels", left.shape, right.shape)
        if not (np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise InvalidParameterError("stereo buffer contains non-finite samples")
        if left.size and max(np.max(np.abs(left)), np.max(np.abs(right))) > 1.0:
            raise InvalidParameterError("stereo buffer samples must lie in [-1, 1]")
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def n_samples(self) -> int:
        return self.left.shape[0]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def interleaved(self) -> np.ndarray:
        """(n_samples, 2) array, left channel first."""
        return np.column_stack([self.left, self.right])


@dataclass(frozen=True)
class FrequencyMap:
    """Mapped pitches plus the energy shift that produced them."""

    frequencies: np.ndarray
    shift: float
    f0: float
    energies: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.frequencies.shape[0]

    def __iter__(self) -> Iterator[float]:
        return iter(self.frequencies.tolist())

    def __getitem__(self, index):
        return self.frequencies[index]

    def as_dict(self) -> Dict:
        return {
            "f0": self.f0,
            "energy_shift": self.shift,
            "energies": self.energies.tolist(),
            "frequencies_hz": self.frequencies.tolist(),
        }


# =============================================================================
# BASIS & FREQUENCY MAP
# =============================================================================

def to_energy_basis(traj: StateTrajectory, basis: EnergyBasis) -> StateTrajectory:
    """
    Re-express every frame in the kept eigenvectors: rho -> U_r† rho U_r.

    Args:
        traj: Trajectory in the coordinates of `basis`
        basis: Eigenbasis; its rank sets the output dimension

    Returns:
        Trajectory whose frames are rank x rank, populations on the diagonal
    """
    if traj.dim != basis.dim:
        raise DimensionError("trajectory vs energy basis", (basis.dim,), (traj.dim,))
    U = basis.kept_vectors
    frames = U.conj().T @ traj.frames @ U
    _check_phase_antisymmetry(frames)
    frames = 0.5 * (frames + np.conj(np.swapaxes(frames, 1, 2)))
    return StateTrajectory(traj.times, frames)


def _check_phase_antisymmetry(frames: np.ndarray) -> None:
    """theta_kl = -theta_lk on every frame, i.e. every frame Hermitian."""
    residue = float(np.max(np.abs(frames - np.conj(np.swapaxes(frames, 1, 2))))) if frames.size else 0.0
    scale = max(1.0, float(np.max(np.abs(frames)))) if frames.size else 1.0
    if residue > HERMITIAN_TOL * scale:
        raise HermiticityError("energy-basis frame", residue, HERMITIAN_TOL)


def energy_shift(energies: Sequence[float]) -> float:
    """
    Constant added to the spectrum so the ground level is strictly positive.

    Zero when E0 > 0; otherwise -E0 plus the first gap above E0 (1.0 when the
    whole spectrum is degenerate).
    """
    energies = np.asarray(energies, dtype=float)
    ground = float(energies[0])
    if ground > 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(energies))))
    gaps = energies[1:] - ground
    gaps = gaps[gaps > DEGENERACY_TOL * scale]
    gap = float(gaps[0]) if gaps.size else 1.0
    return -ground + gap


def map_frequencies(basis: EnergyBasis, params: SonificationParams) -> FrequencyMap:
    """
    Pitch of every kept level, proportional to its shifted energy.

    Args:
        basis: Eigenbasis (rank >= 2)
        params: Supplies f0 and the alias guard

    Returns:
        FrequencyMap with f_0 = params.f0 and non-decreasing partials
    """
    if basis.rank < MIN_RANK:
        raise InvalidParameterError(f"sonification needs rank >= {MIN_RANK}, got {basis.rank}")
    energies = np.array(basis.kept_energies, dtype=float)
    shift = energy_shift(energies)
    shifted = energies + shift
    frequencies = params.f0 * shifted / shifted[0]

    top = float(frequencies[-1])
    if top > params.max_frequency:
        raise AliasingError(
            f"highest partial {top:.1f} Hz exceeds {params.max_frequency:.0f} Hz "
            f"(sample_rate/2 - {ALIAS_GUARD_HZ:.0f} Hz); lower the rank or f0"
        )
    logger.info("mapped %d levels onto %.1f..%.1f Hz (energy shift %.6g)", len(frequencies), frequencies[0], top, shift)
    return FrequencyMap(frequencies=frequencies, shift=shift, f0=params.f0, energies=energies)


# =============================================================================
# RENDERING
# =============================================================================

def time_dilation(traj: StateTrajectory, params: SonificationParams) -> float:
    """Simulation time per audio second."""
    if len(traj) < 2:
        return 0.0
    return float(traj.times[-1] - traj.times[0]) / params.duration


def phase_drift_rate(traj: StateTrajectory, params: SonificationParams) -> float:
    """
    Fastest coherence phase evolution in rad per audio second.

    Measured between consecutive frames on terms loud enough to be heard.
    """
    if len(traj) < 2 or traj.dim < 2:
        return 0.0
    rows, cols = np.tril_indices(traj.dim, k=-1)
    entries = traj.frames[:, rows, cols]
    audible = np.abs(entries) >= max(params.amplitude_floor, PHASE_FLOOR)
    both = audible[1:] & audible[:-1]
    if not np.any(both):
        return 0.0
    steps = np.abs(np.angle(entries[1:] * entries[:-1].conj()))
    audio_interval = traj.frame_interval() / time_dilation(traj, params)
    return float(np.max(steps[both])) / audio_interval


def _frame_positions(traj: StateTrajectory, tau: np.ndarray, duration: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bracketing frame index and linear weight for every audio time."""
    n_frames = len(traj)
    if n_frames == 1:
        return np.zeros(tau.shape, dtype=int), np.zeros(tau.shape)
    u = np.clip(tau / duration, 0.0, 1.0) * (n_frames - 1)
    index = np.minimum(np.floor(u).astype(int), n_frames - 2)
    return index, u - index


def audible_pairs(traj: StateTrajectory, amplitude_floor: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    (row, col) of every coherence that reaches the amplitude floor in some frame.

    Interpolated magnitudes never exceed the louder bracketing frame, so the
    other pairs are silent for the whole render.
    """
    rows, cols = np.tril_indices(traj.dim, k=-1)
    if rows.size == 0:
        return rows, cols
    keep = np.any(np.abs(traj.frames[:, rows, cols]) >= amplitude_floor, axis=0)
    return rows[keep], cols[keep]


def _render_block(
    traj: StateTrajectory,
    frequencies: np.ndarray,
    params: SonificationParams,
    pairs: Tuple[np.ndarray, np.ndarray],
    start: int,
    stop: int,
) -> Tuple[np.ndarray, np.ndarray]:
    tau = np.arange(start, stop) / params.sample_rate
    index, weight = _frame_positions(traj, tau, params.duration)
    upper = np.minimum(index + 1, len(traj) - 1)
    omega_tau = 2.0 * np.pi * np.outer(tau, frequencies)

    diag_idx = np.arange(traj.dim)
    pops = traj.frames[:, diag_idx, diag_idx].real
    r_diag = (1.0 - weight)[:, None] * pops[index] + weight[:, None] * pops[upper]
    r_diag = np.where(r_diag >= params.amplitude_floor, r_diag, 0.0)
    mono = np.sum(r_diag * np.sin(omega_tau), axis=1)

    left, right = mono.copy(), mono.copy()
    # Fixed pair chunks keep every sample's summation order independent of the block split
    for first in range(0, pairs[0].size, RENDER_PAIR_CHUNK):
        rows = pairs[0][first:first + RENDER_PAIR_CHUNK]
        cols = pairs[1][first:first + RENDER_PAIR_CHUNK]
        entries = traj.frames[:, rows, cols]
        values = (1.0 - weight)[:, None] * entries[index] + weight[:, None] * entries[upper]
        r = np.abs(values)
        theta = np.where(r >= PHASE_FLOOR, np.angle(values), 0.0)
        r = np.where(r >= params.amplitude_floor, r, 0.0)
        left += np.sum(r * np.sin(omega_tau[:, rows] + theta), axis=1)
        right += np.sum(r * np.sin(omega_tau[:, cols] - theta), axis=1)
    return left, right


def render_binaural(
    traj: StateTrajectory,
    freqs: Sequence[float],
    params: SonificationParams,
    workers: int = 1,
) -> StereoBuffer:
    """
    Additive binaural synthesis of an energy-basis trajectory.

    Frames are interpolated linearly in their real and imaginary parts;
    samples depend only on absolute audio time, so the block split and the
    number of workers never change the output.

    Args:
        traj: Trajectory in the energy basis with uniformly spaced frames
        freqs: Pitch of every level (len == traj.dim)
        params: Audio settings
        workers: Threads used to render blocks

    Returns:
        StereoBuffer peak-normalized to params.headroom
    """
    if len(traj) == 0:
        raise FrameSpacingError("cannot render an empty trajectory")
    frequencies = np.asarray(list(freqs), dtype=float)
    if frequencies.shape[0] != traj.dim:
        raise DimensionError("frequency table", (traj.dim,), frequencies.shape)
    if len(traj) > 1:
        traj.frame_interval()
    _check_phase_antisymmetry(traj.frames)

    drift = phase_drift_rate(traj, params)
    limit = DILATION_PHASE_FRACTION * 2.0 * np.pi * params.f0
    if drift > limit:
        logger.warning(
            "coherence phases drift at %.1f rad/s (limit %.1f); increase duration above %.3g s",
            drift, limit, params.duration * drift / limit,
        )

    pairs = audible_pairs(traj, params.amplitude_floor)
    n_pairs = traj.dim * (traj.dim - 1) // 2
    if pairs[0].size < n_pairs:
        logger.debug("%d of %d coherences never reach the amplitude floor", n_pairs - pairs[0].size, n_pairs)

    n = params.n_samples
    bounds: List[Tuple[int, int]] = [(s, min(s + RENDER_BLOCK_SIZE, n)) for s in range(0, n, RENDER_BLOCK_SIZE)]

    def block(bound: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        return _render_block(traj, frequencies, params, pairs, *bound)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pieces = list(pool.map(block, bounds))
    else:
        pieces = [block(bound) for bound in bounds]

    left = np.concatenate([p[0] for p in pieces]) if pieces else np.zeros(0)
    right = np.concatenate([p[1] for p in pieces]) if pieces else np.zeros(0)

    peak = max(float(np.max(np.abs(left), initial=0.0)), float(np.max(np.abs(right), initial=0.0)))
    gain = params.headroom / peak if peak > 0 else 1.0
    logger.info("rendered %d samples, normalization gain %.6g", n, gain)
    left = np.clip(left * gain, -1.0, 1.0)
    right = np.clip(right * gain, -1.0, 1.0)
    return StereoBuffer(params.sample_rate, left, right, gain=gain)


# =============================================================================
# DIAGNOSTICS
# =============================================================================

def offdiagonal_weight(traj: StateTrajectory) -> np.ndarray:
    """sum_{k>l} r_kl for every frame."""
    rows, cols = np.tril_indices(traj.dim, k=-1)
    return np.sum(np.abs(traj.frames[:, rows, cols]), axis=1)


def channel_coherence_metric(buf: StereoBuffer, window: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zero-lag normalized cross-correlation of left and right per window.

    Args:
        buf: Rendered audio
        window: Window length in seconds (>= 10 ms); windows do not overlap

    Returns:
        (window centre times in seconds, correlation in [-1, 1]); identical
        channels give exactly 1.0, two silent channels count as identical
    """
    if window < MIN_COHERENCE_WINDOW:
        raise InvalidParameterError(f"coherence window must be at least {MIN_COHERENCE_WINDOW} s, got {window}")
    size = int(round(window * buf.sample_rate))
    if size < 1 or size > buf.n_samples:
        raise InvalidParameterError(f"coherence window {window} s is longer than the {buf.duration:.3g} s buffer")

    count = buf.n_samples // size
    left = buf.left[: count * size].reshape(count, size)
    right = buf.right[: count * size].reshape(count, size)

    cross = np.einsum("ij,ij->i", left, right)
    energy_l = np.einsum("ij,ij->i", left, left)
    energy_r = np.einsum("ij,ij->i", right, right)
    denom = np.sqrt(energy_l * energy_r)

    silent_l, silent_r = energy_l == 0, energy_r == 0
    safe = np.where(denom > 0, denom, 1.0)
    values = np.where(denom > 0, cross / safe, np.where(silent_l & silent_r, 1.0, 0.0))
    times = (np.arange(count) + 0.5) * size / buf.sample_rate
    return times, np.clip(values, -1.0, 1.0)
