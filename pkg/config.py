"""
================================================================================
CONFIG.PY - Shared Configuration & Constants
================================================================================
Central configuration file for the sonification tool. All tolerances,
defaults, limits and output settings live here to ensure consistency across
the operator kernels, model builders, integrators and the renderer.

Modify these values to customize the tool's behavior without touching
the core logic in other files.
================================================================================
"""

# =============================================================================
# NUMERICAL TOLERANCES
# =============================================================================

# Max-norm of (A - A†) accepted as "Hermitian"
HERMITIAN_TOL = 1e-10

# |Tr(rho) - 1| accepted for a density matrix
TRACE_TOL = 1e-8

# Smallest eigenvalue accepted for a stored density matrix
POSITIVITY_TOL = -1e-8

# Integrator aborts below this smallest eigenvalue (dt too large / model bug)
POSITIVITY_ABORT = -1e-6

# Eigensolver contract: unitarity and reconstruction
EIG_TOL = 1e-8

# Trace renormalization kicks in above this drift after an integrator step
RENORMALIZE_TOL = 1e-12

# State vectors are renormalized to unit norm; below this the SSE step aborts
NORM_COLLAPSE_TOL = 1e-8

# Step-halving self-check for the deterministic integrator
CONVERGENCE_TOL = 1e-6

# Eigenvalues closer than this (relative to the spectrum scale) are degenerate
DEGENERACY_TOL = 1e-10

# Phase is defined as 0 below this coherence magnitude
PHASE_FLOOR = 1e-12

# =============================================================================
# MODEL LIMITS & DEFAULTS
# =============================================================================

# Largest dense operator dimension (kron refuses to build beyond it)
MAX_DENSE_DIM = 4096

# XXZ chain cap: dim = 2**n_sites
MAX_CHAIN_SITES = 8

# Simulation units: hbar = 1, m = 1, k_B folded into kT
HBAR = 1.0
DEFAULT_MASS = 1.0

# Finite-difference grid for the double well
DEFAULT_N_POINTS = 256
DEFAULT_X_MAX = 6.0
MIN_N_POINTS = 16

# Double well of the thermalisation figure: V = c4 x^4 - c2 x^2
DEFAULT_C4 = 0.05
DEFAULT_C2 = 0.35
DEFAULT_KT = 0.5

# Eigenbasis truncation rank for well models
DEFAULT_RANK = 16
MIN_RANK = 2

# =============================================================================
# DYNAMICS DEFAULTS
# =============================================================================

DEFAULT_DT = 0.01
DEFAULT_FRAME_STRIDE = 10

# Relative slack before a span that is not a whole number of dt steps gets an extra step
STEP_COUNT_TOL = 1e-9
DEFAULT_N_TRAJ = 500
DEFAULT_BASE_SEED = 20240601

# Trajectories per vectorized ensemble batch
ENSEMBLE_BATCH_SIZE = 256

# Steps of noise drawn per trajectory generator call
NOISE_BLOCK_STEPS = 1024

# =============================================================================
# SONIFICATION DEFAULTS
# =============================================================================

DEFAULT_F0 = 220.0
DEFAULT_SAMPLE_RATE = 44100
DEFAULT_DURATION = 10.0
DEFAULT_AMPLITUDE_FLOOR = 1e-4
DEFAULT_HEADROOM = 0.89

# Highest mapped partial must stay this far below Nyquist
ALIAS_GUARD_HZ = 1000.0

# Residual phase drift must stay below this fraction of 2*pi*f0 (rad/s)
DILATION_PHASE_FRACTION = 0.2

# Samples rendered per block
RENDER_BLOCK_SIZE = 32768

# Coherence pairs synthesized together; caps a block at
# RENDER_BLOCK_SIZE x RENDER_PAIR_CHUNK complex temporaries
RENDER_PAIR_CHUNK = 128

# Channel-coherence window used by the render command
DEFAULT_COHERENCE_WINDOW = 0.05
MIN_COHERENCE_WINDOW = 0.01

# 16-bit PCM full scale (symmetric clip policy: -1.0 -> -32767)
PCM_FULL_SCALE = 32767

# =============================================================================
# OUTPUT SETTINGS
# =============================================================================

# CSV export settings
CSV_ENCODING = "utf-8"
CSV_DELIMITER = ","

# 17 significant digits round-trip any float64
CSV_FLOAT_FORMAT = "{:.17g}"

# Artifact file names inside the output directory
CONFIG_ECHO_NAME = "config.json"
SPECTRUM_CSV_NAME = "spectrum.csv"
DENSITIES_CSV_NAME = "densities.csv"
OBSERVABLES_CSV_NAME = "observables.csv"
TRAJECTORY_STORE_NAME = "trajectory.qtrj"
RUN_METADATA_NAME = "run_metadata.json"
AUDIO_NAME = "render.wav"
AUDIO_METADATA_NAME = "render_metadata.json"
COHERENCE_CSV_NAME = "channel_coherence.csv"

# =============================================================================
# TRAJECTORY STORE LAYOUT
# =============================================================================
# magic (8 bytes) | version u16 | dim u32 | n_frames u32 |
# times n_frames x f64 | frames n_frames x dim x dim x (re f64, im f64)
# All little-endian; frames row-major.

TRAJECTORY_MAGIC = b"QSONTRJ\x00"
TRAJECTORY_VERSION = 1

# =============================================================================
# STATUS LABELS
# =============================================================================

STATUS_OK = "✅ OK"
STATUS_WARNING = "⚠️ Warning"
STATUS_FAILED = "❌ Failed"
