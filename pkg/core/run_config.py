"""
================================================================================
CORE / RUN_CONFIG.PY - Run Configuration Files
================================================================================
A run is described by one JSON document:

    {
      "model":         {"kind": "double_well", "c4": 0.05, "c2": 0.35, ...},
      "initial_state": {"kind": "symmetric_combo", "levels": [0, 1]},
      "dynamics":      {"method": "lindblad", "t_end": 100.0, "dt": 0.05},
      "sonification":  {"f0": 220.0, "duration": 10.0},
      "outputs":       {"directory": "runs/shallow", "overwrite": false}
    }

Rules:
- Every key is checked; an unknown key is an error that names the nearest
  valid key.
- Missing keys take the documented defaults from config.py, and to_dict()
  writes them all out so the echoed config reproduces the run by itself.
- Complex rates are written as a number or as [re, im].
================================================================================
"""

import difflib
import json
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DEFAULT_AMPLITUDE_FLOOR,
    DEFAULT_BASE_SEED,
    DEFAULT_C2,
    DEFAULT_C4,
    DEFAULT_COHERENCE_WINDOW,
    DEFAULT_DT,
    DEFAULT_DURATION,
    DEFAULT_F0,
    DEFAULT_FRAME_STRIDE,
    DEFAULT_HEADROOM,
    DEFAULT_KT,
    DEFAULT_MASS,
    DEFAULT_N_POINTS,
    DEFAULT_N_TRAJ,
    DEFAULT_RANK,
    DEFAULT_SAMPLE_RATE,
    DEFAULT_X_MAX,
)
from core.operators import Operator, StateVector, maximally_mixed, pure_density, state_vector
from engine import EnsembleSpec, TimeGrid
from exceptions import (
    ConfigError,
    ConfigSyntaxError,
    ConfigValidationError,
    InvalidParameterError,
    ModelTooLargeError,
)
from models import (
    DoubleWellConfig,
    DoubleWellParams,
    GridSpec,
    MODEL_KINDS,
    ModelConfig,
    PreparedSystem,
    QubitDampingConfig,
    XXZConfig,
    XXZParams,
)
from models.xxz_chain import product_state
from sonify.binaural import SonificationParams

_MISSING = object()


# =============================================================================
# CONFIG TYPES
# =============================================================================

INITIAL_STATE_KINDS = ("eigenstate", "symmetric_combo", "product_spins", "custom", "maximally_mixed")
DYNAMICS_METHODS = ("lindblad", "sse")


@dataclass(frozen=True)
class InitialStateConfig:
    kind: str = "eigenstate"
    n: int = 0
    levels: Tuple[int, int] = (0, 1)
    relative_phase: float = 0.0
    angles: Tuple[Tuple[float, float], ...] = ()
    amplitudes: Tuple[complex, ...] = ()

    @property
    def is_pure(self) -> bool:
        return self.kind != "maximally_mixed"


@dataclass(frozen=True)
class DynamicsConfig:
    method: str
    grid: TimeGrid
    ensemble: Optional[EnsembleSpec] = None
    check_convergence: bool = False
    workers: int = 1


@dataclass(frozen=True)
class OutputConfig:
    directory: str
    overwrite: bool = False


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    initial_state: InitialStateConfig = field(default_factory=InitialStateConfig)
    dynamics: Optional[DynamicsConfig] = None
    sonification: Optional[SonificationParams] = None
    outputs: OutputConfig = field(default_factory=lambda: OutputConfig("runs"))
    description: str = ""

    def with_overrides(
        self,
        directory: Optional[str] = None,
        overwrite: Optional[bool] = None,
        seed: Optional[int] = None,
    ) -> "RunConfig":
        """Apply command-line overrides (--out, --overwrite, --seed)."""
        outputs = self.outputs
        if directory is not None:
            outputs = replace(outputs, directory=str(directory))
        if overwrite:
            outputs = replace(outputs, overwrite=True)
        dynamics = self.dynamics
        if seed is not None and dynamics is not None and dynamics.ensemble is not None:
            with _field_errors("--seed"):
                dynamics = replace(dynamics, ensemble=replace(dynamics.ensemble, base_seed=int(seed)))
        return replace(self, outputs=outputs, dynamics=dynamics)


# =============================================================================
# FIELD READING
# =============================================================================

@contextmanager
def _field_errors(path: str):
    """Report constructor validation failures against a config path."""
    try:
        yield
    except ModelTooLargeError:
        raise
    except InvalidParameterError as exc:
        raise ConfigValidationError(path, str(exc)) from exc


def _nearest(key: str, allowed: Sequence[str]) -> Optional[str]:
    matches = difflib.get_close_matches(key, list(allowed), n=1, cutoff=0.5)
    return matches[0] if matches else None


class _Section:
    """One JSON object of the config, read key by key against a fixed key set."""

    def __init__(self, data: Any, path: str, allowed: Sequence[str]):
        if not isinstance(data, dict):
            raise ConfigValidationError(path, f"expected an object, got {type(data).__name__}")
        for key in data:
            if key not in allowed:
                raise ConfigValidationError(f"{path}.{key}", "unknown key", _nearest(key, allowed))
        self.data = data
        self.path = path

    def _raw(self, key: str, default: Any) -> Any:
        if key in self.data:
            return self.data[key]
        if default is _MISSING:
            raise ConfigValidationError(f"{self.path}.{key}", "required key is missing")
        return default

    def number(self, key: str, default: Any = _MISSING) -> float:
        value = self._raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigValidationError(f"{self.path}.{key}", f"expected a number, got {value!r}")
        return float(value)

    def integer(self, key: str, default: Any = _MISSING) -> int:
        value = self._raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigValidationError(f"{self.path}.{key}", f"expected an integer, got {value!r}")
        return value

    def boolean(self, key: str, default: Any = _MISSING) -> bool:
        value = self._raw(key, default)
        if not isinstance(value, bool):
            raise ConfigValidationError(f"{self.path}.{key}", f"expected true or false, got {value!r}")
        return value

    def string(self, key: str, default: Any = _MISSING, choices: Sequence[str] = ()) -> str:
        value = self._raw(key, default)
        if not isinstance(value, str):
            raise ConfigValidationError(f"{self.path}.{key}", f"expected a string, got {value!r}")
        if choices and value not in choices:
            raise ConfigValidationError(
                f"{self.path}.{key}",
                f"'{value}' is not one of {', '.join(choices)}",
                _nearest(value, choices),
            )
        return value

    def complex_number(self, key: str, default: Any = _MISSING) -> complex:
        return _decode_complex(self._raw(key, default), f"{self.path}.{key}")

    def array(self, key: str, default: Any = _MISSING) -> List[Any]:
        value = self._raw(key, default)
        if not isinstance(value, list):
            raise ConfigValidationError(f"{self.path}.{key}", f"expected a list, got {value!r}")
        return value


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _decode_complex(value: Any, path: str) -> complex:
    if _is_number(value):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value):
        return complex(value[0], value[1])
    raise ConfigValidationError(path, f"expected a number or [re, im], got {value!r}")


def _encode_complex(value: complex) -> Any:
    value = complex(value)
    if value.imag == 0:
        return value.real
    return [value.real, value.imag]


# =============================================================================
# SECTION PARSERS
# =============================================================================

DOUBLE_WELL_KEYS = ("kind", "c4", "c2", "gamma", "kT", "mass", "n_points", "x_max", "rank")
XXZ_KEYS = ("kind", "n_sites", "J", "delta", "alpha_l", "beta_l", "alpha_r", "beta_r", "r", "phi")
QUBIT_KEYS = ("kind", "gamma")
MODEL_KEYS = {"double_well": DOUBLE_WELL_KEYS, "xxz": XXZ_KEYS, "qubit_damping": QUBIT_KEYS}

INITIAL_STATE_KEYS = {
    "eigenstate": ("kind", "n"),
    "symmetric_combo": ("kind", "levels", "relative_phase"),
    "product_spins": ("kind", "angles"),
    "custom": ("kind", "amplitudes"),
    "maximally_mixed": ("kind",),
}

_GRID_KEYS = ("method", "t_start", "t_end", "dt", "frame_stride")
DYNAMICS_KEYS = {
    "lindblad": _GRID_KEYS + ("check_convergence",),
    "sse": _GRID_KEYS + ("n_traj", "base_seed", "workers"),
}

SONIFICATION_KEYS = ("f0", "sample_rate", "duration", "amplitude_floor", "headroom", "coherence_window")
OUTPUT_KEYS = ("directory", "overwrite")
TOP_LEVEL_KEYS = ("description", "model", "initial_state", "dynamics", "sonification", "outputs")


def _kind_of(data: Any, path: str, key: str, choices: Sequence[str], default: Any = _MISSING) -> str:
    if not isinstance(data, dict):
        raise ConfigValidationError(path, f"expected an object, got {type(data).__name__}")
    return _Section({key: data[key]} if key in data else {}, path, (key,)).string(key, default, choices)


def _parse_model(data: Any) -> ModelConfig:
    kind = _kind_of(data, "model", "kind", tuple(MODEL_KINDS))
    section = _Section(data, "model", MODEL_KEYS[kind])

    if kind == "double_well":
        mass = section.number("mass", DEFAULT_MASS)
        with _field_errors("model"):
            params = DoubleWellParams(
                c4=section.number("c4", DEFAULT_C4),
                c2=section.number("c2", DEFAULT_C2),
                gamma=section.number("gamma", 0.0),
                kT=section.number("kT", DEFAULT_KT),
                mass=mass,
            )
            grid = GridSpec(
                n_points=section.integer("n_points", DEFAULT_N_POINTS),
                x_max=section.number("x_max", DEFAULT_X_MAX),
                mass=mass,
            )
            if params.gamma > 0 and not params.kT > 0:
                raise InvalidParameterError(f"kT must be positive when gamma > 0, got {params.kT}")
            return DoubleWellConfig(params=params, grid=grid, rank=section.integer("rank", DEFAULT_RANK))

    if kind == "xxz":
        defaults = XXZParams()
        with _field_errors("model"):
            return XXZConfig(
                XXZParams(
                    n_sites=section.integer("n_sites", defaults.n_sites),
                    J=section.number("J", defaults.J),
                    delta=section.number("delta", defaults.delta),
                    alpha_l=section.complex_number("alpha_l", defaults.alpha_l),
                    beta_l=section.complex_number("beta_l", defaults.beta_l),
                    alpha_r=section.complex_number("alpha_r", defaults.alpha_r),
                    beta_r=section.complex_number("beta_r", defaults.beta_r),
                    r=section.number("r", defaults.r),
                    phi=section.number("phi", defaults.phi),
                )
            )

    with _field_errors("model"):
        return QubitDampingConfig(gamma=section.number("gamma", QubitDampingConfig().gamma))


def _level(value: Any, path: str, dim: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(path, f"expected an integer level, got {value!r}")
    if not 0 <= value < dim:
        raise ConfigValidationError(path, f"level {value} outside 0..{dim - 1}")
    return value


def _parse_initial_state(data: Any, model: ModelConfig) -> InitialStateConfig:
    if data is None:
        return InitialStateConfig()
    kind = _kind_of(data, "initial_state", "kind", INITIAL_STATE_KINDS)
    section = _Section(data, "initial_state", INITIAL_STATE_KEYS[kind])
    dim = model.dim

    if kind == "eigenstate":
        return InitialStateConfig(kind=kind, n=_level(section.integer("n", 0), "initial_state.n", dim))

    if kind == "symmetric_combo":
        levels = section.array("levels", [0, 1])
        if len(levels) != 2:
            raise ConfigValidationError("initial_state.levels", "expected exactly two levels")
        n1 = _level(levels[0], "initial_state.levels[0]", dim)
        n2 = _level(levels[1], "initial_state.levels[1]", dim)
        if n1 == n2:
            raise ConfigValidationError("initial_state.levels", "the two levels must differ")
        return InitialStateConfig(
            kind=kind, levels=(n1, n2), relative_phase=section.number("relative_phase", 0.0)
        )

    if kind == "product_spins":
        if model.n_sites is None:
            raise ConfigValidationError("initial_state.kind", f"product_spins needs a spin model, not {model.kind}")
        angles = section.array("angles")
        if len(angles) != model.n_sites:
            raise ConfigValidationError(
                "initial_state.angles", f"expected {model.n_sites} (theta, phi) pairs, got {len(angles)}"
            )
        pairs = []
        for j, pair in enumerate(angles):
            if not (isinstance(pair, list) and len(pair) == 2 and all(_is_number(v) for v in pair)):
                raise ConfigValidationError(f"initial_state.angles[{j}]", f"expected [theta, phi], got {pair!r}")
            pairs.append((float(pair[0]), float(pair[1])))
        return InitialStateConfig(kind=kind, angles=tuple(pairs))

    if kind == "custom":
        raw = section.array("amplitudes")
        if len(raw) != dim:
            raise ConfigValidationError("initial_state.amplitudes", f"expected {dim} amplitudes, got {len(raw)}")
        amplitudes = tuple(_decode_complex(v, f"initial_state.amplitudes[{j}]") for j, v in enumerate(raw))
        if not any(abs(a) > 0 for a in amplitudes):
            raise ConfigValidationError("initial_state.amplitudes", "amplitudes are all zero")
        return InitialStateConfig(kind=kind, amplitudes=amplitudes)

    return InitialStateConfig(kind=kind)


def _parse_dynamics(data: Any) -> DynamicsConfig:
    method = _kind_of(data, "dynamics", "method", DYNAMICS_METHODS, "lindblad")
    section = _Section(data, "dynamics", DYNAMICS_KEYS[method])

    with _field_errors("dynamics"):
        grid = TimeGrid(
            t_end=section.number("t_end"),
            dt=section.number("dt", DEFAULT_DT),
            frame_stride=section.integer("frame_stride", DEFAULT_FRAME_STRIDE),
            t_start=section.number("t_start", 0.0),
        )
        if method == "lindblad":
            return DynamicsConfig(
                method=method, grid=grid, check_convergence=section.boolean("check_convergence", False)
            )
        workers = section.integer("workers", 1)
        if workers < 1:
            raise InvalidParameterError(f"workers must be at least 1, got {workers}")
        ensemble = EnsembleSpec(
            n_traj=section.integer("n_traj", DEFAULT_N_TRAJ),
            base_seed=section.integer("base_seed", DEFAULT_BASE_SEED),
        )
        return DynamicsConfig(method=method, grid=grid, ensemble=ensemble, workers=workers)


def _parse_sonification(data: Any) -> SonificationParams:
    section = _Section({} if data is None else data, "sonification", SONIFICATION_KEYS)
    with _field_errors("sonification"):
        return SonificationParams(
            f0=section.number("f0", DEFAULT_F0),
            sample_rate=section.integer("sample_rate", DEFAULT_SAMPLE_RATE),
            duration=section.number("duration", DEFAULT_DURATION),
            amplitude_floor=section.number("amplitude_floor", DEFAULT_AMPLITUDE_FLOOR),
            headroom=section.number("headroom", DEFAULT_HEADROOM),
            coherence_window=section.number("coherence_window", DEFAULT_COHERENCE_WINDOW),
        )


def _parse_outputs(data: Any, model: ModelConfig) -> OutputConfig:
    section = _Section({} if data is None else data, "outputs", OUTPUT_KEYS)
    return OutputConfig(
        directory=section.string("directory", f"runs/{model.kind}"),
        overwrite=section.boolean("overwrite", False),
    )


# =============================================================================
# PUBLIC API
# =============================================================================

def parse_config(text: str) -> RunConfig:
    """
    Parse and validate a JSON run configuration.

    Args:
        text: JSON document

    Returns:
        Fully validated RunConfig with every default filled in

    Raises:
        ConfigSyntaxError: Invalid JSON (with line and column)
        ConfigValidationError: Unknown key, wrong type or invalid value
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(exc.msg, exc.lineno, exc.colno) from exc

    top = _Section(data, "config", TOP_LEVEL_KEYS)
    if "model" not in top.data:
        raise ConfigValidationError("config.model", "required key is missing")

    model = _parse_model(top.data["model"])
    initial_state = _parse_initial_state(top.data.get("initial_state"), model)

    dynamics = None
    if "dynamics" in top.data:
        dynamics = _parse_dynamics(top.data["dynamics"])
        if dynamics.method == "sse" and not initial_state.is_pure:
            raise ConfigValidationError("initial_state.kind", "sse dynamics needs a pure initial state")

    if "sonification" in top.data and dynamics is None:
        raise ConfigValidationError("config.sonification", "sonification needs a dynamics block")
    sonification = _parse_sonification(top.data.get("sonification")) if dynamics is not None else None

    return RunConfig(
        model=model,
        initial_state=initial_state,
        dynamics=dynamics,
        sonification=sonification,
        outputs=_parse_outputs(top.data.get("outputs"), model),
        description=top.string("description", ""),
    )


def load_config(path) -> RunConfig:
    """Read and parse a config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except OSError as exc:
        raise ConfigError(f"could not read config {path}: {exc}") from exc
    return parse_config(text)


def _model_dict(model: ModelConfig) -> Dict[str, Any]:
    if isinstance(model, DoubleWellConfig):
        p, g = model.params, model.grid
        return {
            "kind": model.kind, "c4": p.c4, "c2": p.c2, "gamma": p.gamma, "kT": p.kT, "mass": p.mass,
            "n_points": g.n_points, "x_max": g.x_max, "rank": model.rank,
        }
    if isinstance(model, XXZConfig):
        p = model.params
        return {
            "kind": model.kind, "n_sites": p.n_sites, "J": p.J, "delta": p.delta,
            "alpha_l": _encode_complex(p.alpha_l), "beta_l": _encode_complex(p.beta_l),
            "alpha_r": _encode_complex(p.alpha_r), "beta_r": _encode_complex(p.beta_r),
            "r": p.r, "phi": p.phi,
        }
    return {"kind": model.kind, "gamma": model.gamma}


def _initial_state_dict(state: InitialStateConfig) -> Dict[str, Any]:
    if state.kind == "eigenstate":
        return {"kind": state.kind, "n": state.n}
    if state.kind == "symmetric_combo":
        return {"kind": state.kind, "levels": list(state.levels), "relative_phase": state.relative_phase}
    if state.kind == "product_spins":
        return {"kind": state.kind, "angles": [list(pair) for pair in state.angles]}
    if state.kind == "custom":
        return {"kind": state.kind, "amplitudes": [_encode_complex(a) for a in state.amplitudes]}
    return {"kind": state.kind}


def _dynamics_dict(dynamics: DynamicsConfig) -> Dict[str, Any]:
    grid = dynamics.grid
    out: Dict[str, Any] = {
        "method": dynamics.method,
        "t_start": grid.t_start,
        "t_end": grid.t_end,
        "dt": grid.dt,
        "frame_stride": grid.frame_stride,
    }
    if dynamics.method == "lindblad":
        out["check_convergence"] = dynamics.check_convergence
    else:
        out["n_traj"] = dynamics.ensemble.n_traj
        out["base_seed"] = dynamics.ensemble.base_seed
        out["workers"] = dynamics.workers
    return out


def to_dict(cfg: RunConfig) -> Dict[str, Any]:
    """Plain-JSON form of a config with every default written out."""
    out: Dict[str, Any] = {}
    if cfg.description:
        out["description"] = cfg.description
    out.update({
        "model": _model_dict(cfg.model),
        "initial_state": _initial_state_dict(cfg.initial_state),
    })
    if cfg.dynamics is not None:
        out["dynamics"] = _dynamics_dict(cfg.dynamics)
    if cfg.sonification is not None:
        s = cfg.sonification
        out["sonification"] = {
            "f0": s.f0, "sample_rate": s.sample_rate, "duration": s.duration,
            "amplitude_floor": s.amplitude_floor, "headroom": s.headroom,
            "coherence_window": s.coherence_window,
        }
    out["outputs"] = {"directory": cfg.outputs.directory, "overwrite": cfg.outputs.overwrite}
    return out


def echo_json(cfg: RunConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2) + "\n"


# =============================================================================
# INITIAL STATES
# =============================================================================

def build_initial_state(system: PreparedSystem, state: InitialStateConfig) -> Tuple[Optional[StateVector], Operator]:
    """
    Initial state in model coordinates.

    Returns:
        (psi, rho): psi is None for the maximally mixed state
    """
    vectors = system.energy_basis.vectors
    if state.kind == "eigenstate":
        psi = state_vector(vectors[:, state.n])
    elif state.kind == "symmetric_combo":
        n1, n2 = state.levels
        psi = state_vector(vectors[:, n1] + np.exp(1j * state.relative_phase) * vectors[:, n2])
    elif state.kind == "product_spins":
        psi = state_vector(product_state(state.angles))
    elif state.kind == "custom":
        psi = state_vector(state.amplitudes)
    else:
        return None, maximally_mixed(system.dim)

    if psi.shape[0] != system.dim:
        raise ConfigValidationError("initial_state", f"state has dimension {psi.shape[0]}, model has {system.dim}")
    return psi, pure_density(psi)
