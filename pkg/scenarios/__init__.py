"""
Shipped scenario configs.

    - double_well_shallow: coherent tunnelling in the shallow well
    - double_well_deep: long tunnelling period, well-separated doublet
    - double_well_thermal: shallow well in a heat bath (decoherence to mono)
    - xxz_helix: boundary-driven chain purifying from the maximally mixed state
    - qubit_damping: amplitude-damping oracle
"""

import difflib
import json
from pathlib import Path
from typing import Dict, List

from exceptions import ConfigError

SCENARIO_DIR = Path(__file__).resolve().parent


def list_scenarios() -> List[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))


def scenario_path(name: str) -> Path:
    path = SCENARIO_DIR / f"{name}.json"
    if not path.exists():
        message = f"unknown scenario '{name}'"
        close = difflib.get_close_matches(name, list_scenarios(), n=1)
        if close:
            message += f" (did you mean '{close[0]}'?)"
        raise ConfigError(message)
    return path


def scenario_descriptions() -> Dict[str, str]:
    out = {}
    for name in list_scenarios():
        with open(scenario_path(name), encoding="utf-8") as f:
            out[name] = json.load(f).get("description", "")
    return out


def resolve_config_path(value: str) -> Path:
    """A config path, or the name of a shipped scenario."""
    path = Path(value).expanduser()
    if path.exists() or path.suffix == ".json" or "/" in value:
        return path
    return scenario_path(value)
