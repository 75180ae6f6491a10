#!/usr/bin/env python3
"""
CSV Export Module - Run Directory Artifacts
Writes the tables and metadata sidecars of a run into its output directory

Required imports by main.py:
- get_run_dir
- generate_spectrum_report
- generate_density_report
- generate_observables_report
- generate_coherence_report
- write_metadata
- write_config_echo

Features:
- Fixed, documented column order with a header row
- Floats printed with 17 significant digits so every value round-trips
- Existing files are only replaced when overwrite is set
"""

import csv
import json
import logging
import os
from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np

from config import (
    COHERENCE_CSV_NAME,
    CONFIG_ECHO_NAME,
    CSV_DELIMITER,
    CSV_ENCODING,
    CSV_FLOAT_FORMAT,
    DENSITIES_CSV_NAME,
    OBSERVABLES_CSV_NAME,
    SPECTRUM_CSV_NAME,
)
from core.operators import EnergyBasis
from exceptions import OutputError

logger = logging.getLogger(__name__)


# =============================================================================
# DIRECTORY FUNCTIONS (Required by main.py)
# =============================================================================

def get_run_dir(directory: str) -> str:
    """
    Gets the run output directory and ensures it exists.

    Args:
        directory: Output directory from the config or --out

    Returns:
        Path to the directory (created if it doesn't exist)
    """
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"could not create output directory {directory}: {exc}") from exc
    return directory


def check_writable(filepath: str, overwrite: bool) -> None:
    if os.path.exists(filepath) and not overwrite:
        raise OutputError(f"{filepath} already exists (pass --overwrite to replace it)")


# =============================================================================
# UTILITY FUNCTIONS
# =============================================================================

def format_value(value: Any) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return CSV_FLOAT_FORMAT.format(float(value))
    return str(value)


def write_table(filepath: str, columns: Mapping[str, Sequence[Any]], overwrite: bool = False) -> str:
    """
    Write equal-length columns as a CSV with a header row.

    Args:
        filepath: Destination
        columns: Ordered mapping header -> values
        overwrite: Replace an existing file

    Returns:
        filepath
    """
    check_writable(filepath, overwrite)
    headers = list(columns)
    lengths = {len(columns[h]) for h in headers}
    if len(lengths) > 1:
        raise OutputError(f"{os.path.basename(filepath)}: columns have different lengths {sorted(lengths)}")
    n_rows = lengths.pop() if lengths else 0

    try:
        with open(filepath, 'w', newline='', encoding=CSV_ENCODING) as f:
            writer = csv.writer(f, delimiter=CSV_DELIMITER, lineterminator='\n')
            writer.writerow(headers)
            for i in range(n_rows):
                writer.writerow([format_value(columns[h][i]) for h in headers])
    except OSError as exc:
        raise OutputError(f"could not write {filepath}: {exc}") from exc

    logger.debug("wrote %s (%d rows)", filepath, n_rows)
    return filepath


def read_table(filepath: str) -> Dict[str, np.ndarray]:
    """Read a numeric CSV written by write_table; empty cells become NaN."""
    try:
        with open(filepath, newline='', encoding=CSV_ENCODING) as f:
            rows = list(csv.reader(f, delimiter=CSV_DELIMITER))
    except OSError as exc:
        raise OutputError(f"could not read {filepath}: {exc}") from exc
    headers, body = rows[0], rows[1:]
    return {
        h: np.array([float(row[i]) if row[i] else np.nan for row in body])
        for i, h in enumerate(headers)
    }


# =============================================================================
# REPORT GENERATORS
# =============================================================================

def generate_spectrum_report(
    energies: Sequence[float],
    frequencies: Optional[Sequence[float]],
    output_dir: str,
    overwrite: bool = False,
) -> str:
    """index, energy, frequency_hz (blank when no frequency map applies)."""
    energies = np.asarray(energies, dtype=float)
    freq_column = list(frequencies) if frequencies is not None else [None] * len(energies)
    freq_column += [None] * (len(energies) - len(freq_column))
    columns = {
        "index": list(range(len(energies))),
        "energy": energies,
        "frequency_hz": freq_column,
    }
    return write_table(os.path.join(output_dir, SPECTRUM_CSV_NAME), columns, overwrite)


def generate_density_report(
    positions: np.ndarray,
    potential: np.ndarray,
    grid_basis: EnergyBasis,
    output_dir: str,
    overwrite: bool = False,
) -> str:
    """
    Probability densities of the kept eigenstates on the grid.

    Columns: x, potential, rho_0 .. rho_{r-1}, plus_01, minus_01, where the
    last two are |psi_0 +- psi_1|^2 / 2. Densities integrate to 1 over x.
    """
    positions = np.asarray(positions, dtype=float)
    spacing = float(positions[1] - positions[0])
    vectors = grid_basis.kept_vectors

    columns: Dict[str, Any] = {"x": positions, "potential": np.asarray(potential, dtype=float)}
    for n in range(grid_basis.rank):
        columns[f"rho_{n}"] = np.abs(vectors[:, n]) ** 2 / spacing
    columns["plus_01"] = np.abs(vectors[:, 0] + vectors[:, 1]) ** 2 / (2.0 * spacing)
    columns["minus_01"] = np.abs(vectors[:, 0] - vectors[:, 1]) ** 2 / (2.0 * spacing)
    return write_table(os.path.join(output_dir, DENSITIES_CSV_NAME), columns, overwrite)


def generate_observables_report(table: Mapping[str, np.ndarray], output_dir: str, overwrite: bool = False) -> str:
    return write_table(os.path.join(output_dir, OBSERVABLES_CSV_NAME), table, overwrite)


def generate_coherence_report(
    times: np.ndarray,
    values: np.ndarray,
    output_dir: str,
    overwrite: bool = False,
) -> str:
    columns = {"time_s": np.asarray(times, dtype=float), "coherence": np.asarray(values, dtype=float)}
    return write_table(os.path.join(output_dir, COHERENCE_CSV_NAME), columns, overwrite)


# =============================================================================
# METADATA
# =============================================================================

def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def write_metadata(filepath: str, data: Mapping[str, Any], overwrite: bool = False) -> str:
    """JSON sidecar, keys sorted."""
    check_writable(filepath, overwrite)
    try:
        with open(filepath, 'w', encoding=CSV_ENCODING) as f:
            json.dump(_jsonable(dict(data)), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise OutputError(f"could not write {filepath}: {exc}") from exc
    return filepath


def write_config_echo(text: str, output_dir: str, overwrite: bool = False) -> str:
    """
    Write the parsed-config echo.

    An existing echo with identical content is left alone, so evolve and
    render can share an output directory.
    """
    filepath = os.path.join(output_dir, CONFIG_ECHO_NAME)
    if os.path.exists(filepath) and not overwrite:
        with open(filepath, encoding=CSV_ENCODING) as f:
            if f.read() == text:
                return filepath
        raise OutputError(f"{filepath} holds a different config (pass --overwrite to replace it)")
    try:
        with open(filepath, 'w', encoding=CSV_ENCODING) as f:
            f.write(text)
    except OSError as exc:
        raise OutputError(f"could not write {filepath}: {exc}") from exc
    return filepath
