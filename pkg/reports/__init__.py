"""
Run artifacts for the sonification tool.

Supports:
    - CSV: spectrum, grid densities, observables, channel coherence
    - JSON: run and render metadata, config echo
    - Binary: trajectory store shared by evolve and render
"""

from reports.csv_export import (
    generate_coherence_report,
    generate_density_report,
    generate_observables_report,
    generate_spectrum_report,
    get_run_dir,
    read_table,
    write_config_echo,
    write_metadata,
)
from reports.trajectory_store import load_trajectory, save_trajectory

__all__ = [
    "generate_coherence_report",
    "generate_density_report",
    "generate_observables_report",
    "generate_spectrum_report",
    "get_run_dir",
    "load_trajectory",
    "read_table",
    "save_trajectory",
    "write_config_echo",
    "write_metadata",
]
