"""
================================================================================
MAIN.PY - Quantum Sonification CLI Entry Point
================================================================================
Command-line interface for simulating open quantum systems and rendering
their density matrices as binaural audio.

Usage:
    python main.py <verb> --config <path|scenario> [options]

Examples:
    # Energy levels and grid densities of the shallow double well
    python main.py spectrum --config double_well_shallow

    # Integrate the master equation and store the trajectory
    python main.py evolve --config scenarios/double_well_thermal.json

    # Render audio (evolves first when no stored trajectory matches)
    python main.py render --config xxz_helix --out runs/helix --overwrite

    # Re-run a stochastic ensemble with another seed
    python main.py evolve --config my_sse_run.json --seed 7

    # List the shipped scenarios
    python main.py list-scenarios

Outputs are saved to the config's outputs.directory (or --out):
    config.json, spectrum.csv, densities.csv, observables.csv,
    trajectory.qtrj, run_metadata.json, render.wav, render_metadata.json,
    channel_coherence.csv

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 I/O failure.
================================================================================
"""

import argparse
import logging
import os
import sys
import time
from typing import Callable, Dict, Optional

import numpy as np

from config import (
    AUDIO_METADATA_NAME,
    AUDIO_NAME,
    CONFIG_ECHO_NAME,
    CSV_ENCODING,
    DILATION_PHASE_FRACTION,
    ENSEMBLE_BATCH_SIZE,
    RUN_METADATA_NAME,
    STATUS_OK,
    STATUS_WARNING,
    TRAJECTORY_STORE_NAME,
)
from core.run_config import RunConfig, build_initial_state, echo_json, load_config
from engine import (
    StateTrajectory,
    integrate_lindblad,
    observables_series,
    phase_increments,
    run_ensemble,
    transverse_moments,
)
from exceptions import (
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_OUTPUT,
    AliasingError,
    ConfigValidationError,
    OutputError,
    QuantumSonifyError,
)
from models import PreparedSystem, prepare_system
from reports import (
    generate_coherence_report,
    generate_density_report,
    generate_observables_report,
    generate_spectrum_report,
    get_run_dir,
    load_trajectory,
    save_trajectory,
    write_config_echo,
    write_metadata,
)
from scenarios import resolve_config_path, scenario_descriptions
from sonify import (
    SonificationParams,
    channel_coherence_metric,
    map_frequencies,
    phase_drift_rate,
    render_binaural,
    time_dilation,
    to_energy_basis,
    write_wav,
)

logger = logging.getLogger("qsonify")


# ==============================================================================
# HELPER FUNCTIONS
# ==============================================================================

def _printer(quiet: bool) -> Callable[..., None]:
    if quiet:
        return lambda *args, **kwargs: None
    return print


def print_banner(title: str, say: Callable[..., None] = print) -> None:
    say("=" * 60)
    say(title)
    say("=" * 60)


def _require_dynamics(cfg: RunConfig, verb: str) -> None:
    if cfg.dynamics is None:
        raise ConfigValidationError("config.dynamics", f"'{verb}' needs a dynamics block")


def _doublet_summary(energies: np.ndarray) -> Dict[str, float]:
    gap = float(energies[1] - energies[0])
    summary = {"doublet_gap": gap}
    if gap > 0:
        summary["tunnelling_period"] = 2.0 * np.pi / gap
    if len(energies) > 2 and energies[2] > energies[1]:
        summary["doublet_ratio"] = gap / float(energies[2] - energies[1])
    return summary


# ==============================================================================
# COMMANDS
# ==============================================================================

def cmd_spectrum(cfg: RunConfig, quiet: bool = False) -> Dict[str, str]:
    """
    Write the energy spectrum, and grid densities for well models.

    Args:
        cfg: Parsed run config
        quiet: Suppress console output

    Returns:
        Dict mapping artifact name to file path
    """
    say = _printer(quiet)
    system = prepare_system(cfg.model)
    out_dir = get_run_dir(cfg.outputs.directory)
    overwrite = cfg.outputs.overwrite
    files = {"config": write_config_echo(echo_json(cfg), out_dir, overwrite)}

    basis = system.energy_basis
    params = cfg.sonification or SonificationParams()
    try:
        frequencies = list(map_frequencies(basis, params))
    except AliasingError as exc:
        say(f"  {STATUS_WARNING}: no frequency column ({exc})")
        frequencies = None

    files["spectrum"] = generate_spectrum_report(basis.kept_energies, frequencies, out_dir, overwrite)
    say(f"  ✓ Spectrum: {os.path.basename(files['spectrum'])} ({basis.rank} levels)")

    if system.grid_basis is not None:
        files["densities"] = generate_density_report(
            system.positions, system.potential, system.grid_basis, out_dir, overwrite
        )
        say(f"  ✓ Densities: {os.path.basename(files['densities'])}")
        for key, value in _doublet_summary(basis.kept_energies).items():
            say(f"    {key}: {value:.6g}")

    return files


def evolve_system(cfg: RunConfig, system: PreparedSystem) -> StateTrajectory:
    """Run the configured dynamics from the configured initial state."""
    psi, rho0 = build_initial_state(system, cfg.initial_state)
    dynamics = cfg.dynamics
    if dynamics.method == "sse":
        return run_ensemble(system.model, psi, dynamics.grid, dynamics.ensemble, workers=dynamics.workers)
    return integrate_lindblad(system.model, rho0, dynamics.grid, check_convergence=dynamics.check_convergence)


def cmd_evolve(cfg: RunConfig, quiet: bool = False) -> Dict[str, str]:
    """
    Evolve the system; write observables, the trajectory store and run metadata.

    Returns:
        Dict mapping artifact name to file path
    """
    _require_dynamics(cfg, "evolve")
    say = _printer(quiet)
    system = prepare_system(cfg.model)
    out_dir = get_run_dir(cfg.outputs.directory)
    overwrite = cfg.outputs.overwrite
    files = {"config": write_config_echo(echo_json(cfg), out_dir, overwrite)}

    dynamics = cfg.dynamics
    say(f"Evolving {system.model.label} ({dynamics.method}, {dynamics.grid.n_steps} steps)...")
    started = time.perf_counter()
    traj = evolve_system(cfg, system)
    wall_time = time.perf_counter() - started

    table = observables_series(traj, system.observables, system.n_sites)
    files["observables"] = generate_observables_report(table, out_dir, overwrite)
    files["trajectory"] = str(save_trajectory(traj, os.path.join(out_dir, TRAJECTORY_STORE_NAME), overwrite))

    metadata = {
        "model": system.model.label,
        "dim": system.dim,
        "method": dynamics.method,
        "t_start": dynamics.grid.t_start,
        "t_end": dynamics.grid.t_end,
        "step": dynamics.grid.step,
        "n_steps": dynamics.grid.n_steps,
        "frame_stride": dynamics.grid.frame_stride,
        "n_frames": len(traj),
        "initial_state": cfg.initial_state.kind,
        "final_purity": float(table["purity"][-1]),
        "wall_time_s": wall_time,
    }
    if dynamics.ensemble is not None:
        metadata.update({
            "n_traj": dynamics.ensemble.n_traj,
            "base_seed": dynamics.ensemble.base_seed,
            "batch_size": ENSEMBLE_BATCH_SIZE,
            "workers": dynamics.workers,
        })
    if system.n_sites and system.n_sites > 1:
        moments = transverse_moments(traj.frames[-1], system.n_sites)[0]
        metadata["final_transverse_moments"] = [[m.real, m.imag] for m in moments]
        metadata["final_phase_increments"] = phase_increments(moments).tolist()
    files["metadata"] = write_metadata(os.path.join(out_dir, RUN_METADATA_NAME), metadata, overwrite)

    say(f"  ✓ Observables: {os.path.basename(files['observables'])} ({len(traj)} frames)")
    say(f"  ✓ Trajectory store: {os.path.basename(files['trajectory'])}")
    say(f"  ✓ Final purity: {metadata['final_purity']:.6f}  ({wall_time:.1f} s)")
    return files


def _stored_trajectory(cfg: RunConfig, out_dir: str) -> Optional[StateTrajectory]:
    """The stored trajectory, if it was produced by this exact config."""
    store = os.path.join(out_dir, TRAJECTORY_STORE_NAME)
    echo = os.path.join(out_dir, CONFIG_ECHO_NAME)
    if not (os.path.exists(store) and os.path.exists(echo)):
        return None
    with open(echo, encoding=CSV_ENCODING) as f:
        if f.read() != echo_json(cfg):
            return None
    return load_trajectory(store)


def cmd_render(cfg: RunConfig, quiet: bool = False) -> Dict[str, str]:
    """
    Render the trajectory as binaural audio.

    Evolves first unless the output directory holds a trajectory from the
    same config. Frequency mapping runs before anything is written, so an
    aliasing error leaves no partial output.

    Returns:
        Dict mapping artifact name to file path
    """
    _require_dynamics(cfg, "render")
    say = _printer(quiet)
    params = cfg.sonification
    system = prepare_system(cfg.model)
    fmap = map_frequencies(system.energy_basis, params)

    out_dir = get_run_dir(cfg.outputs.directory)
    overwrite = cfg.outputs.overwrite
    wav_path = os.path.join(out_dir, AUDIO_NAME)
    if os.path.exists(wav_path) and not overwrite:
        raise OutputError(f"{wav_path} already exists (pass --overwrite to replace it)")

    files: Dict[str, str] = {}
    traj = _stored_trajectory(cfg, out_dir)
    if traj is None:
        files.update(cmd_evolve(cfg, quiet))
        traj = load_trajectory(files["trajectory"])
    else:
        say(f"  ✓ Reusing {TRAJECTORY_STORE_NAME}")

    energy_traj = to_energy_basis(traj, system.energy_basis)
    drift = phase_drift_rate(energy_traj, params)
    drift_limit = DILATION_PHASE_FRACTION * 2.0 * np.pi * params.f0
    buf = render_binaural(energy_traj, fmap, params)
    times, coherence = channel_coherence_metric(buf, params.coherence_window)

    files["audio"] = str(write_wav(buf, wav_path, overwrite=overwrite))
    files["coherence"] = generate_coherence_report(times, coherence, out_dir, overwrite)
    metadata = {
        **fmap.as_dict(),
        "sample_rate": params.sample_rate,
        "duration": params.duration,
        "n_samples": buf.n_samples,
        "amplitude_floor": params.amplitude_floor,
        "headroom": params.headroom,
        "normalization_gain": buf.gain,
        "time_dilation": time_dilation(energy_traj, params),
        "max_phase_drift_rad_per_s": drift,
        "phase_drift_limit_rad_per_s": drift_limit,
        "dilation_warning": drift > drift_limit,
        "coherence_window": params.coherence_window,
    }
    files["audio_metadata"] = write_metadata(os.path.join(out_dir, AUDIO_METADATA_NAME), metadata, overwrite)

    status = STATUS_WARNING if drift > drift_limit else STATUS_OK
    say(f"  ✓ Audio: {os.path.basename(files['audio'])} ({buf.duration:.2f} s, {len(fmap)} partials)")
    say(f"  ✓ Channel coherence: {os.path.basename(files['coherence'])}")
    say(f"  {status}: phase drift {drift:.1f} rad/s (limit {drift_limit:.1f})")
    return files


def cmd_list_scenarios(quiet: bool = False) -> Dict[str, str]:
    descriptions = scenario_descriptions()
    say = _printer(quiet)
    print_banner("SHIPPED SCENARIOS", say)
    for name, description in descriptions.items():
        say(f"  {name}")
        if description:
            say(f"      {description}")
    return descriptions


COMMANDS = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "render": cmd_render,
}


# ==============================================================================
# MAIN FUNCTION
# ==============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", "-c",
        required=True,
        help="Run config file, or the name of a shipped scenario (see list-scenarios)"
    )
    common.add_argument("--out", "-o", default=None, help="Output directory (overrides outputs.directory)")
    common.add_argument("--overwrite", action="store_true", help="Replace existing output files")
    common.add_argument("--seed", type=int, default=None, help="Override the ensemble base seed (sse runs)")
    common.add_argument("--quiet", "-q", action="store_true", help="Only print warnings and errors")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging and tracebacks")

    parser = argparse.ArgumentParser(
        prog="qsonify",
        description="Quantum Sonification Tool - simulate open quantum systems and hear their density matrices.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  qsonify spectrum --config double_well_shallow
  qsonify evolve --config scenarios/qubit_damping.json --out runs/qubit
  qsonify render --config xxz_helix --overwrite
  qsonify list-scenarios
        """
    )
    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser("spectrum", parents=[common], help="Energy levels, pitches and grid densities")
    verbs.add_parser("evolve", parents=[common], help="Time evolution, observables and trajectory store")
    verbs.add_parser("render", parents=[common], help="Binaural WAV render of the trajectory")
    verbs.add_parser("list-scenarios", help="List the shipped scenario configs")
    return parser


def main(argv=None) -> int:
    """
    Main entry point for the Quantum Sonification Tool.
    Parses command-line arguments and runs the requested verb.
    """
    args = build_parser().parse_args(argv)

    if args.verb == "list-scenarios":
        cmd_list_scenarios()
        return EXIT_OK

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    say = _printer(args.quiet)
    logger.info("%s: config %s", args.verb, args.config)

    try:
        cfg = load_config(resolve_config_path(args.config))
        cfg = cfg.with_overrides(directory=args.out, overwrite=args.overwrite, seed=args.seed)

        print_banner(f"QSONIFY {args.verb.upper()}", say)
        say(f"Config: {args.config}")
        say(f"Output: {cfg.outputs.directory}")
        say()

        files = COMMANDS[args.verb](cfg, quiet=args.quiet)

    except QuantumSonifyError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        logger.info("%s failed, exit code %d", args.verb, exc.exit_code)
        return exc.exit_code
    except OSError as exc:
        print(f"❌ I/O failure: {exc}", file=sys.stderr)
        logger.info("%s failed, exit code %d", args.verb, EXIT_OUTPUT)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_OUTPUT
    except Exception as exc:
        print(f"❌ Unexpected failure: {exc}", file=sys.stderr)
        logger.info("%s failed, exit code %d", args.verb, EXIT_NUMERICAL)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_NUMERICAL

    say()
    print_banner(f"{args.verb.upper()} COMPLETE", say)
    say("📁 Files saved to:")
    for name in sorted(set(files.values())):
        say(f"   {os.path.basename(name)}")
    say(f"\n   Directory: {cfg.outputs.directory}")
    say()
    logger.info("%s finished, exit code %d", args.verb, EXIT_OK)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
