"""
End-to-end checks on the shipped scenarios.

Long integrations are marked slow; run them with `pytest -m slow`.
"""

import itertools

import numpy as np
import pytest

from core.operators import density_invariants, purity
from core.run_config import build_initial_state, load_config
from engine import integrate_lindblad, observables_series, phase_increments, steady_state, transverse_moments
from models import XXZParams, prepare_system
from models.xxz_chain import build_xxz_chain
from scenarios import scenario_path
from sonify import (
    channel_coherence_metric,
    map_frequencies,
    offdiagonal_weight,
    render_binaural,
    to_energy_basis,
)


def _evolve(name):
    cfg = load_config(scenario_path(name))
    system = prepare_system(cfg.model)
    _, rho0 = build_initial_state(system, cfg.initial_state)
    return cfg, system, integrate_lindblad(system.model, rho0, cfg.dynamics.grid)


def _upward_crossings(times, values, level):
    shifted = values - level
    idx = np.flatnonzero((shifted[:-1] < 0) & (shifted[1:] >= 0))
    frac = -shifted[idx] / (shifted[idx + 1] - shifted[idx])
    return times[idx] + frac * (times[idx + 1] - times[idx])


@pytest.mark.slow
@pytest.mark.parametrize("name", ["double_well_shallow", "double_well_deep", "double_well_thermal", "xxz_helix"])
def test_frames_stay_physical(name):
    _, _, traj = _evolve(name)
    for frame in traj.frames:
        residue, trace_error, min_eig = density_invariants(frame)
        assert residue <= 1e-10
        assert trace_error <= 1e-8
        assert min_eig >= -1e-8


def test_amplitude_damping_scenario():
    cfg, system, traj = _evolve("qubit_damping")
    table = observables_series(traj, system.observables)
    np.testing.assert_allclose(table["p_up"], np.exp(-table["time"]), rtol=1e-6)


@pytest.mark.slow
def test_tunnelling_period_matches_doublet_gap():
    _, system, traj = _evolve("double_well_shallow")
    E = system.energy_basis.kept_energies
    expected = 2 * np.pi / (E[1] - E[0])

    x = observables_series(traj, system.observables)["X"]
    crossings = _upward_crossings(traj.times, x, 0.0)
    assert len(crossings) >= 2
    assert np.mean(np.diff(crossings)) == pytest.approx(expected, rel=0.01)


@pytest.mark.slow
def test_tunnelling_is_heard_as_channel_beat():
    cfg, system, traj = _evolve("double_well_shallow")
    params = cfg.sonification
    energy_traj = to_energy_basis(traj, system.energy_basis)
    buf = render_binaural(energy_traj, map_frequencies(system.energy_basis, params), params)
    times, coherence = channel_coherence_metric(buf, params.coherence_window)

    E = system.energy_basis.kept_energies
    dilation = (traj.times[-1] - traj.times[0]) / params.duration
    expected = 2 * np.pi / (E[1] - E[0]) / dilation

    level = 0.5 * (np.max(coherence) + np.min(coherence))
    crossings = _upward_crossings(times, coherence, level)
    assert len(crossings) >= 2
    assert np.mean(np.diff(crossings)) == pytest.approx(expected, rel=0.05)


@pytest.mark.slow
def test_thermalisation_collapses_stereo_to_mono():
    cfg, system, traj = _evolve("double_well_thermal")
    energy_traj = to_energy_basis(traj, system.energy_basis)
    weight = offdiagonal_weight(energy_traj)
    n = len(weight) // 5
    assert np.mean(weight[-n:]) < np.mean(weight[:n])

    params = cfg.sonification
    buf = render_binaural(energy_traj, map_frequencies(system.energy_basis, params), params)
    _, coherence = channel_coherence_metric(buf, params.coherence_window)
    m = len(coherence) // 5
    assert np.mean(coherence[-m:]) > np.mean(coherence[:m])


@pytest.mark.slow
def test_helix_purifies_into_uniform_product_state():
    _, system, traj = _evolve("xxz_helix")
    table = observables_series(traj, system.observables, system.n_sites)
    assert table["purity"][-1] >= 0.9

    increments = phase_increments(transverse_moments(traj.frames[-1], system.n_sites)[0])
    np.testing.assert_allclose(increments, increments[0], atol=0.1)


def _helix_steady_state(r, phi, delta):
    params = XXZParams(n_sites=4, delta=delta, alpha_l=0.5, beta_l=1.0, alpha_r=0.5, beta_r=1.0, r=r, phi=phi)
    rho = steady_state(build_xxz_chain(params))
    moments = transverse_moments(rho, 4)[0]
    return purity(rho), moments, phase_increments(moments)


def test_shipped_helix_is_the_pure_steady_state():
    cfg = load_config(scenario_path("xxz_helix"))
    p = cfg.model.params
    rho = steady_state(build_xxz_chain(p))
    assert purity(rho) >= 0.9
    increments = phase_increments(transverse_moments(rho, p.n_sites)[0])
    np.testing.assert_allclose(increments, 0.0, atol=0.1)


@pytest.mark.slow
def test_boundary_scan_finds_no_twisted_pure_helix():
    twisted = []
    for r, phi, delta in itertools.product((0.5, 1.0, 2.0), (0.0, np.pi / 4, np.pi / 2, np.pi), (0.5, 1.0, 1.5)):
        p, moments, increments = _helix_steady_state(r, phi, delta)
        if p >= 0.9 and np.all(np.abs(moments) > 0.1) and np.max(np.abs(increments)) > 0.1:
            twisted.append((r, phi, delta))
    assert twisted == []
