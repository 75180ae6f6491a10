import logging

import numpy as np
import pytest

import sonify.binaural as binaural
from core.operators import EnergyBasis, hermitian_eig, maximally_mixed, pure_density, state_vector
from engine import StateTrajectory
from exceptions import (
    AliasingError,
    DimensionError,
    FrameSpacingError,
    HermiticityError,
    InvalidParameterError,
)
from models import XXZConfig, XXZParams, prepare_system
from models.xxz_chain import product_state
from sonify import (
    SonificationParams,
    StereoBuffer,
    channel_coherence_metric,
    energy_shift,
    map_frequencies,
    offdiagonal_weight,
    render_binaural,
    time_dilation,
    to_energy_basis,
)


def _basis(energies):
    energies = np.asarray(energies, dtype=float)
    return EnergyBasis(energies, np.eye(len(energies)), len(energies))


def _static(rho, n_frames=2, span=1.0):
    rho = np.asarray(rho, dtype=complex)
    return StateTrajectory(np.linspace(0.0, span, n_frames), np.tile(rho, (n_frames, 1, 1)))


def _peak_bins(signal, sample_rate, count=2):
    spectrum = np.abs(np.fft.rfft(signal))
    freqs = np.fft.rfftfreq(len(signal), 1.0 / sample_rate)
    top = np.argsort(spectrum)[::-1][:count]
    return freqs[top], spectrum[top]


class TestFrequencyMap:
    def test_proportional_pitches(self):
        fmap = map_frequencies(_basis([1.0, 2.0, 3.0]), SonificationParams())
        np.testing.assert_allclose(list(fmap), [220.0, 440.0, 660.0])
        assert fmap.shift == 0.0

    def test_ground_at_f0(self):
        fmap = map_frequencies(_basis([0.5, 1.0]), SonificationParams(f0=110.0))
        assert fmap[0] == pytest.approx(110.0)
        assert fmap[1] - fmap[0] == pytest.approx(110.0)

    def test_negative_ground_shift(self, shallow_system):
        fmap = map_frequencies(shallow_system.energy_basis, SonificationParams())
        assert fmap[0] == pytest.approx(220.0)
        assert fmap[1] / fmap[0] == pytest.approx(2.0, rel=1e-12)
        assert np.all(np.diff(fmap.frequencies) >= 0)

    def test_degenerate_ground_uses_first_gap(self):
        assert energy_shift([-1.0, -1.0, 0.0]) == pytest.approx(2.0)
        fmap = map_frequencies(_basis([-1.0, -1.0, 0.0]), SonificationParams())
        np.testing.assert_allclose(list(fmap), [220.0, 220.0, 440.0])

    def test_fully_degenerate_spectrum(self):
        fmap = map_frequencies(_basis([0.0, 0.0]), SonificationParams())
        np.testing.assert_allclose(list(fmap), [220.0, 220.0])

    def test_aliasing_guard(self):
        with pytest.raises(AliasingError):
            map_frequencies(_basis([1.0, 200.0]), SonificationParams())

    def test_needs_two_levels(self):
        with pytest.raises(InvalidParameterError):
            map_frequencies(EnergyBasis([1.0, 2.0], np.eye(2), 1), SonificationParams())

    def test_metadata(self):
        data = map_frequencies(_basis([1.0, 3.0]), SonificationParams()).as_dict()
        assert data["frequencies_hz"] == [220.0, 660.0]
        assert data["energy_shift"] == 0.0


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        {"f0": 0.0},
        {"duration": -1.0},
        {"headroom": 1.5},
        {"amplitude_floor": -1e-3},
        {"coherence_window": 0.005},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidParameterError):
            SonificationParams(**kwargs)

    def test_f0_above_guard(self):
        with pytest.raises(AliasingError):
            SonificationParams(f0=22000.0)

    def test_buffer_rejects_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            StereoBuffer(44100, [0.0, 1.5], [0.0, 0.0])
        with pytest.raises(DimensionError):
            StereoBuffer(44100, [0.0, 0.5], [0.0])


class TestEnergyBasis:
    H = np.array([[1.0, 0.4, 0.0], [0.4, 2.0, 0.3j], [0.0, -0.3j, 3.5]])

    def test_eigenstate_is_population(self):
        basis = hermitian_eig(self.H)
        traj = _static(pure_density(basis.vectors[:, 0]))
        frame = to_energy_basis(traj, basis).frames[0]
        assert frame[0, 0].real == pytest.approx(1.0)
        assert abs(frame[1, 1]) < 1e-12

    def test_maximally_mixed_is_unchanged(self):
        basis = hermitian_eig(self.H)
        frame = to_energy_basis(_static(maximally_mixed(3)), basis).frames[0]
        np.testing.assert_allclose(frame, np.eye(3) / 3, atol=1e-12)

    def test_superposition_phase(self):
        basis = hermitian_eig(self.H)
        psi = (basis.vectors[:, 0] + 1j * basis.vectors[:, 1]) / np.sqrt(2)
        frame = to_energy_basis(_static(pure_density(psi)), basis).frames[0]
        assert abs(frame[1, 0]) == pytest.approx(0.5)
        assert np.angle(frame[1, 0]) == pytest.approx(np.pi / 2)

    def test_truncated_basis(self):
        basis = hermitian_eig(self.H).truncated(2)
        assert to_energy_basis(_static(maximally_mixed(3)), basis).dim == 2

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            to_energy_basis(_static(maximally_mixed(2)), hermitian_eig(self.H))

    def test_non_hermitian_frames(self):
        frames = np.tile(np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex), (2, 1, 1))
        with pytest.raises(HermiticityError):
            to_energy_basis(StateTrajectory([0.0, 1.0], frames), _basis([1.0, 2.0]))


class TestRender:
    def test_single_tone_at_headroom(self):
        params = SonificationParams(duration=1.0)
        buf = render_binaural(_static(np.diag([1.0, 0.0]), n_frames=1), [220.0, 440.0], params)
        np.testing.assert_array_equal(buf.left, buf.right)
        assert np.max(np.abs(buf.left)) == pytest.approx(params.headroom)
        tau = np.arange(params.n_samples) / params.sample_rate
        reference = np.sin(2 * np.pi * 220.0 * tau)
        assert np.corrcoef(buf.left, reference)[0, 1] > 0.999999

    def test_diagonal_trajectory_is_mono(self):
        frames = np.array([np.diag([1.0 - p, p]) for p in np.linspace(0.0, 0.7, 11)], dtype=complex)
        traj = StateTrajectory(np.linspace(0.0, 10.0, 11), frames)
        buf = render_binaural(traj, [220.0, 330.0], SonificationParams(duration=0.5))
        np.testing.assert_array_equal(buf.left, buf.right)

    def test_coherence_pitches_split_between_ears(self):
        params = SonificationParams(duration=2.0)
        rho = pure_density(state_vector([1, 1]))
        buf = render_binaural(_static(rho), [220.0, 330.0], params)

        left_freqs, left_mags = _peak_bins(buf.left, params.sample_rate)
        right_freqs, right_mags = _peak_bins(buf.right, params.sample_rate)
        bin_width = params.sample_rate / params.n_samples
        for found in (left_freqs, right_freqs):
            assert sorted(found) == pytest.approx([220.0, 330.0], abs=bin_width)
        # ket pitch (level 1) is louder on the left, bra pitch (level 0) on the right
        assert left_freqs[0] == pytest.approx(330.0, abs=bin_width)
        assert right_freqs[0] == pytest.approx(220.0, abs=bin_width)
        assert left_mags[0] > 1.5 * left_mags[1]

    def test_quiet_coherences_fall_back_to_mono(self):
        rho = np.array([[0.5, 1e-6], [1e-6, 0.5]], dtype=complex)
        buf = render_binaural(_static(rho), [220.0, 330.0], SonificationParams(duration=0.2))
        np.testing.assert_array_equal(buf.left, buf.right)

    def test_peak_never_exceeds_headroom(self):
        params = SonificationParams(duration=0.5, headroom=1.0)
        rho = pure_density(state_vector([1, 1j, 1]))
        buf = render_binaural(_static(rho), [220.0, 275.0, 330.0], params)
        assert max(np.max(np.abs(buf.left)), np.max(np.abs(buf.right))) <= 1.0

    def test_output_independent_of_blocks_and_workers(self, monkeypatch):
        params = SonificationParams(duration=1.0)
        rho0 = pure_density(state_vector([1, 1]))
        rho1 = pure_density(state_vector([1, -1j]))
        traj = StateTrajectory([0.0, 1.0], np.stack([rho0, rho1]))
        reference = render_binaural(traj, [220.0, 330.0], params)
        threaded = render_binaural(traj, [220.0, 330.0], params, workers=3)
        monkeypatch.setattr(binaural, "RENDER_BLOCK_SIZE", 1000)
        small_blocks = render_binaural(traj, [220.0, 330.0], params, workers=2)
        for other in (threaded, small_blocks):
            np.testing.assert_array_equal(reference.left, other.left)
            np.testing.assert_array_equal(reference.right, other.right)

    def test_non_uniform_frames(self):
        traj = StateTrajectory([0.0, 1.0, 3.0], np.tile(np.eye(2) / 2, (3, 1, 1)))
        with pytest.raises(FrameSpacingError):
            render_binaural(traj, [220.0, 330.0], SonificationParams(duration=0.1))

    def test_frequency_count(self):
        with pytest.raises(DimensionError):
            render_binaural(_static(np.eye(2) / 2), [220.0], SonificationParams(duration=0.1))

    def test_fast_phase_warns(self, caplog):
        omega = 100.0
        times = np.linspace(0.0, 0.1, 11)
        frames = np.array([pure_density(state_vector([1, np.exp(-1j * omega * t)])) for t in times])
        traj = StateTrajectory(times, frames)
        with caplog.at_level(logging.WARNING, logger="sonify.binaural"):
            render_binaural(traj, [220.0, 330.0], SonificationParams(duration=0.01))
        assert any("drift" in record.getMessage() for record in caplog.records)

    def test_time_dilation(self):
        traj = _static(np.eye(2) / 2, n_frames=5, span=100.0)
        assert time_dilation(traj, SonificationParams(duration=10.0)) == pytest.approx(10.0)

    def test_silent_pairs_are_skipped(self):
        quiet = np.array([[0.5, 1e-6], [1e-6, 0.5]], dtype=complex)
        rows, _ = binaural.audible_pairs(_static(quiet), 1e-4)
        assert rows.size == 0

        loud = pure_density(state_vector([1, 1]))
        traj = StateTrajectory([0.0, 1.0], np.stack([quiet, loud]))
        rows, cols = binaural.audible_pairs(traj, 1e-4)
        np.testing.assert_array_equal(rows, [1])
        np.testing.assert_array_equal(cols, [0])

    def test_six_site_chain_renders_in_pair_chunks(self, monkeypatch):
        system = prepare_system(XXZConfig(XXZParams(n_sites=6)))
        psi = product_state([(np.pi / 2, 0.3 * j) for j in range(6)])
        traj = to_energy_basis(
            StateTrajectory([0.0, 1.0], np.stack([pure_density(psi)] * 2)), system.energy_basis
        )
        params = SonificationParams(duration=0.05)
        freqs = map_frequencies(system.energy_basis, params)
        assert binaural.audible_pairs(traj, params.amplitude_floor)[0].size > binaural.RENDER_PAIR_CHUNK

        reference = render_binaural(traj, freqs, params)
        assert reference.n_samples == 2205
        peak = max(np.max(np.abs(reference.left)), np.max(np.abs(reference.right)))
        assert peak == pytest.approx(params.headroom)
        assert not np.array_equal(reference.left, reference.right)

        monkeypatch.setattr(binaural, "RENDER_PAIR_CHUNK", 7)
        monkeypatch.setattr(binaural, "RENDER_BLOCK_SIZE", 500)
        chunked = render_binaural(traj, freqs, params, workers=2)
        np.testing.assert_allclose(chunked.left, reference.left, atol=1e-12)
        np.testing.assert_allclose(chunked.right, reference.right, atol=1e-12)


class TestCoherenceMetric:
    def _buffer(self, left, right, sample_rate=1000):
        return StereoBuffer(sample_rate, left, right)

    def test_identical_channels(self):
        signal = 0.5 * np.sin(np.linspace(0.0, 60.0, 1000))
        times, values = channel_coherence_metric(self._buffer(signal, signal), 0.05)
        assert len(times) == 20
        assert np.all(values == 1.0)

    def test_inverted_channels(self):
        signal = 0.5 * np.sin(np.linspace(0.0, 60.0, 1000))
        _, values = channel_coherence_metric(self._buffer(signal, -signal), 0.05)
        np.testing.assert_allclose(values, -1.0)

    def test_silence_counts_as_identical(self):
        _, values = channel_coherence_metric(self._buffer(np.zeros(100), np.zeros(100)), 0.02)
        np.testing.assert_array_equal(values, 1.0)

    def test_window_bounds(self):
        buf = self._buffer(np.zeros(100), np.zeros(100))
        with pytest.raises(InvalidParameterError):
            channel_coherence_metric(buf, 0.005)
        with pytest.raises(InvalidParameterError):
            channel_coherence_metric(buf, 0.5)


def test_offdiagonal_weight():
    rho = pure_density(state_vector([1, 1]))
    traj = StateTrajectory([0.0, 1.0], np.stack([rho, np.eye(2) / 2]))
    np.testing.assert_allclose(offdiagonal_weight(traj), [0.5, 0.0])
