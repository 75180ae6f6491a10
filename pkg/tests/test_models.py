import numpy as np
import pytest

from core.operators import hermitian_eig, require_hermitian, state_vector
from exceptions import DimensionError, InvalidParameterError, ModelTooLargeError
from models import DoubleWellConfig, DoubleWellParams, GridSpec, QubitDampingConfig, XXZConfig, XXZParams, prepare_system
from models.base import LindbladModel, truncate_to_eigenbasis
from models.double_well import build_double_well, build_position_operators, potential
from models.xxz_chain import (
    boundary_jump,
    build_xxz_chain,
    product_state,
    total_magnetization,
    xxz_hamiltonian,
)

HELIX = XXZParams(n_sites=4, J=1.0, delta=1.0, alpha_l=0.5, beta_l=1.0, alpha_r=0.5, beta_r=1.0, r=1.0, phi=0.0)


class TestGrid:
    def test_symmetric_unit_spacing(self):
        grid = GridSpec(n_points=16, x_max=7.5)
        assert grid.spacing == pytest.approx(1.0)
        np.testing.assert_allclose(grid.positions, np.arange(-7.5, 8.0, 1.0))
        np.testing.assert_array_equal(grid.positions, -grid.positions[::-1])

    def test_too_few_points(self):
        with pytest.raises(InvalidParameterError):
            GridSpec(n_points=8)

    def test_position_and_momentum(self):
        grid = GridSpec(n_points=16, x_max=7.5)
        X, P = build_position_operators(grid)
        np.testing.assert_allclose(np.diag(X).real, grid.positions)
        require_hermitian(P)
        assert np.all(P.real == 0)

    def test_well_geometry(self):
        params = DoubleWellParams(c4=0.05, c2=0.35)
        assert params.barrier_height == pytest.approx(0.6125)
        assert params.minimum_position == pytest.approx(np.sqrt(3.5))
        assert potential([params.minimum_position], params)[0] == pytest.approx(-0.6125)


class TestDoubleWell:
    def test_closed_well_has_no_jumps(self):
        model = build_double_well(GridSpec(n_points=32), DoubleWellParams(gamma=0.0))
        assert model.jumps == ()

    def test_bath_adds_one_jump(self):
        model = build_double_well(GridSpec(n_points=32), DoubleWellParams(gamma=0.05, kT=0.5))
        assert len(model.jumps) == 1
        require_hermitian(model.h_eff)

    def test_bath_needs_temperature(self):
        with pytest.raises(InvalidParameterError):
            build_double_well(GridSpec(n_points=32), DoubleWellParams(gamma=0.05, kT=0.0))

    def test_harmonic_ladder_is_evenly_spaced(self):
        model = build_double_well(GridSpec(n_points=256, x_max=6.0), DoubleWellParams(c4=0.0, c2=-0.5))
        energies = hermitian_eig(model.h_eff).energies[:6]
        gaps = np.diff(energies)
        assert energies[0] == pytest.approx(0.5, abs=1e-2)
        np.testing.assert_allclose(gaps, gaps[0], rtol=0.02)

    def test_shallow_doublet(self, shallow_system):
        energies = shallow_system.energy_basis.kept_energies
        assert energies[0] == pytest.approx(-0.19196, abs=2e-3)
        assert energies[1] - energies[0] == pytest.approx(0.1927, rel=0.01)
        assert 2 * np.pi / (energies[1] - energies[0]) == pytest.approx(32.6, rel=0.01)

    def test_deep_doublet_is_well_separated(self, deep_system):
        E = deep_system.energy_basis.kept_energies
        assert (E[1] - E[0]) / (E[2] - E[1]) < 0.2

    def test_doublet_parity(self, shallow_system):
        vectors = shallow_system.grid_basis.kept_vectors
        np.testing.assert_allclose(vectors[:, 0], vectors[::-1, 0], atol=1e-8)
        np.testing.assert_allclose(vectors[:, 1], -vectors[::-1, 1], atol=1e-8)

    def test_doublet_combinations_localize(self, shallow_system):
        X = shallow_system.observables["X"]
        x_min = DoubleWellParams().minimum_position
        positions = []
        for sign in (1.0, -1.0):
            psi = state_vector(np.eye(16)[0] + sign * np.eye(16)[1])
            positions.append(np.vdot(psi, X @ psi).real)
        assert np.sign(positions[0]) == -np.sign(positions[1])
        assert min(abs(p) for p in positions) > 0.5 * x_min

    def test_default_grid_is_converged(self, shallow_system):
        E = shallow_system.energy_basis.kept_energies
        fine = prepare_system(DoubleWellConfig(grid=GridSpec(n_points=512))).energy_basis.kept_energies
        assert fine[1] - fine[0] == pytest.approx(E[1] - E[0], rel=0.01)

    def test_ground_state_survives_truncation(self):
        model = build_double_well(GridSpec(n_points=64), DoubleWellParams())
        basis = hermitian_eig(model.h_eff)
        ground = basis.vectors[:, 0]
        U = basis.vectors[:, :4]
        projected = U.conj().T @ np.outer(ground, ground.conj()) @ U
        assert np.trace(projected).real == pytest.approx(1.0, abs=1e-10)
        truncated = truncate_to_eigenbasis(model, basis, 4)
        np.testing.assert_allclose(np.diag(truncated.h_eff).real, basis.energies[:4], atol=1e-8)


class TestPreparedWell:
    def test_closed_model_is_diagonal(self, shallow_system):
        E = shallow_system.energy_basis.kept_energies
        np.testing.assert_allclose(shallow_system.model.h_eff, np.diag(E), atol=1e-12)
        assert shallow_system.dim == 16

    def test_position_couples_the_doublet(self, shallow_system):
        X = shallow_system.observables["X"]
        assert abs(X[0, 0]) < 1e-8
        assert abs(X[0, 1]) > 1.0

    def test_energy_basis_is_identity(self, shallow_system):
        np.testing.assert_array_equal(shallow_system.energy_basis.vectors, np.eye(16))

    def test_thermal_model_is_truncated(self):
        system = prepare_system(DoubleWellConfig(params=DoubleWellParams(gamma=0.05, kT=0.5), rank=6))
        assert system.model.dim == 6
        assert system.model.jumps[0].shape == (6, 6)

    def test_rank_limits(self):
        with pytest.raises(InvalidParameterError):
            DoubleWellConfig(rank=1)
        with pytest.raises(InvalidParameterError):
            DoubleWellConfig(grid=GridSpec(n_points=16), rank=17)

    def test_truncation_rank_checks(self):
        model = LindbladModel(h_eff=np.diag([0.0, 1.0, 2.0]))
        basis = hermitian_eig(model.h_eff)
        with pytest.raises(InvalidParameterError):
            truncate_to_eigenbasis(model, basis, 1)
        with pytest.raises(InvalidParameterError):
            truncate_to_eigenbasis(model, basis, 4)
        with pytest.raises(DimensionError):
            truncate_to_eigenbasis(model, hermitian_eig(np.eye(2)), 2)


class TestXXZ:
    def test_two_site_spectrum(self):
        energies = hermitian_eig(xxz_hamiltonian(XXZParams(n_sites=2))).energies
        np.testing.assert_allclose(energies, [-4.0, 0.0, 0.0, 0.0], atol=1e-12)

    def test_closed_chain_conserves_magnetization(self):
        params = XXZParams(n_sites=4, delta=0.6)
        Sz = total_magnetization(4)
        H = xxz_hamiltonian(params)
        assert np.max(np.abs(H @ Sz - Sz @ H)) <= 1e-10

    def test_chain_size_limits(self):
        with pytest.raises(ModelTooLargeError):
            XXZParams(n_sites=9)
        with pytest.raises(InvalidParameterError):
            XXZParams(n_sites=1)

    def test_helix_spinor_is_dark(self):
        spinor = np.array([1.5, -1.0])
        psi = state_vector(np.kron(np.kron(spinor, spinor), np.kron(spinor, spinor)))
        model = build_xxz_chain(HELIX)
        for jump in model.jumps:
            np.testing.assert_allclose(jump @ psi, 0.0, atol=1e-12)
        np.testing.assert_allclose(model.h_eff @ psi, 0.0, atol=1e-12)

    def test_boundary_jump_single_site(self):
        L = boundary_jump(2, 0, 0.5, 1.0, 1.0, 0.0)
        single = np.array([[0.0, 0.0], [1.0, 1.5]])
        np.testing.assert_allclose(L, np.kron(single, np.eye(2)), atol=1e-12)

    def test_product_state_phase(self):
        psi = product_state([(np.pi / 2, 0.7)])
        assert np.angle(np.conj(psi[0]) * psi[1]) == pytest.approx(0.7)
        assert np.linalg.norm(psi) == pytest.approx(1.0)

    def test_prepared_chain(self):
        system = prepare_system(XXZConfig(HELIX))
        assert system.dim == 16
        assert system.n_sites == 4
        assert {"sx_0", "sy_3", "sz_2", "H"} <= set(system.observables)
        assert len(system.model.jumps) == 2


def test_prepared_qubit():
    system = prepare_system(QubitDampingConfig(gamma=2.0))
    np.testing.assert_allclose(system.model.jumps[0], np.sqrt(2.0) * np.array([[0, 0], [1, 0]]))
    np.testing.assert_array_equal(system.energy_basis.energies, [0.0, 0.0])
