"""Exact-diagonalization oracle: basis, Hamiltonian and observables."""

import numpy as np
import pytest

from hubent import ed, entropy
from hubent.chains import ChainSpec, Superlattice, build_potential
from hubent.errors import CapacityError, InvalidSpecError

DIMER = ChainSpec(2, 1, 1, 0.0)


def free_fermion_energy(length, n_orb, potential=None):
    """Independent oracle: doubled sum of lowest open-chain orbital energies."""
    h = np.diag(np.zeros(length) if potential is None else potential)
    h -= np.diag(np.ones(length - 1), 1) + np.diag(np.ones(length - 1), -1)
    evals = np.linalg.eigvalsh(h)
    return 2.0 * evals[:n_orb].sum()


def test_basis_enumeration():
    basis = ed.FockBasis.build(4, 2, 1)
    assert basis.dim_up == 6 and basis.dim_down == 4
    assert basis.dimension == 24
    assert list(basis.up_masks) == sorted(basis.up_masks)
    assert all(bin(m).count("1") == 2 for m in basis.up_masks)


def test_basis_index_round_trip():
    basis = ed.FockBasis.build(5, 2, 2)
    for idx in range(basis.dimension):
        up, down = basis.state_of_index(idx)
        assert basis.state_index(up, down) == idx


def test_dimer_ground_state_u0():
    gs = ed.ground_state(DIMER, method="dense")
    assert gs.energy == pytest.approx(-2.0, abs=1e-12)
    basis = ed.basis_for(DIMER)
    p = ed.site_probabilities(gs, basis, 0)
    assert p.as_array() == pytest.approx([0.25, 0.25, 0.25, 0.25], abs=1e-12)
    assert entropy.von_neumann(p) == pytest.approx(1.0, abs=1e-12)


def test_dimer_ground_state_u4():
    spec = ChainSpec(2, 1, 1, 4.0)
    gs = ed.ground_state(spec, method="dense")
    assert gs.energy == pytest.approx((4.0 - np.sqrt(32.0)) / 2.0, abs=1e-12)


def test_dimer_mott_limit():
    spec = ChainSpec(2, 1, 1, 100.0)
    gs = ed.ground_state(spec, method="dense")
    p = ed.site_probabilities(gs, ed.basis_for(spec), 0)
    assert p.double < 0.01
    assert entropy.von_neumann(p) == pytest.approx(0.5, abs=0.02)


def test_hermiticity():
    spec = ChainSpec(5, 2, 2, 3.0, np.array([0.5, -1.0, 0.0, 2.0, -0.3]))
    basis = ed.basis_for(spec)
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = rng.normal(size=basis.dimension)
        v = rng.normal(size=basis.dimension)
        lhs = u @ ed.apply_hamiltonian(spec, v)
        rhs = ed.apply_hamiltonian(spec, u) @ v
        assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, abs(lhs)))


def test_diagonal_action_on_doubly_occupied_state():
    pot = np.array([0.7, -0.4, 1.3])
    spec = ChainSpec(3, 1, 1, 5.0, pot)
    basis = ed.basis_for(spec)
    for site in range(3):
        idx = basis.state_index(1 << site, 1 << site)
        v = np.zeros(basis.dimension)
        v[idx] = 1.0
        hv = ed.apply_hamiltonian(spec, v)
        assert hv[idx] == pytest.approx(5.0 + 2.0 * pot[site], abs=1e-13)


def test_apply_hamiltonian_dimension_mismatch():
    with pytest.raises(InvalidSpecError):
        ed.apply_hamiltonian(DIMER, np.zeros(3))


def test_free_fermion_energies():
    spec = ChainSpec(4, 2, 2, 0.0)
    gs = ed.ground_state(spec, method="dense")
    expected = 2.0 * (-2.0 * np.cos(np.pi / 5.0) - 2.0 * np.cos(2 * np.pi / 5.0))
    assert gs.energy == pytest.approx(expected, abs=1e-12)
    assert gs.energy == pytest.approx(free_fermion_energy(4, 2), abs=1e-12)
    spec = ChainSpec(8, 3, 3, 0.0)
    gs = ed.ground_state(spec)
    assert gs.energy == pytest.approx(free_fermion_energy(8, 3), abs=1e-9)


def test_lanczos_matches_dense():
    pot = build_potential(Superlattice(2, 2, 1.5), 6)
    for spec in (ChainSpec(6, 2, 2, 3.0, pot), ChainSpec(6, 3, 3, 6.0)):
        dense = ed.ground_state(spec, method="dense")
        lanczos = ed.ground_state(spec, method="lanczos")
        assert lanczos.energy == pytest.approx(dense.energy, abs=1e-10)
        basis = ed.basis_for(spec)
        for site in range(spec.length):
            pd = ed.site_probabilities(dense, basis, site).as_array()
            pl = ed.site_probabilities(lanczos, basis, site).as_array()
            assert pl == pytest.approx(pd, abs=1e-8)


def test_ground_state_normalized_and_variational():
    spec = ChainSpec(6, 2, 2, 2.0)
    gs = ed.ground_state(spec)
    assert np.sum(gs.amplitudes**2) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(9)
    for _ in range(5):
        v = rng.normal(size=len(gs.amplitudes))
        v /= np.linalg.norm(v)
        assert gs.energy <= v @ ed.apply_hamiltonian(spec, v) + 1e-12


def test_energy_nondecreasing_in_u():
    energies = [ed.ground_state(ChainSpec(6, 2, 2, u)).energy
                for u in (0.0, 1.0, 2.0, 4.0, 8.0)]
    assert all(a <= b + 1e-12 for a, b in zip(energies, energies[1:]))


def test_mirror_symmetry_clean_chain():
    spec = ChainSpec(6, 2, 2, 4.0)
    basis = ed.basis_for(spec)
    gs = ed.ground_state(spec)
    for site in range(3):
        a = ed.site_probabilities(gs, basis, site).as_array()
        b = ed.site_probabilities(gs, basis, spec.length - 1 - site).as_array()
        assert a == pytest.approx(b, abs=1e-10)


def test_density_profile_sums_to_particle_number():
    spec = ChainSpec(6, 2, 2, 4.0, np.array([1.0, 0, -0.5, 0, 0, 0.2]))
    gs = ed.ground_state(spec)
    profile = ed.density_profile(gs, ed.basis_for(spec))
    assert profile.sum() == pytest.approx(4.0, abs=1e-10)
    assert np.all((profile >= 0) & (profile <= 2))


def test_half_filled_dimer_density():
    gs = ed.ground_state(DIMER, method="dense")
    profile = ed.density_profile(gs, ed.basis_for(DIMER))
    assert profile == pytest.approx([1.0, 1.0], abs=1e-12)


def test_repulsive_superlattice_depletes_impurity_sites():
    pot = build_potential(Superlattice(2, 7, 2.0), 9)
    spec = ChainSpec(9, 3, 3, 4.0, pot)
    gs = ed.ground_state(spec)
    profile = ed.density_profile(gs, ed.basis_for(spec))
    assert profile[:2].mean() < profile[2:].mean()


def test_capacity_errors():
    with pytest.raises(CapacityError) as err:
        ed.ground_state(ChainSpec(16, 8, 8, 1.0), cap=1000)
    assert err.value.dimension == 12870**2
    with pytest.raises(CapacityError):
        ed.dense_hamiltonian(ChainSpec(10, 4, 4, 1.0))


def test_spectral_gap_positive():
    assert ed.spectral_gap(ChainSpec(6, 2, 2, 4.0)) > 1e-8
