import numpy as np
import pytest

from qembed import continuum as ct
from qembed.errors import DomainError
from qembed.quantum_core import bloch_vector, random_density_matrix


def test_direction_spin_signs():
    assert ct.direction_spin([1, 0], 0.1) == 1
    assert ct.direction_spin([1, 0], np.pi - 0.1) == -1


def test_clock_expectation_is_cosine():
    st = ct.ClockState(0.3)
    for psi in np.linspace(-np.pi, np.pi, 9):
        assert ct.clock_expectation(st, psi) == pytest.approx(np.cos(psi - 0.3), abs=1e-12)


def test_clock_evolution_matches_unitary():
    st = ct.ClockState(0.2, omega=1.5)
    u = ct.clock_unitary(0.8, 1.5)
    np.testing.assert_allclose(
        u @ st.density_matrix() @ u.conj().T, ct.clock_evolve(st, 0.8).density_matrix(), atol=1e-14
    )


@pytest.mark.parametrize("profile", ct.RADIAL_PROFILES)
def test_sphere_law_quadrature(profile, rng):
    rho = rng.standard_normal(3)
    e = rng.standard_normal(3)
    rho /= np.linalg.norm(rho)
    e /= np.linalg.norm(e)
    est = ct.sphere_expectation(ct.SphereState(tuple(rho), profile), e)
    assert est.value == pytest.approx(rho @ e, abs=1e-10)


def test_sphere_state_requires_unit_vector():
    with pytest.raises(DomainError):
        ct.SphereState((1.0, 1.0, 0.0))


def test_rotation_matches_unitary(rng):
    st = ct.SphereState((0.0, 0.6, 0.8))
    res = ct.rotate_update(st, np.array([1, 1, 0]) / np.sqrt(2), 0.9)
    assert res.unitary_mismatch < 1e-14


def test_integrator_matches_rotation():
    rho0 = ct.SphereState((0.0, 0.0, 1.0)).density_matrix()
    omega, t = 2.0, 0.75
    out = ct.schrodinger_integrate(rho0, omega, [1, 0, 0], t, dt=1e-3)
    expected = ct.rotation_matrix([1, 0, 0], omega * t) @ np.array([0, 0, 1.0])
    np.testing.assert_allclose(bloch_vector(out), expected, atol=1e-10)


def test_cpt_check_time_dependent(rng):
    rho0 = random_density_matrix(rng, 2)
    err = ct.cpt_check(rho0, lambda t: 1 + 0.5 * np.sin(t), lambda t: [np.cos(t), np.sin(t), 0.0], 1.5, dt=1e-3)
    assert err < 1e-9


def test_fermion_mode():
    np.testing.assert_allclose(ct.canonical_anticommutator(), np.eye(2))
    # the first basis state is the occupied one
    assert ct.fermion_observables(np.diag([1.0, 0.0]))["n"] == pytest.approx(1.0)
    assert ct.fermion_observables(np.diag([0.0, 1.0]))["n"] == pytest.approx(0.0)
