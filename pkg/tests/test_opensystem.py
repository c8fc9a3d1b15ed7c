import numpy as np
import pytest

from qembed import opensystem as osys
from qembed.quantum_core import PAULI, random_density_matrix


def test_evolution_operator_is_unitary():
    u = osys.evolution_operator(0.7, 1.3)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-14)


def test_purity_follows_cos4():
    rho0 = osys.product_state()
    for t in np.linspace(0, np.pi, 13):
        rb = osys.subsystem(osys.full_evolution(rho0, t))
        assert osys.purity(rb) == pytest.approx(np.cos(t) ** 4, abs=1e-12)


def test_generator_matches_finite_difference(rng):
    rho4 = random_density_matrix(rng, 4)
    h = 1e-5
    fwd = osys.subsystem(osys.full_evolution(rho4, h))
    bwd = osys.subsystem(osys.full_evolution(rho4, -h))
    fd = (fwd - bwd) / (2 * h)
    gen = osys.subsystem_generator(rho4)
    np.testing.assert_allclose(gen.rate(osys.subsystem(rho4)), fd, atol=1e-8)


def test_generator_with_extra_subsystem_term(rng):
    rho4 = random_density_matrix(rng, 4)
    extra = 0.4 * PAULI[1]
    h = 1e-5
    fwd = osys.subsystem(osys.full_evolution(rho4, h, extra_h=extra))
    bwd = osys.subsystem(osys.full_evolution(rho4, -h, extra_h=extra))
    gen = osys.subsystem_generator(rho4, extra_h=extra)
    np.testing.assert_allclose(gen.rate(osys.subsystem(rho4)), (fwd - bwd) / (2 * h), atol=1e-8)


def test_trajectory_csv_header():
    rows = osys.trajectory(osys.product_state(), [0.0, 0.1])
    text = osys.trajectory_csv(rows)
    assert text.splitlines()[0] == ",".join(osys.TRAJECTORY_COLUMNS)
    assert len(text.splitlines()) == 3


def test_entangled_start_has_mixed_subsystem():
    rb = osys.subsystem(osys.entangled_state())
    assert osys.purity(rb) == pytest.approx(0.0, abs=1e-15)
