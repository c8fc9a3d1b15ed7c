import numpy as np
import pytest

from qembed import bitquantum as bq
from qembed import continuum as ct
from qembed import measurement as ms
from qembed.errors import DomainError
from qembed.quantum_core import fidelity, random_density_matrix


def test_one_qubit_map_reads_spin_means(rng):
    p = bq.random_constrained_distribution(rng)
    b = bq.one_qubit_bloch(p)
    assert np.linalg.norm(b) <= 1 + 1e-12
    rho = bq.one_qubit_map(p)
    assert np.trace(rho).real == pytest.approx(1.0)


def test_sharp_configuration_gives_pure_state_only_in_one_qubit_map():
    p = np.zeros(8)
    p[7] = 1.0
    rho = bq.one_qubit_map(p)
    rep = bq.constraint_report(rho)
    assert not rep.satisfied  # |b| = sqrt 3 violates the constraint


def test_correlation_map_vertex_count():
    m = bq.get_map("correlation_Q2")
    assert (m.q, m.n_spins) == (2, 6)
    assert m.observables.shape == (15, 64)


@pytest.mark.parametrize("delta", np.linspace(-0.125, 0.125, 5))
def test_entangled_family_is_singlet(delta):
    rho = bq.correlation_map(bq.entangled_family(delta))
    assert fidelity(rho, bq.singlet()) == pytest.approx(1.0, abs=1e-12)


def test_entangled_family_rejects_negative_weights():
    with pytest.raises(DomainError):
        bq.entangled_family(0.2)


def test_pair_inequality_edges():
    assert bq.pair_inequality_holds(1.0, 1.0, 1.0)
    assert not bq.pair_inequality_holds(1.0, 1.0, -1.0)


def test_solver_realizes_random_state(rng):
    target = random_density_matrix(rng, 4)
    res = bq.solve_distribution(target, "correlation_Q2", restarts=4, seed=1)
    assert res.converged
    assert bq.lp_feasible(target)[0]


def test_solver_is_deterministic(rng):
    target = random_density_matrix(rng, 4)
    a = bq.solve_distribution(target, restarts=2, seed=5)
    b = bq.solve_distribution(target, restarts=2, seed=5)
    np.testing.assert_array_equal(a.wave, b.wave)


def test_rotated_singlet_is_not_realizable():
    # A local rotation of the singlet pushes the Cartesian CHSH value to 2 sqrt 2,
    # which no distribution over two Cartesian spin triplets can reach.
    u = np.kron(ct.rotation_unitary([0, 1, 0], np.pi / 4), np.eye(2))
    rho = u @ bq.singlet() @ u.conj().T
    assert ms.chsh("cartesian_quantum", rho=rho).value == pytest.approx(2 * np.sqrt(2))
    assert not bq.lp_feasible(rho)[0]
    assert not bq.solve_distribution(rho, restarts=4, seed=0).converged


def test_ghz_overlap_bound():
    psi = np.zeros(8)
    psi[[0, 7]] = 1 / np.sqrt(2)
    assert bq.max_pure_overlap(psi, "correlation_Q3") == pytest.approx(0.75)
