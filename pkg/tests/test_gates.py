import numpy as np
import pytest
from scipy.linalg import expm

from qembed import automaton as am
from qembed import gates as gt
from qembed.quantum_core import is_unitary


@pytest.mark.parametrize("name", gt.catalog())
def test_catalog_gates_are_unitary(name):
    assert is_unitary(gt.gate(name).unitary)


def test_targeted_gate_names():
    np.testing.assert_allclose(gt.gate("UH@2").unitary, np.kron(np.eye(2), gt.gate("UH").unitary))
    np.testing.assert_allclose(gt.gate("DIAG(1,i,1,i)").unitary, np.diag([1, 1j, 1, 1j]))
    np.testing.assert_allclose(gt.gate("PHASE(1,i,1,i)").unitary, gt.phase_family(1, 1j, 1, 1j))


@pytest.mark.parametrize(
    "gate_name, update",
    [("U12", "T12"), ("U23", "T23"), ("U31", "T31"), ("U1", "T1"), ("U2", "T2"), ("U3", "T3"), ("UH", "TH")],
)
def test_one_qubit_gate_matches_update(gate_name, update):
    real = gt.automaton_realization(gate_name, "one_qubit")
    assert real
    np.testing.assert_array_equal(real.step.perm, am.named_step(update).perm)


def test_ut_has_no_one_qubit_realization():
    assert not gt.automaton_realization("UT", "one_qubit")


@pytest.mark.parametrize("name", ["SWAP", "UH@1", "U31@2", "PHASE(1,i,1,i)", "DIAG(1,-1,-1,1)"])
def test_realizable_under_correlation_map(name):
    assert gt.automaton_realization(name, "correlation_Q2")


@pytest.mark.parametrize("name", ["CNOT", "D3", "PHASE(1,1,1,-1)"])
def test_needs_average_spin_map(name):
    assert not gt.automaton_realization(name, "correlation_Q2")
    assert gt.automaton_realization(name, "average_spin")


def test_cnot_spin_table():
    table = gt.average_spin_table("CNOT")
    assert table["10"] == (1, "11")
    assert table["13"] == (-1, "22")
    assert table["30"] == (1, "30")


def test_chain_check_small():
    r = gt.qubit_chain_check(n_samples=20, length=10, seed=4)
    assert r.max_matrix_error < 1e-12


def test_icosahedron_expectations_sum(rng):
    from qembed.quantum_core import random_density_matrix

    rho = random_density_matrix(rng, 2)
    vals = gt.icosahedron_expectations(rho)
    assert len(vals) == 6
    dirs = gt.icosahedron_directions()
    for k, d in dirs.items():
        assert np.linalg.norm(d) == pytest.approx(1.0)


def test_effective_hamiltonian_of_time_dependent_sequence():
    u0, u1 = gt.gate("UH").unitary, gt.gate("U31").unitary
    h = gt.effective_hamiltonian(u1, 0.5, u_prev=u0)
    assert np.abs(h.J).max() > 0
    np.testing.assert_allclose(expm(-0.5j * h.H), u1, atol=1e-12)


def test_quantumness_gate_accepts_complex_structure(rng):
    c = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = gt.quantumness_gate(gt.real_embedding(c))
    np.testing.assert_allclose(rho, c @ c.conj().T / np.trace(c @ c.conj().T).real, atol=1e-14)


def test_learner_floor_is_lower_bound():
    res = gt.train_bottleneck("CNOT", gt.LearnerConfig(m=8, epochs=300, seed=2))
    assert res.final_loss >= res.oracle_floor - 1e-12
    assert res.loss_curve[0][1] > res.loss_curve[-1][1]
