import numpy as np
import pytest

from qembed import bitquantum as bq
from qembed import measurement as ms
from qembed.errors import DomainError
from qembed.quantum_core import PAULI, random_density_matrix


def test_joint_table_from_expectations():
    t = ms.joint_from_expectations(0.0, 0.0, 1.0)
    assert t.as_dict() == pytest.approx({"++": 0.5, "+-": 0.0, "-+": 0.0, "--": 0.5})
    with pytest.raises(DomainError):
        ms.joint_from_expectations(0.9, 0.9, -0.9)


def test_spectral_projectors_descending():
    projs = ms.spectral_projectors(PAULI[1])
    assert [v for v, _ in projs] == pytest.approx([1.0, -1.0])
    np.testing.assert_allclose(sum(p for _, p in projs), np.eye(2), atol=1e-14)


def test_coherent_correlation_of_commuting_observables(rng):
    rho = random_density_matrix(rng, 2)
    assert ms.coherent_correlation(rho, PAULI[3], PAULI[3]) == pytest.approx(1.0)


def test_reduce_removes_off_diagonal(rng):
    rho = random_density_matrix(rng, 2)
    r = ms.reduce(rho, PAULI[3])
    assert r[0, 1] == 0 and r[1, 0] == 0
    np.testing.assert_allclose(np.diag(r), np.diag(rho))


def test_decoherent_conditionals_sum_to_one(rng):
    rho = random_density_matrix(rng, 2)
    res = ms.decoherent_measure(rho, PAULI[3], PAULI[1])
    sums = res.conditionals.column_sums()
    for v in sums.values():
        assert v == pytest.approx(1.0)


def test_stern_gerlach_coherent_differs_from_decoherent():
    coh = ms.stern_gerlach("coherent")
    dec = ms.stern_gerlach("decoherent")
    assert coh["expectations"]["Sz_final"] == pytest.approx(1.0)
    assert dec["expectations"]["Sz_final"] == pytest.approx(0.0, abs=1e-12)
    assert sum(coh["probabilities"].values()) == pytest.approx(1.0)


def test_chsh_classical_family_saturates_bound():
    res = ms.chsh("classical_distribution", p=bq.entangled_family(0.0))
    assert res.value == pytest.approx(2.0)
    assert not res.violated


def test_chsh_singlet_cartesian_and_optimal():
    rho = bq.singlet()
    assert ms.chsh("cartesian_quantum", rho=rho).value == pytest.approx(2.0)
    assert ms.max_chsh_value(rho) == pytest.approx(2 * np.sqrt(2))


def test_chsh_explicit_directions():
    dirs = np.array([[0, 0, 1], [1, 0, 0], [1, 0, 1], [-1, 0, 1]], dtype=float)
    dirs[2:] /= np.sqrt(2)
    res = ms.chsh("arbitrary_directions", rho=bq.singlet(), directions=dirs)
    assert abs(res.value) == pytest.approx(2 * np.sqrt(2))


def test_pairwise_bound_on_singlet():
    assert ms.chsh("pairwise_bound", rho=bq.singlet()).value == 1.0


def test_kochen_specker_report():
    rep = ms.kochen_specker_demo()
    assert rep.contradiction
    assert rep.sign_from_operators == -1
    assert rep.sign_from_values == 1
