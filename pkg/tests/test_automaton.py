import numpy as np
import pytest

from qembed import automaton as am
from qembed.errors import InvalidAutomatonError


def test_spin_indexing_convention():
    assert am.config_spins(0, 3) == (-1, -1, -1)
    assert am.config_spins(4, 3) == (1, -1, -1)
    assert am.config_index((1, -1, -1)) == 4
    assert am.format_config(4, 3) == "+--"


def test_unique_jump_requires_bijection():
    with pytest.raises(InvalidAutomatonError):
        am.unique_jump(2, [0, 0, 1, 2])


def test_unique_jump_matrix_is_orthogonal_permutation():
    step = am.named_step("T12")
    m = step.matrix
    np.testing.assert_array_equal(m.T @ m, np.eye(8))
    assert set(np.unique(m)) <= {0.0, 1.0}


def test_t12_rotates_first_two_spins():
    step = am.named_step("T12")
    for tau in range(8):
        s = am.config_spins(tau, 3)
        assert am.config_spins(int(step.perm[tau]), 3) == (s[1], -s[0], s[2])


def test_four_quarter_turns_return_to_identity():
    step = am.compose([am.named_step("T31")] * 4)
    np.testing.assert_array_equal(step.perm, np.arange(8))


def test_evolution_preserves_probability_and_wave_norm(rng):
    p = rng.dirichlet(np.ones(8))
    q = rng.standard_normal(8)
    q /= np.linalg.norm(q)
    for name in am.BASIC_UPDATINGS:
        step = am.named_step(name)
        assert am.evolve_distribution(p, step).sum() == pytest.approx(1.0)
        np.testing.assert_allclose(am.evolve_wave(q, step) ** 2, am.evolve_distribution(q**2, step), atol=1e-15)


def test_conditional_flip_is_involution():
    cf = am.conditional_flip(2, 0, 1)
    np.testing.assert_array_equal(cf.then(cf).perm, np.arange(4))


def test_general_step_rejects_non_orthogonal():
    with pytest.raises(Exception):
        am.general_step(np.ones((2, 2)))


def test_sampling_is_reproducible(rng):
    p = rng.dirichlet(np.ones(8))
    a = am.sample_configurations(p, 1000, seed=3)
    b = am.sample_configurations(p, 1000, seed=3)
    np.testing.assert_array_equal(a, b)


def test_distribution_csv_round_trip(rng):
    p = rng.dirichlet(np.ones(8))
    np.testing.assert_array_equal(am.distribution_from_csv(am.distribution_to_csv(p)), p)


def test_parse_sequence_order():
    steps = am.parse_sequence("T12; T1")
    assert len(steps) == 2
    combined = am.compose(steps)
    np.testing.assert_array_equal(combined.perm, steps[1].perm[steps[0].perm])
