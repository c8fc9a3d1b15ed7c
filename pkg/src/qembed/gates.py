"""Gate catalog, automaton realizations, Hamiltonian extraction and learners.

Gate names are stable identifiers: ``U12 U21 U23 U32 U31 U13 U1 U2 U3 UH UT``
for one qubit, ``CNOT SWAP D3`` for two qubits, ``PHASE(a,b,c,d)`` and
``DIAG(d1,d2,d3,d4)`` with entries written as Python complex literals
(``i`` is accepted for the imaginary unit), and ``<gate>@<k>`` to lift a
one-qubit gate onto qubit ``k`` (1-based) of a two-qubit register.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import automaton as am
from .bitquantum import BitQuantumMap, get_map
from .errors import ContractError, DimensionError, DomainError
from .quantum_core import (
    PAULI,
    apply_unitary,
    bloch_vector,
    generator_indices,
    is_unitary,
    n_qubits,
    tensor_generator,
)

S2 = np.sqrt(2.0)
T1, T2, T3 = PAULI[1], PAULI[2], PAULI[3]

_ONE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "U31": np.array([[1, 1], [-1, 1]], dtype=complex) / S2,
    "U12": np.diag([1 + 1j, 1 - 1j]) / S2,
    "U23": np.array([[1, 1j], [1j, 1]], dtype=complex) / S2,
    "U1": 1j * T1,
    "U2": 1j * T2,
    "U3": 1j * T3,
    "UH": np.array([[1, 1], [1, -1]], dtype=complex) / S2,
    "UT": np.diag([1, np.exp(1j * np.pi / 4)]),
}
_ONE_QUBIT["U13"] = _ONE_QUBIT["U31"].conj().T
_ONE_QUBIT["U21"] = _ONE_QUBIT["U12"].conj().T
_ONE_QUBIT["U32"] = _ONE_QUBIT["U23"].conj().T

_TWO_QUBIT = {
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "D3": np.diag([1, 1, -1, 1]).astype(complex),
}


def phase_family(a, b, c, d) -> np.ndarray:
    """The permutation-with-phases gate whose adjoint has entries ``a, b, c, d``."""
    ud = np.zeros((4, 4), dtype=complex)
    ud[0, 1], ud[1, 3], ud[2, 0], ud[3, 2] = a, b, c, d
    return ud.conj().T


def _parse_complex(tok: str) -> complex:
    tok = tok.strip().replace(" ", "")
    tok = re.sub(r"(?<![0-9.])i", "1j", tok).replace("i", "j")
    return complex(tok)


@dataclass(frozen=True)
class GateSpec:
    name: str
    unitary: np.ndarray = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return n_qubits(self.unitary.shape[0])


@lru_cache(maxsize=256)
def gate(name: str) -> GateSpec:
    """Look up a gate by its stable name."""
    key = name.strip()
    if key in _ONE_QUBIT:
        u = _ONE_QUBIT[key]
    elif key in _TWO_QUBIT:
        u = _TWO_QUBIT[key]
    elif "@" in key:
        base, _, pos = key.partition("@")
        if base not in _ONE_QUBIT or pos not in ("1", "2"):
            raise KeyError(f"unknown gate {name!r}")
        one = _ONE_QUBIT[base]
        u = np.kron(one, np.eye(2)) if pos == "1" else np.kron(np.eye(2), one)
    else:
        m = re.fullmatch(r"(PHASE|DIAG)\((.*)\)", key)
        if not m:
            raise KeyError(f"unknown gate {name!r}")
        vals = [_parse_complex(t) for t in m.group(2).split(",")]
        if len(vals) != 4 or not all(np.isclose(abs(v), 1.0) for v in vals):
            raise KeyError(f"{m.group(1)} needs four unit-modulus entries")
        u = phase_family(*vals) if m.group(1) == "PHASE" else np.diag(vals).astype(complex)
    u = np.array(u, dtype=complex)
    u.setflags(write=False)
    return GateSpec(key, u)


def catalog() -> list[str]:
    """Names of all fixed catalog gates (parameterized families excluded)."""
    return sorted(_ONE_QUBIT) + sorted(_TWO_QUBIT)


def apply_sequence(rho, names) -> np.ndarray:
    """Apply gates in time order (first name acts first)."""
    rho = np.asarray(rho, dtype=complex)
    for n in names:
        u = gate(n).unitary
        if u.shape != rho.shape:
            raise DimensionError(f"gate {n} has dimension {u.shape[0]}, state {rho.shape[0]}")
        rho = apply_unitary(rho, u)
    return rho


def sequence_unitary(names, dim: int) -> np.ndarray:
    u = np.eye(dim, dtype=complex)
    for n in names:
        u = gate(n).unitary @ u
    return u


# ---------------------------------------------------------------------------
# Action on Bloch vectors and automaton realizations


def bloch_action(u) -> np.ndarray:
    """Real matrix ``R`` with ``bloch(U rho U^dagger) = R bloch(rho)``."""
    u = np.asarray(u, dtype=complex)
    q = n_qubits(u.shape[0])
    gens = [tensor_generator(z) for z in generator_indices(q)]
    dim = u.shape[0]
    # R_zw = tr(L_z U L_w U^dagger) / dim
    return np.array([[np.trace(lz @ u @ lw @ u.conj().T).real / dim for lw in gens] for lz in gens])


@dataclass(frozen=True)
class NotRealizable:
    gate: str
    map: str
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Realization:
    gate: str
    map: str
    step: am.StepOperator = field(repr=False)
    spin_rule: tuple[tuple[int, int], ...] | None = None

    def __bool__(self) -> bool:
        return True


def _vertex_table(bqm: BitQuantumMap) -> np.ndarray:
    return np.asarray(bqm.observables, dtype=float).T


def automaton_realization(gate_name: str, map_name: str):
    """Unique-jump step realizing a gate under a bit-quantum map, if one exists.

    A bijection ``f`` of configurations realizes ``U`` exactly when
    ``bloch(delta_f(tau)) = R bloch(delta_tau)`` for every configuration,
    where ``R`` is the Bloch action of ``U``.  Since configurations are
    distinguished by their fundamental spins, ``f`` is unique when it exists.
    """
    u = gate(gate_name).unitary
    bqm = get_map(map_name)
    if u.shape[0] != 2**bqm.q:
        raise DimensionError(f"gate {gate_name} does not act on {bqm.q} qubits")
    r = bloch_action(u)
    if bqm.name.startswith("average_spin"):
        return _average_spin_realization(gate_name, bqm, r)
    verts = _vertex_table(bqm)
    images = verts @ r.T
    lookup = {tuple(np.rint(v).astype(int)): i for i, v in enumerate(verts)}
    perm = []
    for img in images:
        key = tuple(np.rint(img).astype(int))
        if np.abs(img - np.rint(img)).max() > 1e-9 or key not in lookup:
            return NotRealizable(gate_name, bqm.name, "image of a configuration is not a configuration")
        perm.append(lookup[key])
    if len(set(perm)) != len(perm):
        return NotRealizable(gate_name, bqm.name, "configuration map is not a bijection")
    return Realization(gate_name, bqm.name, am.unique_jump(bqm.n_spins, np.array(perm)))


def _signed_permutation(r: np.ndarray):
    n = r.shape[0]
    rule = []
    for z in range(n):
        row = r[z]
        j = int(np.argmax(np.abs(row)))
        if abs(abs(row[j]) - 1) > 1e-9 or np.abs(np.delete(row, j)).max(initial=0) > 1e-9:
            return None
        rule.append((j, int(np.sign(row[j]))))
    if sorted(j for j, _ in rule) != list(range(n)):
        return None
    return tuple(rule)


def _average_spin_realization(gate_name, bqm, r):
    rule = _signed_permutation(r)
    if rule is None:
        return NotRealizable(gate_name, bqm.name, "Bloch action is not a signed permutation of spins")
    step = am.spin_map(bqm.n_spins, rule)
    return Realization(gate_name, bqm.name, step, rule)


def average_spin_table(gate_name: str) -> dict[str, tuple[int, str]]:
    """Readable spin table: new ``rho_z`` equals ``sign * old rho_w``."""
    u = gate(gate_name).unitary
    q = n_qubits(u.shape[0])
    rule = _signed_permutation(bloch_action(u))
    if rule is None:
        raise DomainError(f"{gate_name} does not permute generators")
    labels = ["".join(map(str, z)) for z in generator_indices(q)]
    return {labels[z]: (s, labels[j]) for z, (j, s) in enumerate(rule)}


@dataclass(frozen=True)
class ChainCheck:
    max_matrix_error: float
    max_purity_error: float
    n_samples: int
    length: int


def qubit_chain_check(n_samples: int = 200, length: int = 20, seed: int = 0) -> ChainCheck:
    """Compare automaton updates of three spins with the matching one-qubit gates.

    Each sample draws a constraint-satisfying distribution and a random
    sequence of the six basic updatings, evolves the distribution, and
    compares its one-qubit density matrix with the gate-conjugated initial
    matrix.
    """
    from .bitquantum import one_qubit_bloch, one_qubit_map, random_constrained_distribution

    rng = np.random.Generator(np.random.Philox(seed))
    names = am.BASIC_UPDATINGS
    steps = {n: am.named_step(n) for n in names}
    worst_m = worst_p = 0.0
    for _ in range(n_samples):
        p = random_constrained_distribution(rng)
        rho = one_qubit_map(p)
        seq = [names[i] for i in rng.integers(0, len(names), length)]
        for n in seq:
            p = am.evolve_distribution(p, steps[n])
        expected = apply_sequence(rho, ["U" + n[1:] for n in seq])
        worst_m = max(worst_m, float(np.abs(one_qubit_map(p) - expected).max()))
        b0 = bloch_vector(rho)
        worst_p = max(worst_p, abs(float(one_qubit_bloch(p) @ one_qubit_bloch(p)) - float(b0 @ b0)))
    return ChainCheck(worst_m, worst_p, n_samples, length)


# ---------------------------------------------------------------------------
# Icosahedron spin set

ICOSA_A = np.sqrt((1 + np.sqrt(5)) / (2 * np.sqrt(5)))
ICOSA_B = np.sqrt(2 / (5 + np.sqrt(5)))


def icosahedron_directions() -> dict[str, np.ndarray]:
    """Six spin directions ``S_{k+-}`` on the Bloch sphere."""
    a, b = ICOSA_A, ICOSA_B
    return {
        "1+": np.array([a, 0, b]),
        "1-": np.array([a, 0, -b]),
        "2+": np.array([b, a, 0]),
        "2-": np.array([-b, a, 0]),
        "3+": np.array([0, b, a]),
        "3-": np.array([0, -b, a]),
    }


def icosahedron_expectations(rho) -> dict[str, float]:
    """Expectations ``a rho_k +- b rho_k~`` of the six icosahedron spins."""
    b = bloch_vector(rho)
    return {k: float(v @ b) for k, v in icosahedron_directions().items()}


def icosahedron_operators() -> dict[str, np.ndarray]:
    return {k: sum(v[i] * PAULI[i + 1] for i in range(3)) for k, v in icosahedron_directions().items()}


# ---------------------------------------------------------------------------
# Hamiltonian extraction


@dataclass(frozen=True)
class HamiltonianResult:
    H: np.ndarray
    H_traceless: np.ndarray
    phase: float
    Hbar: np.ndarray
    J: np.ndarray
    G: np.ndarray
    branch_ambiguous: bool


def effective_hamiltonian(u, eps: float, u_prev=None) -> HamiltonianResult:
    """Hamiltonian ``H = (i/eps) ln U`` and the finite-difference operators.

    The global phase is split off through ``det U`` before the logarithm so
    that ``H_traceless`` does not depend on it; ``H`` adds it back so that
    ``expm(-1j*eps*H) == U``.  ``u_prev`` is ``U(t - eps)``; it defaults to
    ``U`` (time-independent evolution).
    """
    u = np.asarray(u, dtype=complex)
    if eps <= 0:
        raise DomainError("time step must be positive")
    if not is_unitary(u):
        raise ContractError("operator is not unitary")
    n = u.shape[0]
    phase = float(np.angle(np.linalg.det(u))) / n
    v = u * np.exp(-1j * phase)
    w, vecs = np.linalg.eig(v)
    # re-orthonormalize degenerate eigenspaces via a Schur-like QR
    vecs, _ = np.linalg.qr(vecs)
    w = np.array([vecs[:, k].conj() @ v @ vecs[:, k] for k in range(n)])
    ang = np.angle(w)
    ambiguous = bool(np.any(np.abs(np.abs(ang) - np.pi) < 1e-10))
    ang = np.where(ang <= -np.pi + 1e-15, np.pi, ang)
    log_v = (vecs * (1j * ang)) @ vecs.conj().T
    h0 = 1j * log_v / eps
    h0 = 0.5 * (h0 + h0.conj().T)
    h = h0 - (phase / eps) * np.eye(n)
    up = u if u_prev is None else np.asarray(u_prev, dtype=complex)
    ud, upd = u.conj().T, up.conj().T
    g = 1j / (2 * eps) * (u - upd)
    hbar = 1j / (4 * eps) * (u + up - ud - upd)
    j = 1 / (4 * eps) * (u - up + ud - upd)
    return HamiltonianResult(h, h0, phase, hbar, j, g, ambiguous)


# ---------------------------------------------------------------------------
# Quantumness gate and real embedding

_I8 = np.block([[np.zeros((4, 4)), -np.eye(4)], [np.eye(4), np.zeros((4, 4))]])


def real_embedding(c) -> np.ndarray:
    """Real ``2n x 2n`` form ``[[Re, -Im], [Im, Re]]`` of a complex matrix."""
    c = np.asarray(c, dtype=complex)
    return np.block([[c.real, -c.imag], [c.imag, c.real]])


def from_real_embedding(cbar) -> np.ndarray:
    cbar = np.asarray(cbar, dtype=float)
    n = cbar.shape[0] // 2
    return cbar[:n, :n] + 1j * cbar[n:, :n]


def quantumness_gate(a) -> np.ndarray:
    """Turn any real 8x8 matrix into a two-qubit density matrix.

    The input is first projected onto matrices commuting with the complex
    structure, then read as a complex ``C`` and mapped to ``C C^dagger / tr``.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (8, 8):
        raise DimensionError("quantumness gate expects an 8x8 real matrix")
    a_tilde = -_I8 @ a @ _I8
    c = from_real_embedding(0.5 * (a + a_tilde))
    m = c @ c.conj().T
    tr = np.trace(m).real
    if tr <= 1e-300:
        raise ContractError("degenerate input: C C^dagger has zero trace")
    m = m / tr
    return 0.5 * (m + m.conj().T)


# ---------------------------------------------------------------------------
# Bottleneck learner


@dataclass(frozen=True)
class LearnerConfig:
    m: int
    n_train: int = 256
    epochs: int = 3000
    learning_rate: float = 0.2
    seed: int = 0
    batch_size: int | None = None
    n_test: int = 256

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("bottleneck width must be at least 1")


@dataclass
class LearnerResult:
    final_loss: float
    test_loss: float
    loss_curve: list[tuple[int, float]]
    oracle_floor: float


def learner_dataset(gate_name: str, n: int, rng: np.random.Generator):
    """Inputs and targets as flattened real 8x8 density matrices."""
    u = gate(gate_name).unitary
    if u.shape != (4, 4):
        raise DimensionError("learner targets are two-qubit gates")
    ubar = real_embedding(u)
    x = np.empty((n, 64))
    y = np.empty((n, 64))
    for i in range(n):
        rho = quantumness_gate(rng.standard_normal((8, 8)))
        rbar = real_embedding(rho)
        x[i] = rbar.ravel()
        y[i] = (ubar @ rbar @ ubar.T).ravel()
    return x, y


def least_squares_floor(x, y, m: int) -> float:
    """Smallest mean squared error of any affine map of rank ``m`` from ``x`` to ``y``."""
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    coef, *_ = np.linalg.lstsq(xc, yc, rcond=None)
    fitted = xc @ coef
    s = np.linalg.svd(fitted, compute_uv=False)
    resid_full = np.sum((yc - fitted) ** 2)
    return float((resid_full + np.sum(s[m:] ** 2)) / x.shape[0])


def _loss(x, y, w1, b1, w2, b2):
    out = (x @ w1 + b1) @ w2 + b2
    return float(np.mean(np.sum((out - y) ** 2, axis=1)))


def train_bottleneck(gate_name: str, cfg: LearnerConfig) -> LearnerResult:
    """Gradient descent on a linear ``64 -> m -> 64`` network with biases.

    The loss is the mean squared Frobenius distance between the network
    output and the conjugated density matrix.  The step is fixed and scaled
    by the largest squared singular value of the centred inputs.
    """
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    x, y = learner_dataset(gate_name, cfg.n_train, rng)
    xt, yt = learner_dataset(gate_name, cfg.n_test, rng)
    mu = x.mean(axis=0)
    xc = x - mu
    n = x.shape[0]
    smax2 = np.linalg.norm(xc, 2) ** 2 / n
    w1 = rng.standard_normal((64, cfg.m)) * 0.1
    w2 = rng.standard_normal((cfg.m, 64)) * 0.1
    b1 = np.zeros(cfg.m)
    b2 = y.mean(axis=0).copy()
    lr = cfg.learning_rate / smax2
    bs = n if cfg.batch_size is None else cfg.batch_size
    curve = []
    for epoch in range(cfg.epochs):
        for start in range(0, n, bs):
            xb, yb = xc[start : start + bs], y[start : start + bs]
            h = xb @ w1 + b1
            err = (h @ w2 + b2 - yb) * (2.0 / xb.shape[0])
            gh = err @ w2.T
            w2 -= lr * (h.T @ err)
            b2 -= lr * err.sum(axis=0) * smax2
            w1 -= lr * (xb.T @ gh)
            b1 -= lr * gh.sum(axis=0) * smax2
        if epoch % 100 == 0 or epoch == cfg.epochs - 1:
            curve.append((epoch, _loss(xc, y, w1, b1, w2, b2)))
    final = _loss(xc, y, w1, b1, w2, b2)
    test = _loss(xt - mu, yt, w1, b1, w2, b2)
    return LearnerResult(final, test, curve, least_squares_floor(x, y, cfg.m))
