"""Ideal measurements on small quantum systems.

Outcome strings list results in time order: ``"+-+"`` means the first
measurement gave ``+1``, the second ``-1`` and the third ``+1``.

Heisenberg operators are ``A_H = U^dagger A U`` where ``U`` maps the state at
the earlier time onto the state at the later time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import automaton as am
from .errors import ContractError, DimensionError, DomainError, UnsupportedError
from .quantum_core import PAULI, _require_hermitian, _require_square, bloch_vector, is_unitary, spin_operator

EIGEN_GAP = 1e-8
SUM_TOL = 1e-12
OUTCOMES = ("++", "+-", "-+", "--")


# ---------------------------------------------------------------------------
# Joint and conditional tables


@dataclass(frozen=True)
class JointTable:
    """Probabilities for two successive two-level outcomes.

    The first sign refers to the later observable ``A``, the second to the
    earlier observable ``B``.
    """

    pp: float
    pm: float
    mp: float
    mm: float

    def as_dict(self) -> dict[str, float]:
        return dict(zip(OUTCOMES, (self.pp, self.pm, self.mp, self.mm)))

    @property
    def mean_a(self) -> float:
        return self.pp + self.pm - self.mp - self.mm

    @property
    def mean_b(self) -> float:
        return self.pp - self.pm + self.mp - self.mm

    @property
    def correlation(self) -> float:
        return self.pp - self.pm - self.mp + self.mm

    def conditionals(self) -> "ConditionalTable":
        """Conditional probabilities ``w(A = a | B = b)``."""
        wb = {1: self.pp + self.mp, -1: self.pm + self.mm}
        joint = {(1, 1): self.pp, (1, -1): self.pm, (-1, 1): self.mp, (-1, -1): self.mm}
        return ConditionalTable({k: (v / wb[k[1]] if wb[k[1]] > 0 else None) for k, v in joint.items()})


@dataclass(frozen=True)
class ConditionalTable:
    """Mapping ``(a, b) -> w(A = a | B = b)``; ``None`` marks an impossible ``b``."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def column_sums(self) -> dict[int, float | None]:
        out = {}
        for b in (1, -1):
            col = [self.values[(a, b)] for a in (1, -1)]
            out[b] = None if None in col else sum(col)
        return out


def joint_from_expectations(mean_a_b: float, mean_b: float, corr: float) -> JointTable:
    """Joint probabilities from the conditional mean of ``A``, the mean of ``B``
    and the measurement correlation.

    Raises
    ------
    DomainError
        If the triple is not realized by any probability table.
    """
    vals = [
        0.25 * (1 + sa * mean_a_b + sb * mean_b + sa * sb * corr)
        for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1))
    ]
    if min(vals) < -SUM_TOL:
        raise DomainError(f"expectations ({mean_a_b}, {mean_b}, {corr}) give a negative probability")
    return JointTable(*(max(v, 0.0) for v in vals))


# ---------------------------------------------------------------------------
# Operators and projectors


def heisenberg(a, u=None) -> np.ndarray:
    """``U^dagger A U``; ``U = None`` means no evolution."""
    a = np.asarray(a, dtype=complex)
    if u is None:
        return a
    u = _require_square(u, "evolution")
    if u.shape != a.shape:
        raise DimensionError(f"operator {a.shape} and evolution {u.shape} differ")
    if not is_unitary(u, 1e-10):
        raise ContractError("evolution operator is not unitary")
    return u.conj().T @ a @ u


def spectral_projectors(op, gap: float = EIGEN_GAP) -> list[tuple[float, np.ndarray]]:
    """Eigenvalue/projector pairs, grouping eigenvalues closer than ``gap``.

    Pairs are sorted by decreasing eigenvalue.
    """
    op = _require_hermitian(op, "observable", 1e-10)
    w, v = np.linalg.eigh(op)
    groups: list[list[int]] = []
    for i in range(w.size):
        if groups and w[i] - w[groups[-1][-1]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for g in reversed(groups):
        vecs = v[:, g]
        out.append((float(np.mean(w[g])), vecs @ vecs.conj().T))
    return out


def _two_level(op, name: str) -> dict[int, np.ndarray]:
    proj = spectral_projectors(op)
    vals = [round(e, 6) for e, _ in proj]
    if any(v not in (1.0, -1.0) for v in vals):
        raise ContractError(f"{name} must have eigenvalues +1 and -1 only, got {vals}")
    out = {1: np.zeros_like(proj[0][1]), -1: np.zeros_like(proj[0][1])}
    for e, p in proj:
        out[1 if e > 0 else -1] = p
    return out


def _check_pair(rho, *ops):
    rho = _require_square(rho, "density matrix")
    for o in ops:
        if np.asarray(o).shape != rho.shape:
            raise DimensionError(f"operator shape {np.asarray(o).shape} does not match state {rho.shape}")
    return rho


def coherent_correlation(rho, a, b, u=None) -> float:
    """Symmetrized correlation ``tr(rho {A_H, B}) / 2`` with ``A`` measured after ``U``."""
    rho = _check_pair(rho, a, b)
    a_h = heisenberg(_require_hermitian(a, "A", 1e-10), u)
    b = _require_hermitian(b, "B", 1e-10)
    return float(0.5 * np.trace(rho @ (a_h @ b + b @ a_h)).real)


def reduce(rho, b) -> np.ndarray:
    """Block-diagonal part ``sum_b P_b rho P_b`` in the eigenbasis of ``B``."""
    rho = _check_pair(rho, b)
    return sum(p @ rho @ p for _, p in spectral_projectors(b))


@dataclass(frozen=True)
class DecoherentResult:
    conditionals: ConditionalTable | None
    mean_a_b: float
    correlation: float
    w_b: dict[int, float]
    reduced: np.ndarray = field(repr=False)

    def joint(self) -> JointTable:
        return joint_from_expectations(self.mean_a_b, self.w_b[1] - self.w_b[-1], self.correlation)


def decoherent_measure(rho, b, a, u=None) -> DecoherentResult:
    """Measure two-level ``B``, reduce the density matrix, then measure ``A`` after ``U``."""
    rho = _check_pair(rho, a, b)
    pb = _two_level(b, "B")
    a_h = heisenberg(_require_hermitian(a, "A", 1e-10), u)
    b_op = np.asarray(b, dtype=complex)
    rho_r = pb[1] @ rho @ pb[1] + pb[-1] @ rho @ pb[-1]
    w_b = {s: float(np.trace(pb[s] @ rho).real) for s in (1, -1)}
    mean_a = float(np.trace(a_h @ rho_r).real)
    corr = float(np.trace(a_h @ b_op @ rho_r).real)
    try:
        pa = _two_level(a_h, "A")
    except ContractError:
        cond = None
    else:
        vals = {}
        for sb in (1, -1):
            for sa in (1, -1):
                if w_b[sb] <= SUM_TOL:
                    vals[(sa, sb)] = None
                else:
                    vals[(sa, sb)] = float(np.trace(pa[sa] @ pb[sb] @ rho @ pb[sb]).real) / w_b[sb]
        cond = ConditionalTable(vals)
    return DecoherentResult(cond, mean_a, corr, w_b, rho_r)


def reduction_of_wave_function(psi, b, a, u=None) -> ConditionalTable:
    """Conditionals from collapsing a pure state onto the eigenspaces of ``B``."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    pb = _two_level(b, "B")
    a = np.asarray(a, dtype=complex)
    u = np.eye(psi.size) if u is None else np.asarray(u, dtype=complex)
    vals = {}
    for sb in (1, -1):
        chi = pb[sb] @ psi
        nrm = np.linalg.norm(chi)
        for sa in (1, -1):
            if nrm**2 <= SUM_TOL:
                vals[(sa, sb)] = None
                continue
            phi = u @ (chi / nrm)
            vals[(sa, sb)] = float(0.5 * (1 + sa * np.vdot(phi, a @ phi).real))
    return ConditionalTable(vals)


# ---------------------------------------------------------------------------
# Sequences of measurements


def _signs(n: int):
    return itertools.product((1, -1), repeat=n)


def _label(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in signs)


def sequence_probabilities(rho, heisenberg_ops, mode: str) -> dict[str, float]:
    """Outcome probabilities for two-level observables measured in time order.

    ``heisenberg_ops`` are the observables already transformed to the initial
    time.  ``mode="decoherent"`` reduces the state after each measurement;
    ``mode="coherent"`` combines symmetrized time-ordered moments.
    """
    rho = np.asarray(rho, dtype=complex)
    ops = [np.asarray(o, dtype=complex) for o in heisenberg_ops]
    n = len(ops)
    if mode == "decoherent":
        projs = [_two_level(o, f"observable {i}") for i, o in enumerate(ops)]
        out = {}
        for signs in _signs(n):
            k = np.eye(rho.shape[0], dtype=complex)
            for p, s in zip(projs, signs):
                k = p[s] @ k
            out[_label(signs)] = float(np.trace(k @ rho @ k.conj().T).real)
        return out
    if mode == "coherent":
        moments = {}
        for r in range(1, n + 1):
            for subset in itertools.combinations(range(n), r):
                prod = np.eye(rho.shape[0], dtype=complex)
                for i in subset:
                    prod = prod @ ops[i]
                moments[subset] = float(np.trace(rho @ prod).real)
        out = {}
        for signs in _signs(n):
            total = 1.0
            for subset, m in moments.items():
                total += int(np.prod([signs[i] for i in subset])) * m
            out[_label(signs)] = float(total / 2**n)
        return out
    raise UnsupportedError(f"unknown measurement mode {mode!r}")


def stern_gerlach(mode: str, omega: float = 1.0) -> dict:
    """Spin measured along z, then x after half a period, then z after a full period.

    The evolution is ``U(t) = exp(i omega tau_3 t)`` and the initial state is
    spin up along z.
    """
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    times = (0.0, np.pi / omega, 2 * np.pi / omega)
    ops = (PAULI[3], PAULI[1], PAULI[3])
    h_ops = []
    for t, o in zip(times, ops):
        u = np.diag(np.exp(1j * omega * t * np.array([1.0, -1.0])))
        h_ops.append(heisenberg(o, u))
    probs = sequence_probabilities(rho0, h_ops, mode)
    final_z = sum(v * (1 if k[-1] == "+" else -1) for k, v in probs.items())
    return {"mode": mode, "probabilities": probs, "expectations": {"Sz_final": final_z}}


# ---------------------------------------------------------------------------
# CHSH


@dataclass(frozen=True)
class ChshResult:
    mode: str
    value: float
    bound: float
    violated: bool
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "violated", bool(self.violated))


def _corr_matrix(rho) -> np.ndarray:
    b = bloch_vector(rho)
    if b.size != 15:
        raise DimensionError("CHSH evaluators expect two qubits")
    return np.array([[b[4 * k + l - 1] for l in range(1, 4)] for k in range(1, 4)])


def _best_quad(c: np.ndarray):
    best, arg = -1.0, None
    for k, l, m, n in itertools.product(range(3), repeat=4):
        v = abs(c[k, m] + c[k, n] + c[l, m] - c[l, n])
        if v > best + 1e-15:
            best, arg = v, (k + 1, l + 1, m + 1, n + 1)
    return best, arg


def _directional(rho, dirs) -> float:
    a, a2, b, b2 = (np.asarray(d, dtype=float) / np.linalg.norm(d) for d in dirs)

    def op(v):
        return sum(v[i] * PAULI[i + 1] for i in range(3))

    def e(x, y):
        return float(np.trace(rho @ np.kron(op(x), op(y))).real)

    return e(a, b) + e(a, b2) + e(a2, b) - e(a2, b2)


def _unit(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def optimize_directions(rho, restarts: int = 16, seed: int = 0):
    """Maximize ``|S|`` over four unit directions; returns (value, directions)."""
    rho = np.asarray(rho, dtype=complex)
    rng = np.random.Generator(np.random.Philox(seed))

    def neg(x):
        dirs = [_unit(x[2 * i], x[2 * i + 1]) for i in range(4)]
        return -abs(_directional(rho, dirs))

    best = None
    for _ in range(restarts):
        res = minimize(neg, rng.uniform(0, 2 * np.pi, 8), method="BFGS", options={"gtol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    dirs = [_unit(best.x[2 * i], best.x[2 * i + 1]) for i in range(4)]
    return -float(best.fun), dirs


def max_chsh_value(rho) -> float:
    """Largest CHSH value over all directions, ``2 sqrt(t1^2 + t2^2)`` from the
    two largest singular values of the correlation matrix."""
    s = np.linalg.svd(_corr_matrix(np.asarray(rho, dtype=complex)), compute_uv=False)
    return float(2 * np.sqrt(s[0] ** 2 + s[1] ** 2))


def chsh(mode: str, **inputs) -> ChshResult:
    """CHSH evaluators.

    Modes
    -----
    classical_distribution
        ``p``: distribution over six spins (two triplets).  Maximum of the
        CHSH combination over all choices of spins.
    cartesian_quantum
        ``rho``: two-qubit density matrix.  Maximum over Cartesian spin pairs.
    pairwise_bound
        ``rho``: checks ``-1 + |x + y| <= c <= 1 - |x - y|`` for every pair of
        Cartesian spins using the diagonal probabilities in their joint basis.
    arbitrary_directions
        ``rho`` and either ``directions`` (four unit vectors ``a, a', b, b'``)
        or ``optimize=True``.
    """
    if mode == "classical_distribution":
        p = am.validate_distribution(inputs["p"])
        if p.size != 64:
            raise DimensionError("classical CHSH expects six spins")
        table = am.spin_table(6).astype(float)
        c = np.array([[p @ (table[:, k] * table[:, 3 + m]) for m in range(3)] for k in range(3)])
        value, arg = _best_quad(c)
        return ChshResult(mode, value, 2.0, value > 2 + 1e-12, {"spins": arg})
    rho = np.asarray(inputs["rho"], dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError("quantum CHSH modes expect a two-qubit state")
    if mode == "cartesian_quantum":
        value, arg = _best_quad(_corr_matrix(rho))
        return ChshResult(mode, value, 2.0, value > 2 + 1e-12, {"spins": arg})
    if mode == "pairwise_bound":
        checks = {}
        ok = True
        for k in range(1, 4):
            for l in range(1, 4):
                sk, sl = spin_operator(k, 0, 2), spin_operator(l, 1, 2)
                pk, pl = _two_level(sk, "S1"), _two_level(sl, "S2")
                probs = {(a, b): float(np.trace(pk[a] @ pl[b] @ rho).real) for a in (1, -1) for b in (1, -1)}
                x = probs[1, 1] + probs[1, -1] - probs[-1, 1] - probs[-1, -1]
                y = probs[1, 1] - probs[1, -1] + probs[-1, 1] - probs[-1, -1]
                c = probs[1, 1] - probs[1, -1] - probs[-1, 1] + probs[-1, -1]
                good = -1 + abs(x + y) - 1e-12 <= c <= 1 - abs(x - y) + 1e-12
                checks[f"{k}{l}"] = good
                ok &= good
        return ChshResult(mode, float(ok), 1.0, not ok, {"pairs": checks})
    if mode == "arbitrary_directions":
        if inputs.get("optimize"):
            value, dirs = optimize_directions(rho, inputs.get("restarts", 16), inputs.get("seed", 0))
        else:
            dirs = inputs["directions"]
            value = abs(_directional(rho, dirs))
        return ChshResult(
            mode, value, 2.0, value > 2 + 1e-12, {"directions": [list(map(float, d)) for d in dirs]}
        )
    raise UnsupportedError(f"unknown CHSH mode {mode!r}")


# ---------------------------------------------------------------------------
# Kochen-Specker chains on three qubits


def _kron3(a, b, c):
    return np.kron(np.kron(PAULI[a], PAULI[b]), PAULI[c])


def _chain(singles):
    """Seven commuting operators built from one Pauli label per qubit."""
    ops = {}
    for r in range(1, 4):
        for subset in itertools.combinations(range(3), r):
            idx = [0, 0, 0]
            for i in subset:
                idx[i] = singles[i]
            ops["".join(str(i + 1) for i in subset)] = _kron3(*idx)
    return ops


def kochen_specker_chains() -> dict[str, dict[str, np.ndarray]]:
    chains = {
        "F": _chain((3, 1, 1)),
        "G": _chain((1, 3, 1)),
        "H": _chain((1, 1, 3)),
        "C": _chain((3, 3, 3)),
    }
    f, g, h = chains["F"]["123"], chains["G"]["123"], chains["H"]["123"]
    chains["Q"] = {
        "1": f,
        "2": g,
        "3": h,
        "12": _kron3(2, 2, 0),
        "13": _kron3(2, 0, 2),
        "23": _kron3(0, 2, 2),
        "123": -_kron3(3, 3, 3),
    }
    return chains


def _value_sign(chains) -> int:
    """Sign ``s`` in ``v(F123) v(G123) v(H123) = s v(C123)`` for value assignments.

    Every distinct single-qubit operator gets one value; composite chain
    members take the product of their factors.  All assignments must agree.
    """
    singles: dict[bytes, int] = {}
    keys = {}
    for name in "FGHC":
        for k in "123":
            mat = chains[name][k]
            keys[name + k] = singles.setdefault(mat.tobytes(), len(singles))
    signs = set()
    for vals in itertools.product((1, -1), repeat=len(singles)):
        v = {n: vals[i] for n, i in keys.items()}

        def full(c):
            return v[c + "1"] * v[c + "2"] * v[c + "3"]

        signs.add(full("F") * full("G") * full("H") * full("C"))
    if len(signs) != 1:
        raise AssertionError("value assignments disagree on the sign")
    return signs.pop()


@dataclass(frozen=True)
class KochenSpeckerReport:
    chains_commute: dict[str, bool]
    product_identity: bool
    q_plus_c_zero: bool
    pair_identities: bool
    sign_from_operators: int
    sign_from_values: int

    @property
    def contradiction(self) -> bool:
        return self.sign_from_operators != self.sign_from_values


def kochen_specker_demo() -> KochenSpeckerReport:
    """Show that no assignment of values to the chains respects operator products.

    The operator identity gives ``Q123 = F123 G123 H123 = -C123``.  Values
    respecting products within each chain give
    ``F123 G123 H123 = (F1 G2 H3)(F2 H2)(F3 G3)(G1 H1) = C1 C2 C3`` because
    ``F1 = C1``, ``G2 = C2``, ``H3 = C3`` and each of the pairs squares to one,
    while ``C123 = C1 C2 C3``.  The two signs differ.
    """
    chains = kochen_specker_chains()
    commute = {}
    for name, ops in chains.items():
        mats = list(ops.values())
        commute[name] = all(np.allclose(x @ y, y @ x) for x, y in itertools.combinations(mats, 2))
    f, g, h, q, c = (chains[k] for k in "FGHQC")
    product = np.allclose(f["123"] @ g["123"] @ h["123"], q["123"])
    q_c = np.allclose(q["123"] + c["123"], 0)
    eye = np.eye(8)
    pairs = (
        np.allclose(f["2"] @ h["2"], eye)
        and np.allclose(f["3"] @ g["3"], eye)
        and np.allclose(g["1"] @ h["1"], eye)
        and np.allclose(f["1"], c["1"])
        and np.allclose(g["2"], c["2"])
        and np.allclose(h["3"], c["3"])
    )
    # Operator relation: F123 G123 H123 = -C1 C2 C3.
    sign_ops = -1 if np.allclose(f["123"] @ g["123"] @ h["123"], -c["1"] @ c["2"] @ c["3"]) else 1
    sign_vals = _value_sign(chains)
    return KochenSpeckerReport(commute, product, q_c, pairs, sign_ops, sign_vals)
