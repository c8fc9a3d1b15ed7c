"""Maps from classical spin distributions to quantum density matrices.

Spin layout for the correlation map with ``Q`` qubits: ``3*Q`` spins, the
triplet of qubit ``i`` occupying positions ``3*i, 3*i+1, 3*i+2`` (directions
1, 2, 3).  Generator ``(mu_1, ..., mu_Q)`` is assigned the product of
``s_{mu_i}`` of every qubit ``i`` with ``mu_i != 0``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog, minimize

from . import automaton as am
from .errors import DimensionError, DomainError, UnsupportedError
from .quantum_core import (
    POSITIVITY_TOL,
    bloch_vector,
    check_positive,
    fidelity,
    from_bloch,
    generator_indices,
    generator_label,
    purity,
    validate_density_matrix,
)

REALIZED_FIDELITY = 1.0 - 1e-6


def one_qubit_bloch(p) -> np.ndarray:
    """Spin means ``(<s1>, <s2>, <s3>)`` of a three-spin distribution."""
    p = np.asarray(p, dtype=float)
    if p.size != 8:
        raise DimensionError("one-qubit map needs a distribution over 3 spins")
    return am.spin_means(p)


def one_qubit_map(p) -> np.ndarray:
    """``rho = (1 + <s_k> tau_k) / 2`` for a three-spin distribution."""
    return from_bloch(one_qubit_bloch(p))


def random_constrained_distribution(rng: np.random.Generator) -> np.ndarray:
    """Random three-spin distribution whose spin means lie inside the unit ball.

    A flat Dirichlet draw is mixed with the uniform distribution, which has
    zero means, until the mean vector has a random length in ``[0, 1]``.
    """
    p = rng.dirichlet(np.ones(8))
    norm = np.linalg.norm(one_qubit_bloch(p))
    target = rng.random()
    lam = min(1.0, target / norm) if norm > 0 else 1.0
    return lam * p + (1 - lam) / 8


@dataclass(frozen=True)
class BitQuantumMap:
    """A named rule assigning a spin product to every generator.

    ``assignment[z]`` lists the fundamental spins whose product is the
    observable for generator ``z`` (canonical order).
    """

    name: str
    q: int
    n_spins: int
    assignment: tuple[tuple[int, ...], ...]
    observables: np.ndarray = field(repr=False, compare=False)

    def bloch(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.size != 2**self.n_spins:
            raise DimensionError(f"{self.name} needs {2**self.n_spins} weights, got {p.size}")
        return self.observables @ p

    def __call__(self, p) -> np.ndarray:
        return from_bloch(self.bloch(p))

    def labels(self) -> list[str]:
        return [generator_label(z) for z in generator_indices(self.q)]


def _build(name: str, q: int, n_spins: int, assignment) -> BitQuantumMap:
    obs = np.array([am.spin_observable(n_spins, *a) for a in assignment])
    obs.setflags(write=False)
    return BitQuantumMap(name, q, n_spins, tuple(tuple(a) for a in assignment), obs)


@lru_cache(maxsize=None)
def correlation_map_for(q: int) -> BitQuantumMap:
    """Correlation map over ``3q`` spins (minimal map for ``q = 3``)."""
    if q not in (1, 2, 3):
        raise UnsupportedError("correlation map is supported for Q = 1, 2, 3")
    assignment = [
        tuple(3 * i + (mu - 1) for i, mu in enumerate(z) if mu) for z in generator_indices(q)
    ]
    return _build(f"correlation_Q{q}", q, 3 * q, assignment)


@lru_cache(maxsize=None)
def average_spin_map_for(q: int) -> BitQuantumMap:
    """One independent spin per generator (``4**q - 1`` spins)."""
    if q not in (1, 2):
        raise UnsupportedError("average spin map configuration space is built for Q = 1, 2")
    n = 4**q - 1
    return _build(f"average_spin_Q{q}", q, n, [(k,) for k in range(n)])


def get_map(name: str) -> BitQuantumMap:
    """Look up a map by name: ``one_qubit``, ``correlation_Q2``, ``correlation_Q3``, ``average_spin_Q2``."""
    if name == "one_qubit":
        return correlation_map_for(1)
    if name.startswith("correlation_Q"):
        return correlation_map_for(int(name.removeprefix("correlation_Q")))
    if name.startswith("average_spin"):
        suffix = name.removeprefix("average_spin").removeprefix("_Q") or "2"
        return average_spin_map_for(int(suffix))
    raise DomainError(f"unknown bit-quantum map {name!r}")


def correlation_map(p, q: int = 2) -> np.ndarray:
    """Density matrix assembled from spin means and cross-qubit correlations."""
    return correlation_map_for(q)(p)


def average_spin_map(expectations, q: int = 2) -> np.ndarray:
    """``rho = 2**-Q (1 + <s_z> L_z)`` from one expectation value per generator."""
    e = np.asarray(expectations, dtype=float)
    if e.size != 4**q - 1:
        raise DimensionError(f"need {4**q - 1} expectation values")
    if np.any(np.abs(e) > 1 + 1e-12):
        raise DomainError("spin expectation values must lie in [-1, 1]")
    return from_bloch(e)


@dataclass(frozen=True)
class ConstraintReport:
    min_eigenvalue: float
    purity: float
    bloch_norm2: float
    satisfied: bool
    pure: bool


def constraint_report(rho, tol: float = POSITIVITY_TOL) -> ConstraintReport:
    """Positivity and purity summary; ``bloch_norm2`` is ``rho_z rho_z``."""
    r = check_positive(rho, tol)
    b = bloch_vector(rho)
    return ConstraintReport(r.min_eigenvalue, r.purity, float(b @ b), r.satisfied, r.pure)


def pair_inequality_holds(mean1: float, mean2: float, corr: float, tol: float = 1e-12) -> bool:
    """Classical bound ``-1 + |a + b| <= <ab> <= 1 - |a - b|`` for two spins."""
    return (-1 + abs(mean1 + mean2) - tol <= corr) and (corr <= 1 - abs(mean1 - mean2) + tol)


# Two-qubit spin layout helpers (zero-based positions).
def _s(qubit: int, k: int) -> int:
    return 3 * qubit + (k - 1)


_ANTI_CORRELATED_PLUS = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))


def entangled_family(delta: float) -> np.ndarray:
    """Six-spin distribution realizing the singlet for any ``|delta| <= 1/8``.

    Weight sits on configurations where the second triplet is the negative of
    the first.  First triplets with spin product ``+1`` carry ``1/8 + delta``,
    the others ``1/8 - delta``.
    """
    if abs(delta) > 0.125 + 1e-15:
        raise DomainError("|delta| must not exceed 1/8 (negative probability)")
    p = np.zeros(64)
    for t in am.spin_table(3):
        t = tuple(int(s) for s in t)
        w = 0.125 + delta if t in _ANTI_CORRELATED_PLUS else 0.125 - delta
        p[am.config_index(t + tuple(-s for s in t))] = max(w, 0.0)
    return p


def three_particle_wave(theta: float) -> np.ndarray:
    """Classical wave ``q = q1 x q2 x q3`` over pairs ``(s_k^(1), s_k^(2))``."""
    c, s = np.cos(theta), np.sin(theta)
    a, b = (c + s) / 2, (c - s) / 2
    factors = [np.array([a, b, b, a]), np.array([a, b, b, a]), np.array([0.0, c, s, 0.0])]
    pair_vals = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    q = np.zeros(64)
    for i1, v1 in enumerate(pair_vals):
        for i2, v2 in enumerate(pair_vals):
            for i3, v3 in enumerate(pair_vals):
                spins = (v1[0], v2[0], v3[0], v1[1], v2[1], v3[1])
                q[am.config_index(spins)] = factors[0][i1] * factors[1][i2] * factors[2][i3]
    return q


def three_particle_product(theta: float) -> np.ndarray:
    """Distribution ``q**2`` whose correlation map is the state ``(0, cos, sin, 0)``."""
    return three_particle_wave(theta) ** 2


def singlet() -> np.ndarray:
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


def ghz(q: int = 3) -> np.ndarray:
    psi = np.zeros(2**q, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------------------
# Inverse problem


@dataclass
class SolveResult:
    map: str
    wave: np.ndarray
    fidelity: float
    residual: float
    converged: bool
    iterations: int
    seed: int
    restarts_used: int

    def to_dict(self, target=None) -> dict:
        from .quantum_core import to_json

        out = {
            "map": self.map,
            "fidelity": self.fidelity,
            "residual": self.residual,
            "converged": self.converged,
            "iterations": self.iterations,
            "seed": self.seed,
            "restarts_used": self.restarts_used,
            "wave": [float(x) for x in self.wave],
        }
        if target is not None:
            out["target"] = to_json(target)
        return out


def mapped_fidelity(rho_mapped, target) -> float:
    """Fidelity of a mapped matrix with a target.

    Mapped matrices can fail positivity; their negative eigenvalues are
    clamped and the result renormalized before the fidelity is taken.
    """
    w, v = np.linalg.eigh(0.5 * (rho_mapped + rho_mapped.conj().T))
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return 0.0
    pos = (v * (w / w.sum())) @ v.conj().T
    return fidelity(pos, target)


def _residual_and_grad(x, obs, b_target):
    n2 = x @ x
    p = x * x / n2
    r = obs @ p - b_target
    f = r @ r
    g_p = 2 * obs.T @ r
    # d p_i / d x_j = 2 x_i delta_ij / n2 - 2 x_i^2 x_j / n2^2
    g = 2 * x * g_p / n2 - 2 * x * (g_p @ (x * x)) / n2**2
    return f, g


def _one_restart(obs, b_target, x0, max_iter):
    res = minimize(
        _residual_and_grad,
        x0,
        args=(obs, b_target),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 0.0, "gtol": 1e-15, "maxcor": 30},
    )
    x = res.x / np.linalg.norm(res.x)
    return x, int(res.nit)


def solve_distribution(
    target,
    map_name: str = "correlation_Q2",
    restarts: int = 8,
    seed: int = 0,
    max_iter: int = 2000,
    workers: int = 1,
    stop_on_success: bool = True,
) -> SolveResult:
    """Search for a classical wave whose squared weights map onto ``target``.

    The wave ``q`` is optimized on the unit sphere by minimizing the squared
    distance between mapped and target Bloch vectors.  The best restart by
    fidelity is returned; ``converged`` means fidelity >= 1 - 1e-6.
    """
    target = validate_density_matrix(target)
    bqm = get_map(map_name)
    if target.shape[0] != 2**bqm.q:
        raise DimensionError("target dimension does not match the map")
    b_target = bloch_vector(target)
    obs = np.asarray(bqm.observables, dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(restarts)

    def run(i):
        rng = np.random.Generator(np.random.Philox(seeds[i]))
        x0 = rng.standard_normal(obs.shape[1])
        x, nit = _one_restart(obs, b_target, x0, max_iter)
        rho = bqm(x * x)
        r = bqm.bloch(x * x) - b_target
        return x, nit, mapped_fidelity(rho, target), float(r @ r)

    best = None
    used = 0
    total_it = 0
    if workers > 1 and not stop_on_success:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, range(restarts)))
        used = restarts
        total_it = sum(r[1] for r in results)
        best = max(results, key=lambda r: r[2])
    else:
        for i in range(restarts):
            r = run(i)
            used += 1
            total_it += r[1]
            if best is None or r[2] > best[2]:
                best = r
            if stop_on_success and best[2] >= REALIZED_FIDELITY:
                break
    x, _, fid, resid = best
    return SolveResult(map_name, x, fid, resid, fid >= REALIZED_FIDELITY, total_it, seed, used)


def lp_feasible(target, map_name: str = "correlation_Q2") -> tuple[bool, np.ndarray | None]:
    """Exact feasibility check: is the target Bloch vector a convex mix of map vertices?"""
    bqm = get_map(map_name)
    b = bloch_vector(np.asarray(target, dtype=complex))
    obs = np.asarray(bqm.observables, dtype=float)
    n = obs.shape[1]
    a_eq = np.vstack([obs, np.ones((1, n))])
    b_eq = np.concatenate([b, [1.0]])
    res = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0, (res.x if res.status == 0 else None)


def max_pure_overlap(psi, map_name: str) -> float:
    """Largest ``<psi| rho(p) |psi>`` over all distributions ``p`` (linear in ``p``)."""
    bqm = get_map(map_name)
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    vals = [float(np.real(psi.conj() @ bqm(am.delta(t, bqm.n_spins)) @ psi)) for t in range(2**bqm.n_spins)]
    return max(vals)


__all__ = [
    "BitQuantumMap",
    "ConstraintReport",
    "SolveResult",
    "average_spin_map",
    "average_spin_map_for",
    "constraint_report",
    "correlation_map",
    "correlation_map_for",
    "entangled_family",
    "get_map",
    "ghz",
    "lp_feasible",
    "mapped_fidelity",
    "max_pure_overlap",
    "one_qubit_bloch",
    "one_qubit_map",
    "pair_inequality_holds",
    "purity",
    "random_constrained_distribution",
    "singlet",
    "solve_distribution",
    "three_particle_product",
    "three_particle_wave",
]
