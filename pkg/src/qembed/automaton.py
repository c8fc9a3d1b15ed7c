"""Probabilistic automata over Ising spins.

Configurations of ``N`` spins are indexed ``0 .. 2**N - 1``.  Spin ``k``
(zero-based) of configuration ``tau`` is ``+1`` when bit ``N-1-k`` is set,
so index 0 is ``(-,-,...,-)`` and the last index is ``(+,+,...,+)``.

Distributions and classical wave functions are plain float arrays indexed by
configuration.  Deterministic updates are :class:`StepOperator` objects that
carry a permutation; general orthogonal steps carry a matrix.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, DomainError, InvalidAutomatonError, UnsupportedError

NORM_TOL = 1e-12


@lru_cache(maxsize=None)
def spin_table(n_spins: int) -> np.ndarray:
    """Array of shape ``(2**n, n)`` with the spin values of every configuration."""
    if n_spins < 1:
        raise DomainError("need at least one spin")
    tau = np.arange(2**n_spins)
    bits = (tau[:, None] >> np.arange(n_spins - 1, -1, -1)[None, :]) & 1
    table = (2 * bits - 1).astype(np.int8)
    table.setflags(write=False)
    return table


def config_index(spins: Sequence[int]) -> int:
    """Configuration index of a spin tuple with entries ``+1``/``-1``."""
    idx = 0
    for s in spins:
        if s not in (1, -1):
            raise DomainError(f"spin values must be +1 or -1, got {s}")
        idx = 2 * idx + (1 if s == 1 else 0)
    return idx


def config_spins(tau: int, n_spins: int) -> tuple[int, ...]:
    if not 0 <= tau < 2**n_spins:
        raise DomainError(f"configuration {tau} outside 0..{2**n_spins - 1}")
    return tuple(int(s) for s in spin_table(n_spins)[tau])


def format_config(tau: int, n_spins: int) -> str:
    return "".join("+" if s > 0 else "-" for s in config_spins(tau, n_spins))


def n_spins_for(size: int) -> int:
    n = int(round(np.log2(size))) if size > 0 else -1
    if n < 1 or 2**n != size:
        raise DimensionError(f"length {size} is not a power of two")
    return n


def validate_distribution(p, tol: float = NORM_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n_spins_for(p.size)
    if p.min() < -tol or abs(p.sum() - 1.0) > tol:
        raise ContractError("weights must be nonnegative and sum to one")
    return p


def validate_wave(q, tol: float = NORM_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n_spins_for(q.size)
    if abs(np.dot(q, q) - 1.0) > tol:
        raise ContractError("classical wave function is not normalized")
    return q


def uniform(n_spins: int) -> np.ndarray:
    return np.full(2**n_spins, 1.0 / 2**n_spins)


def delta(tau: int, n_spins: int) -> np.ndarray:
    p = np.zeros(2**n_spins)
    p[tau] = 1.0
    return p


@dataclass(frozen=True)
class StepOperator:
    """One time step.

    ``perm[tau]`` is the image configuration for unique jumps; ``matrix`` is
    the orthogonal matrix acting on classical wave functions.  For unique
    jumps ``signs`` holds the sign carried by each jump (all ``+1`` for
    plain permutations).
    """

    n_spins: int
    dense: np.ndarray | None = None
    perm: np.ndarray | None = None
    signs: np.ndarray | None = None

    @property
    def matrix(self) -> np.ndarray:
        """Dense orthogonal matrix, built on first use for unique jumps."""
        if self.dense is None:
            size = 2**self.n_spins
            m = np.zeros((size, size))
            m[self.perm, np.arange(size)] = self.signs
            m.setflags(write=False)
            object.__setattr__(self, "dense", m)
        return self.dense

    @property
    def kind(self) -> str:
        return "unique_jump" if self.perm is not None else "general_orthogonal"

    @property
    def inverse_perm(self) -> np.ndarray:
        if self.perm is None:
            raise ContractError("general orthogonal step has no configuration map")
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return inv

    def then(self, other: "StepOperator") -> "StepOperator":
        """Composite step: apply ``self`` first, then ``other``."""
        if self.n_spins != other.n_spins:
            raise DimensionError("steps act on different configuration spaces")
        if self.perm is not None and other.perm is not None:
            perm = other.perm[self.perm]
            signs = self.signs * other.signs[self.perm]
            return _from_perm(self.n_spins, perm, signs)
        return general_step(other.matrix @ self.matrix)


def _from_perm(n_spins: int, perm: np.ndarray, signs: np.ndarray | None = None) -> StepOperator:
    size = 2**n_spins
    perm = np.asarray(perm, dtype=np.int64)
    signs = np.ones(size) if signs is None else np.asarray(signs, dtype=float)
    for a in (perm, signs):
        a.setflags(write=False)
    return StepOperator(n_spins, None, perm, signs)


def unique_jump(n_spins: int, f, signs=None) -> StepOperator:
    """Unique jump step from a bijection of configurations.

    Parameters
    ----------
    n_spins : int
    f : callable or array
        Either an array with ``f[tau]`` the image index, or a callable taking
        a spin tuple and returning the image spin tuple.
    signs : array, optional
        Signs attached to each jump (for signed permutations of wave functions).
    """
    size = 2**n_spins
    if callable(f):
        table = spin_table(n_spins)
        perm = np.array([config_index(f(tuple(int(s) for s in row))) for row in table])
    else:
        perm = np.asarray(f, dtype=np.int64)
    if perm.shape != (size,) or perm.min() < 0 or perm.max() >= size:
        raise InvalidAutomatonError("map must send every configuration into the space")
    if np.unique(perm).size != size:
        raise InvalidAutomatonError("configuration map is not a bijection")
    return _from_perm(n_spins, perm, signs)


def general_step(matrix) -> StepOperator:
    """Orthogonal step without a configuration map (admissible for waves only)."""
    m = np.asarray(matrix, dtype=float)
    n = n_spins_for(m.shape[0])
    if m.shape != (2**n, 2**n) or np.abs(m.T @ m - np.eye(m.shape[0])).max() > NORM_TOL:
        raise ContractError("step operator is not orthogonal")
    m = m.copy()
    m.setflags(write=False)
    return StepOperator(n, m)


def spin_map(n_spins: int, rule: Sequence[tuple[int, int]]) -> StepOperator:
    """Step where new spin ``k`` equals ``sign * old spin src`` for ``rule[k] = (src, sign)``."""
    if len(rule) != n_spins:
        raise DimensionError("need one rule entry per spin")
    srcs = [r[0] for r in rule]
    if sorted(srcs) != list(range(n_spins)) or any(r[1] not in (1, -1) for r in rule):
        raise InvalidAutomatonError("rule must be a signed permutation of spins")
    table = spin_table(n_spins)
    new = table[:, srcs] * np.array([r[1] for r in rule], dtype=np.int8)
    weights = 2 ** np.arange(n_spins - 1, -1, -1)
    return unique_jump(n_spins, ((new + 1) // 2) @ weights)


def flip(n_spins: int, *spins: int) -> StepOperator:
    """Flip the listed spins."""
    rule = [(k, -1 if k in spins else 1) for k in range(n_spins)]
    return spin_map(n_spins, rule)


def conditional_flip(n_spins: int, control: int, target: int, when: int = 1) -> StepOperator:
    """Flip ``target`` when spin ``control`` has value ``when``."""

    def f(s):
        s = list(s)
        if s[control] == when:
            s[target] = -s[target]
        return tuple(s)

    return unique_jump(n_spins, f)


# The six basic updatings of a three-spin chain (zero-based spins 0,1,2 = s1,s2,s3).
_QUBIT_CHAIN_RULES = {
    "T12": [(1, 1), (0, -1), (2, 1)],
    "T21": [(1, -1), (0, 1), (2, 1)],
    "T23": [(0, 1), (2, 1), (1, -1)],
    "T32": [(0, 1), (2, -1), (1, 1)],
    "T31": [(2, -1), (1, 1), (0, 1)],
    "T13": [(2, 1), (1, 1), (0, -1)],
    "T1": [(0, 1), (1, -1), (2, -1)],
    "T2": [(0, -1), (1, 1), (2, -1)],
    "T3": [(0, -1), (1, -1), (2, 1)],
    "TH": [(2, 1), (1, -1), (0, 1)],
    "I": [(0, 1), (1, 1), (2, 1)],
}

BASIC_UPDATINGS = ("T12", "T23", "T31", "T1", "T2", "T3")


def named_step(name: str) -> StepOperator:
    """Named three-spin updating, e.g. ``"T12"`` (s1' = s2, s2' = -s1) or ``"TH"``."""
    try:
        return spin_map(3, _QUBIT_CHAIN_RULES[name])
    except KeyError:
        raise DomainError(f"unknown updating {name!r}; known: {sorted(_QUBIT_CHAIN_RULES)}") from None


def parse_sequence(text: str) -> list[StepOperator]:
    """Parse ``"T12;T31;T1"`` into steps in time order (left first)."""
    names = [t.strip() for t in text.split(";") if t.strip()]
    return [named_step(n) for n in names]


def compose(steps: Sequence[StepOperator], n_spins: int | None = None) -> StepOperator:
    """Single step equivalent to applying ``steps`` in order."""
    if not steps:
        if n_spins is None:
            raise DomainError("empty sequence needs n_spins")
        return unique_jump(n_spins, np.arange(2**n_spins))
    out = steps[0]
    for s in steps[1:]:
        out = out.then(s)
    return out


def evolve_distribution(p, step: StepOperator) -> np.ndarray:
    """Advance a distribution by a unique jump: ``p'[f(tau)] = p[tau]``."""
    p = np.asarray(p, dtype=float)
    if step.perm is None:
        raise ContractError("distributions evolve only under unique jumps; use evolve_wave")
    if p.size != step.perm.size:
        raise DimensionError("distribution and step sizes differ")
    return p[step.inverse_perm]


def evolve_wave(q, step: StepOperator) -> np.ndarray:
    """Advance a classical wave function, ``q' = S q``."""
    q = np.asarray(q, dtype=float)
    if q.size != 2**step.n_spins:
        raise DimensionError("wave and step sizes differ")
    if step.perm is not None:
        out = np.empty_like(q)
        out[step.perm] = step.signs * q
        return out
    return step.matrix @ q


def evolve_classical_density(rho_c, step: StepOperator) -> np.ndarray:
    """Evolve the classical density matrix ``q q^T`` as ``S rho S^T``."""
    return step.matrix @ np.asarray(rho_c, dtype=float) @ step.matrix.T


def classical_expectation(p, observable) -> float:
    """Expectation of an observable given as a value per configuration."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(observable, dtype=float)
    if a.shape != p.shape:
        raise DimensionError("observable must have one value per configuration")
    return float(p @ a)


def spin_observable(n_spins: int, *spins: int) -> np.ndarray:
    """Values of the product of the listed spins on every configuration."""
    t = spin_table(n_spins)
    out = np.ones(2**n_spins)
    for k in spins:
        if not 0 <= k < n_spins:
            raise DomainError(f"spin {k} outside 0..{n_spins - 1}")
        out = out * t[:, k]
    return out


def spin_means(p) -> np.ndarray:
    """Expectation values of all single spins."""
    p = np.asarray(p, dtype=float)
    n = n_spins_for(p.size)
    return p @ spin_table(n).astype(float)


def trajectory_probabilities(p0, steps: Sequence[StepOperator], horizon: int | None = None):
    """Weights of the deterministic trajectories started from every configuration.

    Returns ``(paths, weights)`` where ``paths[tau0]`` lists the visited
    configurations at times ``0..T`` and ``weights[tau0] = p0[tau0]``.
    """
    p0 = validate_distribution(p0, 1e-10)
    n = n_spins_for(p0.size)
    steps = list(steps)
    if horizon is not None:
        if horizon > len(steps):
            raise DomainError("horizon exceeds the number of supplied steps")
        steps = steps[:horizon]
    if any(s.perm is None for s in steps):
        raise UnsupportedError("overall distribution is only guaranteed for unique jumps")
    paths = np.empty((p0.size, len(steps) + 1), dtype=np.int64)
    paths[:, 0] = np.arange(2**n)
    for t, s in enumerate(steps):
        paths[:, t + 1] = s.perm[paths[:, t]]
    return paths, p0.copy()


@dataclass(frozen=True)
class SampleEstimate:
    means: np.ndarray
    mean_errors: np.ndarray
    correlations: np.ndarray
    correlation_errors: np.ndarray
    n_samples: int


def sample_configurations(p, n_samples: int, seed: int) -> np.ndarray:
    """Draw configuration indices with a seeded counter-based generator."""
    p = validate_distribution(p, 1e-10)
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.choice(p.size, size=n_samples, p=p / p.sum())


def sample_estimator(p, n_samples: int, seed: int) -> SampleEstimate:
    """Monte-Carlo estimates of all ``<s_j>`` and ``<s_j s_l>`` with standard errors."""
    draws = sample_configurations(p, n_samples, seed)
    n = n_spins_for(np.asarray(p).size)
    s = spin_table(n)[draws].astype(float)
    means = s.mean(axis=0)
    corr = s.T @ s / n_samples
    denom = max(n_samples - 1, 1)
    mean_err = np.sqrt(np.clip(1.0 - means**2, 0, None) / denom)
    corr_err = np.sqrt(np.clip(1.0 - corr**2, 0, None) / denom)
    return SampleEstimate(means, mean_err, corr, corr_err, n_samples)


def distribution_to_csv(p) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "probability"])
    for tau, v in enumerate(np.asarray(p, dtype=float)):
        w.writerow([tau, repr(float(v))])
    return buf.getvalue()


def distribution_from_csv(text: str) -> np.ndarray:
    rows = list(csv.DictReader(io.StringIO(text)))
    p = np.zeros(len(rows))
    for r in rows:
        p[int(r["tau"])] = float(r["probability"])
    return validate_distribution(p, 1e-10)


def map_from_function(n_spins: int, f: Callable[[tuple[int, ...]], tuple[int, ...]]) -> np.ndarray:
    """Permutation array of a spin-tuple function (no bijection check)."""
    return np.array([config_index(f(tuple(int(s) for s in row))) for row in spin_table(n_spins)])
