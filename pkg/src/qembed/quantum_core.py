"""Small dense linear algebra for qubit density matrices.

Density matrices and operators are plain complex ``numpy`` arrays of shape
``(2**Q, 2**Q)``.  Bloch vectors are real arrays with ``4**Q - 1`` entries,
ordered by the base-4 digit string of the generator index with the first
qubit as the most significant digit and the all-zero index dropped.  For two
qubits the order is ``01, 02, 03, 10, 11, ..., 33``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError, DimensionError, DomainError

POSITIVITY_TOL = 1e-10
HERMITIAN_TOL = 1e-12

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def n_qubits(dim: int) -> int:
    """Number of qubits for a matrix dimension, or raise if not a power of two."""
    q = int(round(np.log2(dim))) if dim > 0 else -1
    if q < 1 or 2**q != dim:
        raise DimensionError(f"dimension {dim} is not 2**Q with Q >= 1")
    return q


@lru_cache(maxsize=None)
def _tensor_generator(indices: tuple[int, ...]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for mu in indices:
        out = np.kron(out, PAULI[mu])
    return _readonly(out)


def tensor_generator(indices) -> np.ndarray:
    """Return the Kronecker product of Pauli matrices ``tau_mu1 x ... x tau_muQ``.

    Parameters
    ----------
    indices : sequence of int
        Pauli labels in ``0..3``, one per qubit.
    """
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise DomainError("at least one index is required")
    if any(i < 0 or i > 3 for i in idx):
        raise DomainError(f"generator indices must lie in 0..3, got {idx}")
    return _tensor_generator(idx)


@lru_cache(maxsize=None)
def generator_indices(q: int) -> tuple[tuple[int, ...], ...]:
    """All non-identity generator labels for ``q`` qubits in canonical order."""
    if q < 1:
        raise DomainError("need at least one qubit")
    return tuple(itertools.product(range(4), repeat=q))[1:]


def generator_label(indices) -> str:
    return "".join(str(i) for i in indices)


@lru_cache(maxsize=None)
def _generator_stack(q: int) -> np.ndarray:
    return _readonly(np.array([_tensor_generator(z) for z in generator_indices(q)]))


def from_bloch(b) -> np.ndarray:
    """Assemble ``rho = 2**-Q (1 + b_z L_z)`` from a Bloch vector.

    The result is Hermitian with unit trace.  Positivity is not implied and
    must be checked separately with :func:`check_positive`.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 1:
        raise DimensionError("Bloch vector must be one-dimensional")
    q = 0
    while 4 ** (q + 1) - 1 <= b.size:
        q += 1
    if q < 1 or 4**q - 1 != b.size:
        raise DimensionError(f"{b.size} components is not 4**Q - 1")
    dim = 2**q
    rho = np.eye(dim, dtype=complex) + np.tensordot(b, _generator_stack(q), axes=1)
    return rho / dim


def bloch_vector(rho) -> np.ndarray:
    """Bloch components ``rho_z = tr(rho L_z)`` in canonical order."""
    rho = np.asarray(rho, dtype=complex)
    q = n_qubits(rho.shape[0])
    gens = _generator_stack(q)
    # tr(rho L) = sum_ij rho_ij L_ji
    return np.einsum("ij,zji->z", rho, gens).real


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.abs(a - a.conj().T).max() <= tol


def is_unitary(u, tol: float = HERMITIAN_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol


def _require_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def _require_hermitian(a, name: str = "matrix", tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = _require_square(a, name)
    if not is_hermitian(a, tol):
        raise ContractError(f"{name} is not Hermitian within {tol}")
    return a


@dataclass(frozen=True)
class PositivityReport:
    min_eigenvalue: float
    purity: float
    pure: bool
    satisfied: bool


def purity(rho) -> float:
    """Return ``tr(rho^2)``."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.einsum("ij,ji->", rho, rho).real)


def check_positive(rho, tol: float = POSITIVITY_TOL) -> PositivityReport:
    """Eigenvalue-based positivity check of a Hermitian unit-trace matrix."""
    rho = _require_hermitian(rho, "density matrix", max(tol, HERMITIAN_TOL))
    evals = np.linalg.eigvalsh(rho)
    p = purity(rho)
    return PositivityReport(
        min_eigenvalue=float(evals[0]),
        purity=p,
        pure=abs(p - 1.0) <= tol,
        satisfied=bool(evals[0] >= -tol),
    )


def validate_density_matrix(rho, tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array or raise if it is not a density matrix."""
    rho = _require_hermitian(rho, "density matrix", max(tol, HERMITIAN_TOL))
    n_qubits(rho.shape[0])
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ContractError("density matrix trace differs from one")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ContractError("density matrix has a negative eigenvalue")
    return rho


def expectation(rho, a) -> float:
    """Quantum expectation value ``tr(rho A)`` of a Hermitian operator."""
    rho = _require_square(rho, "density matrix")
    a = _require_hermitian(a, "observable")
    if rho.shape != a.shape:
        raise DimensionError(f"shapes {rho.shape} and {a.shape} differ")
    return float(np.einsum("ij,ji->", rho, a).real)


def apply_unitary(rho, u) -> np.ndarray:
    """Conjugate a density matrix, ``U rho U^dagger``."""
    rho = _require_square(rho, "density matrix")
    u = _require_square(u, "unitary")
    if rho.shape != u.shape:
        raise DimensionError(f"shapes {rho.shape} and {u.shape} differ")
    if not is_unitary(u):
        raise ContractError("operator is not unitary within 1e-12")
    return u @ rho @ u.conj().T


def partial_trace(rho, keep, dims=None) -> np.ndarray:
    """Reduced density matrix of the factors listed in ``keep``.

    Parameters
    ----------
    rho : array
        Density matrix of a tensor-product space.
    keep : int or sequence of int
        Zero-based factor indices to keep; all other factors are traced out.
    dims : sequence of int, optional
        Factor dimensions.  Defaults to qubits.
    """
    rho = _require_square(rho, "density matrix")
    if dims is None:
        dims = [2] * n_qubits(rho.shape[0])
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionError("factor dimensions do not multiply to the matrix size")
    keep = [keep] if np.isscalar(keep) else list(keep)
    n = len(dims)
    if not keep or any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise DomainError(f"invalid subsystem selection {keep} for {n} factors")
    keep = sorted(keep)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([dims[i] for i in keep]))
    return red.reshape(d, d)


def _psd_sqrt(rho) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma, tol: float = POSITIVITY_TOL) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Both arguments must be density matrices of equal size; eigenvalues below
    zero by less than ``tol`` are clamped.
    """
    rho = _require_hermitian(rho, "rho", max(tol, HERMITIAN_TOL))
    sigma = _require_hermitian(sigma, "sigma", max(tol, HERMITIAN_TOL))
    if rho.shape != sigma.shape:
        raise DimensionError(f"shapes {rho.shape} and {sigma.shape} differ")
    for m, name in ((rho, "rho"), (sigma, "sigma")):
        if np.linalg.eigvalsh(m)[0] < -tol:
            raise ContractError(f"{name} has a negative eigenvalue beyond {tol}")
    s = _psd_sqrt(rho)
    m = s @ sigma @ s
    m = 0.5 * (m + m.conj().T)
    w = np.clip(np.linalg.eigvalsh(m), 0.0, None)
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``."""
    d = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())


def pure_state(psi) -> np.ndarray:
    """Projector onto a (normalized) state vector."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random density matrix ``C C^dagger / tr(C C^dagger)`` with Gaussian complex C."""
    c = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = c @ c.conj().T
    return m / np.trace(m).real


def spin_operator(k: int, qubit: int, q: int) -> np.ndarray:
    """Spin operator ``S_k`` of one qubit (zero-based ``qubit``) inside ``q`` qubits."""
    if not 1 <= k <= 3:
        raise DomainError("spin direction must be 1, 2 or 3")
    if not 0 <= qubit < q:
        raise DomainError(f"qubit {qubit} out of range for {q} qubits")
    idx = [0] * q
    idx[qubit] = k
    return tensor_generator(idx)


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def to_json(rho) -> str:
    """Serialize a matrix as ``{"dim": n, "entries": [[re, im], ...]}`` (row-major)."""
    rho = _require_square(rho)
    entries = [[float(z.real), float(z.imag)] for z in rho.ravel()]
    return json.dumps({"dim": int(rho.shape[0]), "entries": entries}, sort_keys=True)


def from_json(text: str) -> np.ndarray:
    obj = json.loads(text)
    dim = int(obj["dim"])
    entries = np.asarray(obj["entries"], dtype=float)
    if entries.shape != (dim * dim, 2):
        raise DimensionError("entry count does not match dim")
    return (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
