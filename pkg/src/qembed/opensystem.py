"""A qubit coupled to a single environment qubit.

The full two-qubit system evolves with ``U(t) = exp(i omega t T)``.  The
subsystem is the first qubit; its density matrix obeys
``d rho_bar/dt = -i [H_bar, rho_bar] + F_bar`` where ``F_bar`` depends on the
environment.  Matrix elements ``rho_{ab,cd}`` of the full state use the pair
index ``11 -> 0, 12 -> 1, 21 -> 2, 22 -> 3``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .quantum_core import PAULI, partial_trace, validate_density_matrix

S2 = np.sqrt(2.0)

T_MATRIX = np.array(
    [[1, 0, 0, -1], [0, 1, 0, 0], [0, 0, 1, 0], [-1, 0, 0, -1]],
    dtype=complex,
) / S2
T_MATRIX.setflags(write=False)

_T_EVALS, _T_EVECS = np.linalg.eigh(T_MATRIX)


def _coupling_hamiltonian(omega: float, extra_h=None) -> np.ndarray:
    h = -omega * T_MATRIX
    if extra_h is not None:
        extra_h = np.asarray(extra_h, dtype=complex)
        if extra_h.shape != (2, 2):
            raise DimensionError("extra subsystem Hamiltonian must be 2x2")
        h = h + np.kron(extra_h, np.eye(2))
    return h


def evolution_operator(t: float, omega: float = 1.0, extra_h=None) -> np.ndarray:
    """``exp(-i H t)`` with ``H = -omega T`` plus an optional term on the first qubit."""
    if extra_h is None:
        phases = np.exp(1j * omega * t * _T_EVALS)
        return (_T_EVECS * phases) @ _T_EVECS.conj().T
    w, v = np.linalg.eigh(_coupling_hamiltonian(omega, extra_h))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def full_evolution(rho4, t: float, omega: float = 1.0, extra_h=None) -> np.ndarray:
    """Conjugate the two-qubit state by ``U(t)``."""
    rho4 = validate_density_matrix(rho4)
    if rho4.shape != (4, 4):
        raise DimensionError("full system is two qubits")
    u = evolution_operator(t, omega, extra_h)
    return u @ rho4 @ u.conj().T


def subsystem(rho4) -> np.ndarray:
    """Reduced state of the first qubit."""
    return partial_trace(rho4, 0)


@dataclass(frozen=True)
class SubsystemGenerator:
    Hbar: np.ndarray
    F: np.ndarray
    A: float
    B: complex

    def rate(self, rho_bar) -> np.ndarray:
        """``-i [H_bar, rho_bar] + F_bar``."""
        rho_bar = np.asarray(rho_bar, dtype=complex)
        return -1j * (self.Hbar @ rho_bar - rho_bar @ self.Hbar) + self.F


def subsystem_generator(rho4, omega: float = 1.0, extra_h=None) -> SubsystemGenerator:
    """Subsystem Hamiltonian and environment term for the current full state."""
    r = np.asarray(rho4, dtype=complex)
    if r.shape != (4, 4):
        raise DimensionError("full system is two qubits")
    a = float(-S2 * omega * r[0, 3].imag)
    b = complex(1j * omega / S2 * (r[1, 0] + r[1, 3] - r[0, 2] - r[3, 2]))
    hbar = -omega / (2 * S2) * PAULI[3]
    if extra_h is not None:
        hbar = hbar + np.asarray(extra_h, dtype=complex)
    f = np.array([[a, b], [np.conj(b), -a]], dtype=complex)
    return SubsystemGenerator(hbar, f, a, b)


def bloch_components(rho_bar) -> np.ndarray:
    """``(rho_1, rho_2, rho_3)`` of a one-qubit density matrix."""
    r = np.asarray(rho_bar, dtype=complex)
    return np.array([2 * r[0, 1].real, -2 * r[0, 1].imag, (r[0, 0] - r[1, 1]).real])


def purity(rho_bar) -> float:
    """``4 |rho_12|^2 + (rho_11 - rho_22)^2``; equals 1 for pure states."""
    return float(np.sum(bloch_components(rho_bar) ** 2))


def purity_rate(rho_bar, a: float, b: complex) -> float:
    """Time derivative of the purity induced by the environment term."""
    r1, r2, r3 = bloch_components(rho_bar)
    b = complex(b)
    return float(4 * (r1 * b.real - r2 * b.imag + r3 * a))


def trajectory(rho0, times, omega: float = 1.0, extra_h=None) -> list[dict]:
    """Rows ``(t, P, rho1, rho2, rho3, A, ReB, ImB)`` along the full evolution."""
    rows = []
    for t in times:
        rho4 = full_evolution(rho0, t, omega, extra_h)
        rb = subsystem(rho4)
        gen = subsystem_generator(rho4, omega, extra_h)
        r1, r2, r3 = bloch_components(rb)
        rows.append(
            {
                "t": float(t),
                "P": purity(rb),
                "rho1": float(r1),
                "rho2": float(r2),
                "rho3": float(r3),
                "A": gen.A,
                "ReB": gen.B.real,
                "ImB": gen.B.imag,
            }
        )
    return rows


TRAJECTORY_COLUMNS = ("t", "P", "rho1", "rho2", "rho3", "A", "ReB", "ImB")


def trajectory_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TRAJECTORY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(float(row[k])) for k in TRAJECTORY_COLUMNS})
    return buf.getvalue()


def product_state() -> np.ndarray:
    """Both qubits up."""
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = 1
    return r


def entangled_state() -> np.ndarray:
    """``(|11> - |22>) / sqrt 2``."""
    psi = np.array([1, 0, 0, -1], dtype=complex) / S2
    return np.outer(psi, psi.conj())
