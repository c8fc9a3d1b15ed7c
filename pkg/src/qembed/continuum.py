"""Continuous classical variables that realize a qubit.

Three pictures are covered: Ising spins on a circle (half-circle binning and
the rotating clock), a distribution on three-dimensional space whose spin
expectations follow the Bloch vector for every direction, and the
continuous-time von Neumann equation for the resulting qubit.

Rotations follow the qubit convention: ``rotation_matrix(b, gamma)`` is the
Bloch-vector map of ``U = exp(i gamma b.tau / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .errors import DomainError, NumericalError
from .quantum_core import PAULI, bloch_vector, from_bloch, validate_density_matrix

UNIT_TOL = 1e-12
GL_NODES = 256


def _unit(v, name: str = "direction") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
        raise DomainError(f"{name} must be a unit vector, |{name}| = {np.linalg.norm(v)}")
    return v


@lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _gl(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int = GL_NODES) -> float:
    if b <= a:
        return 0.0
    x, w = _gauss_legendre(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.sum(w * f(mid + half * x)))


# ---------------------------------------------------------------------------
# Spins on a circle


def _sign(x):
    return np.where(np.asarray(x) >= 0, 1, -1)


def direction_spin(e, phi):
    """Ising spin ``s(e; phi)``: +1 if the point at angle ``phi`` lies in the
    half-circle (or half-space) around ``e``, else -1.

    ``phi`` is an angle for two-component ``e`` or a point (last axis of size
    3) for three-component ``e``.
    """
    e = _unit(e)
    if e.size == 2:
        phi = np.asarray(phi, dtype=float)
        return _sign(e[0] * np.cos(phi) + e[1] * np.sin(phi))
    pts = np.asarray(phi, dtype=float)
    return _sign(pts @ e)


def half_circle_spins(phi):
    """Cartesian spins ``(s1, s2)``: right/left and upper/lower half of the circle."""
    phi = np.asarray(phi, dtype=float)
    return _sign(np.cos(phi)), _sign(np.sin(phi))


def circle_bin(phi) -> str:
    """Bin label I..IV from the two Cartesian spins."""
    s1, s2 = half_circle_spins(phi)
    return {(1, 1): "I", (1, -1): "II", (-1, 1): "III", (-1, -1): "IV"}[(int(s1), int(s2))]


# ---------------------------------------------------------------------------
# Quantum clock


@dataclass(frozen=True)
class ClockState:
    """Pointer angle ``beta`` and angular frequency ``omega``.

    The distribution on the circle is ``cos(phi - beta) Theta(cos(phi - beta)) / 2``
    and the qubit Bloch vector is ``(cos beta, 0, sin beta)``.
    """

    beta: float
    omega: float = 1.0

    def density(self, phi):
        c = np.cos(np.asarray(phi, dtype=float) - self.beta)
        return 0.5 * c * (c > 0)

    def density_matrix(self) -> np.ndarray:
        return 0.5 * (PAULI[0] + np.cos(self.beta) * PAULI[1] + np.sin(self.beta) * PAULI[3])


def clock_expectation(state: ClockState, psi: float) -> float:
    """``<s(psi)>`` by quadrature over the circle.

    The support ``|phi - beta| < pi/2`` is split where ``s(psi)`` changes sign.
    """
    lo, hi = state.beta - np.pi / 2, state.beta + np.pi / 2
    cuts = [lo, hi]
    for k in range(-3, 4):
        c = psi + np.pi / 2 + k * np.pi
        if lo < c < hi:
            cuts.append(c)
    cuts.sort()
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        s = float(direction_spin([np.cos(psi), np.sin(psi)], 0.5 * (a + b)))
        total += s * _gl(state.density, a, b)
    return total


def clock_evolve(state: ClockState, dt: float) -> ClockState:
    """Advance the pointer: ``beta -> beta + omega dt``."""
    return replace(state, beta=state.beta + state.omega * dt)


def clock_unitary(t: float, omega: float = 1.0) -> np.ndarray:
    """``exp(i omega t tau_2 / 2)``, the qubit evolution of the clock."""
    return expm(0.5j * omega * t * PAULI[2])


def clock_hamiltonian(omega: float = 1.0) -> np.ndarray:
    return -0.5 * omega * PAULI[2]


# ---------------------------------------------------------------------------
# Sphere model


def _gaussian_profile(r):
    return np.exp(-0.5 * np.asarray(r) ** 2)


RADIAL_PROFILES = ("shell", "gaussian")


@lru_cache(maxsize=None)
def radial_normalization(profile: str) -> float:
    """Constant ``c`` such that ``c * pbar(r)`` gives a normalized distribution.

    With the angular weight integrating to ``pi`` over a hemisphere, the
    condition is ``c * pi * int r^3 pbar(r) dr = 1``.  The shell profile is a
    delta at ``r = 1``.
    """
    if profile == "shell":
        moment = 1.0
    elif profile == "gaussian":
        moment, _ = quad(lambda r: r**3 * _gaussian_profile(r), 0, np.inf, epsabs=1e-14)
    else:
        raise DomainError(f"unknown radial profile {profile!r}; known: {RADIAL_PROFILES}")
    return 1.0 / (np.pi * moment)


@dataclass(frozen=True)
class SphereState:
    """Direction ``rho`` of the distribution ``pbar(r) (phi.rho) Theta(phi.rho)``."""

    rho: tuple[float, float, float]
    profile: str = "gaussian"

    def __post_init__(self):
        _unit(self.rho, "rho")
        radial_normalization(self.profile)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.rho, dtype=float)

    def density_matrix(self) -> np.ndarray:
        return from_bloch(self.vector)


def _frame(rho: np.ndarray):
    """Orthonormal ``(u, v, rho)`` with ``rho`` as the third axis."""
    helper = np.array([1.0, 0, 0]) if abs(rho[0]) < 0.9 else np.array([0, 1.0, 0])
    u = np.cross(helper, rho)
    u /= np.linalg.norm(u)
    return u, np.cross(rho, u), rho


def _radial_integral(profile: str) -> float:
    if profile == "shell":
        return 1.0
    x, w = _gauss_legendre(GL_NODES)
    # r in (0, 40) covers the Gaussian to machine precision
    r = 20.0 * (x + 1)
    return float(20.0 * np.sum(w * r**3 * _gaussian_profile(r)))


def _angular_integral(rho: np.ndarray, e: np.ndarray) -> float:
    """``int dOmega (n.rho) Theta(n.rho) sign(n.e)`` over the unit sphere."""
    u, v, w = _frame(rho)
    a, c = float(e @ u), float(e @ w)
    b = float(e @ v)
    # e . n = sin(theta) (a cos(az) + b sin(az)) + c cos(theta)
    amp = np.hypot(a, b)
    phase = np.arctan2(b, a)
    x, wts = _gauss_legendre(GL_NODES)

    def theta_integral(az: float) -> float:
        k = amp * np.cos(az - phase)
        cuts = [0.0, np.pi / 2]
        if k != 0:
            root = np.arctan2(-c, k) % np.pi
            if 0 < root < np.pi / 2:
                cuts.insert(1, root)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (lo + hi)
            s = 1.0 if np.sin(mid) * k + c * np.cos(mid) >= 0 else -1.0
            half = 0.5 * (hi - lo)
            th = 0.5 * (lo + hi) + half * x
            total += s * half * np.sum(wts * np.cos(th) * np.sin(th))
        return total

    az_cuts = [phase - np.pi / 2, phase + np.pi / 2, phase + 3 * np.pi / 2]
    total = 0.0
    for lo, hi in zip(az_cuts[:-1], az_cuts[1:]):
        half = 0.5 * (hi - lo)
        az = 0.5 * (lo + hi) + half * x
        total += half * np.sum(wts * np.array([theta_integral(t) for t in az]))
    return total


@dataclass(frozen=True)
class SphereEstimate:
    value: float
    stderr: float
    method: str


def sphere_expectation(state: SphereState, e, method: str = "quadrature", n: int = 10**6, seed: int = 0):
    """Expectation of the spin ``s(e)`` over the sphere distribution.

    ``method="quadrature"`` integrates the radial and angular parts with
    Gauss-Legendre rules; ``method="monte_carlo"`` samples ``n`` points.
    """
    e = _unit(e, "e")
    rho = state.vector
    if method == "quadrature":
        norm = radial_normalization(state.profile)
        value = norm * _radial_integral(state.profile) * _angular_integral(rho, e)
        return SphereEstimate(float(value), 0.0, method)
    if method == "monte_carlo":
        pts = sample_sphere(state, n, seed)
        s = direction_spin(e, pts).astype(float)
        return SphereEstimate(float(s.mean()), float(s.std(ddof=1) / np.sqrt(n)), method)
    raise DomainError(f"unknown method {method!r}")


def sample_sphere(state: SphereState, n: int, seed: int) -> np.ndarray:
    """Points in three dimensions drawn from the sphere distribution."""
    rng = np.random.Generator(np.random.Philox(seed))
    u, v, w = _frame(state.vector)
    cos_t = np.sqrt(rng.random(n))
    sin_t = np.sqrt(1 - cos_t**2)
    az = rng.uniform(0, 2 * np.pi, n)
    dirs = (
        np.outer(sin_t * np.cos(az), u) + np.outer(sin_t * np.sin(az), v) + np.outer(cos_t, w)
    )
    if state.profile == "shell":
        r = np.ones(n)
    else:
        # density of r proportional to r^3 exp(-r^2/2): r^2/2 ~ Gamma(2)
        r = np.sqrt(2 * rng.gamma(2.0, 1.0, n))
    return dirs * r[:, None]


# ---------------------------------------------------------------------------
# Rotations


def rotation_matrix(b, gamma: float) -> np.ndarray:
    """Bloch rotation induced by ``exp(i gamma b.tau / 2)``.

    This is a rotation by ``-gamma`` about ``b`` in the right-handed sense.
    """
    b = _unit(b, "axis")
    k = np.array([[0, -b[2], b[1]], [b[2], 0, -b[0]], [-b[1], b[0], 0]])
    a = -gamma
    return np.eye(3) + np.sin(a) * k + (1 - np.cos(a)) * (k @ k)


def rotation_unitary(b, gamma: float) -> np.ndarray:
    b = _unit(b, "axis")
    return expm(0.5j * gamma * sum(b[i] * PAULI[i + 1] for i in range(3)))


@dataclass(frozen=True)
class RotationResult:
    state: SphereState
    unitary_mismatch: float


def rotate_update(state: SphereState, b, gamma: float) -> RotationResult:
    """Rotate the distribution and compare against unitary conjugation."""
    r = rotation_matrix(b, gamma)
    new = r @ state.vector
    new /= np.linalg.norm(new)
    u = rotation_unitary(b, gamma)
    expected = u @ state.density_matrix() @ u.conj().T
    mismatch = float(np.abs(from_bloch(new) - expected).max())
    return RotationResult(replace(state, rho=tuple(float(x) for x in new)), mismatch)


# ---------------------------------------------------------------------------
# Continuous-time evolution


def spin_hamiltonian(omega: float, b) -> np.ndarray:
    """``H = -(omega / 2) b.tau``."""
    b = np.asarray(b, dtype=float)
    return -0.5 * omega * sum(b[i] * PAULI[i + 1] for i in range(3))


def _as_function(x):
    return x if callable(x) else (lambda t, _x=x: _x)


PURITY_DRIFT_TOL = 1e-6


def schrodinger_integrate(rho0, omega, b, t_final: float, dt: float | None = None, t0: float = 0.0, conjugate=False):
    """Integrate ``i d rho/dt = [H, rho]`` with ``H = -(omega/2) b.tau`` by RK4.

    ``omega`` and ``b`` may be constants or functions of time.  With
    ``conjugate=True`` the complex-conjugate Hamiltonian is used.

    Raises
    ------
    NumericalError
        If the purity drifts by more than ``1e-6``.
    """
    rho = validate_density_matrix(rho0).astype(complex)
    if rho.shape != (2, 2):
        raise DomainError("von Neumann integrator is for one qubit")
    w_f, b_f = _as_function(omega), _as_function(b)
    if dt is None:
        scale = max(abs(float(w_f(t))) for t in np.linspace(t0, t0 + t_final, 11))
        dt = 1e-3 / max(scale, 1e-12)
    if dt <= 0:
        raise DomainError("dt must be positive")
    if t_final < 0:
        raise DomainError("t_final must be nonnegative")

    def ham(t):
        bt = np.asarray(b_f(t), dtype=float)
        if abs(np.linalg.norm(bt) - 1) > 1e-9:
            raise DomainError("b(t) must be a unit vector")
        h = spin_hamiltonian(float(w_f(t)), bt)
        return h.conj() if conjugate else h

    def rhs(t, r):
        h = ham(t)
        return -1j * (h @ r - r @ h)

    p0 = float(np.trace(rho @ rho).real)
    n_steps = max(1, int(np.ceil(t_final / dt - 1e-9)))
    h_step = t_final / n_steps
    t = t0
    for _ in range(n_steps):
        k1 = rhs(t, rho)
        k2 = rhs(t + h_step / 2, rho + h_step / 2 * k1)
        k3 = rhs(t + h_step / 2, rho + h_step / 2 * k2)
        k4 = rhs(t + h_step, rho + h_step * k3)
        rho = rho + h_step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h_step
    drift = abs(float(np.trace(rho @ rho).real) - p0)
    if drift > PURITY_DRIFT_TOL:
        raise NumericalError(f"purity drifted by {drift:.3g}; reduce the step size")
    return rho


def piecewise_integrate(rho0, omega: float, segments, dt: float | None = None) -> np.ndarray:
    """Integrate through constant-axis segments ``[(b, duration), ...]`` in order.

    Each segment starts a fresh integration so no step straddles a switch.
    """
    rho = np.asarray(rho0, dtype=complex)
    for b, duration in segments:
        rho = schrodinger_integrate(rho, omega, _unit(b, "axis"), duration, dt)
    return rho


def cpt_check(rho0, omega, b, t_final: float, dt: float | None = None) -> float:
    """Deviation from the time-reversal symmetry of the qubit evolution.

    The final state is reflected (``rho_2 -> -rho_2``, i.e. complex
    conjugated) and evolved backwards in time under the conjugate
    Hamiltonian.  The result should be the reflected initial state.
    """
    w_f, b_f = _as_function(omega), _as_function(b)
    rho_t = schrodinger_integrate(rho0, w_f, b_f, t_final, dt)
    back = schrodinger_integrate(
        rho_t.conj(),
        lambda s: w_f(t_final - s),
        lambda s: b_f(t_final - s),
        t_final,
        dt,
        conjugate=True,
    )
    return float(np.abs(back - np.asarray(rho0, dtype=complex).conj()).max())


# ---------------------------------------------------------------------------
# One fermionic mode

ANNIHILATION = np.array([[0, 0], [1, 0]], dtype=complex)
CREATION = ANNIHILATION.conj().T
NUMBER = CREATION @ ANNIHILATION


def fermion_observables(rho) -> dict[str, float]:
    """Occupation number and the two quadrature spins of one fermionic mode."""
    rho = validate_density_matrix(rho)
    ops = {
        "n": NUMBER,
        "a_plus_adag": ANNIHILATION + CREATION,
        "i_a_minus_adag": 1j * (ANNIHILATION - CREATION),
    }
    return {k: float(np.trace(rho @ v).real) for k, v in ops.items()}


def fermion_hamiltonian(omega: float) -> np.ndarray:
    """``omega (n - 1/2)``."""
    return omega * (NUMBER - 0.5 * np.eye(2))


def canonical_anticommutator() -> np.ndarray:
    return CREATION @ ANNIHILATION + ANNIHILATION @ CREATION


def bloch(rho) -> np.ndarray:
    return bloch_vector(rho)
