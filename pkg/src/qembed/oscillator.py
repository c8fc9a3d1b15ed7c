"""Two-color classical particle in a harmonic potential.

A complex phase-space wave ``phi(z, p)`` (real part: first color, imaginary
part: second color) evolves with the Liouville equation
``d phi/dt = -(p/m) d phi/dz + c z d phi/dp``.  Waves built from a pair of
oscillator eigenfunctions ``psi_n`` and ``psi_n'`` oscillate as
``exp(-i omega (n - n') t)``.

Grids are periodic boxes; derivatives are spectral.  Waves are normalized
so that ``sum |phi|^2 dz dp = 1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from math import factorial

import numpy as np
from scipy.special import eval_hermite

from .errors import DomainError, NumericalError

MODE_CUTOFF = 6
BOUNDARY_TOL = 1e-6
ALIAS_TOL = 1e-6
NORM_DRIFT_TOL = 1e-3


@dataclass(frozen=True)
class PhaseGrid:
    """Periodic box ``[-z_max, z_max) x [-p_max, p_max)`` with ``n_z x n_p`` nodes."""

    n_z: int = 128
    n_p: int = 128
    z_max: float = 8.0
    p_max: float = 8.0

    @property
    def z(self) -> np.ndarray:
        return -self.z_max + self.dz * np.arange(self.n_z)

    @property
    def p(self) -> np.ndarray:
        return -self.p_max + self.dp * np.arange(self.n_p)

    @property
    def dz(self) -> float:
        return 2 * self.z_max / self.n_z

    @property
    def dp(self) -> float:
        return 2 * self.p_max / self.n_p

    def mesh(self):
        return np.meshgrid(self.z, self.p, indexing="ij")


@dataclass(frozen=True)
class ModePair:
    """Eigenfunction labels for the two factors, with ``omega^2 = c / m``."""

    n: int
    n_prime: int
    m: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for k in (self.n, self.n_prime):
            if not 0 <= k <= MODE_CUTOFF:
                raise DomainError(f"mode index {k} outside 0..{MODE_CUTOFF}")
        if self.m <= 0 or self.c <= 0:
            raise DomainError("mass and spring constant must be positive")

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.c / self.m))

    @property
    def frequency(self) -> float:
        """``omega (n - n')``, the eigenvalue of the Liouville Hamiltonian."""
        return self.omega * (self.n - self.n_prime)

    def energy(self) -> float:
        return (self.n + 0.5) * self.omega


@dataclass(frozen=True)
class PhaseSpaceWave:
    grid: PhaseGrid
    amplitudes: np.ndarray
    m: float = 1.0
    c: float = 1.0
    t: float = 0.0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dz * self.grid.dp)

    def probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        """Color densities ``(Re phi)^2`` and ``(Im phi)^2``."""
        return self.amplitudes.real**2, self.amplitudes.imag**2

    def color_populations(self) -> tuple[float, float]:
        w1, w2 = self.probabilities()
        area = self.grid.dz * self.grid.dp
        return float(w1.sum() * area), float(w2.sum() * area)


# ---------------------------------------------------------------------------
# Oscillator eigenfunctions


def _hermite_function(n: int, m: float, omega: float, x) -> np.ndarray:
    a = m * omega
    xi = np.sqrt(a) * np.asarray(x, dtype=float)
    pref = (a / np.pi) ** 0.25 / np.sqrt(2.0**n * factorial(n))
    return pref * eval_hermite(n, xi) * np.exp(-0.5 * xi**2)


def _spectral_derivative(f: np.ndarray, d: float, axis: int, order: int = 1) -> np.ndarray:
    n = f.shape[axis]
    k = 2 * np.pi * np.fft.fftfreq(n, d=d)
    shape = [1] * f.ndim
    shape[axis] = n
    factor = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        # the Nyquist mode has no well-defined odd derivative
        factor[n // 2] = 0
    return np.fft.ifft(np.fft.fft(f, axis=axis) * factor.reshape(shape), axis=axis)


def hermite_mode(n: int, m: float, omega: float, x) -> np.ndarray:
    """Normalized eigenfunction ``psi_n`` of ``-(1/2m) d^2/dx^2 + (m omega^2/2) x^2``.

    Raises
    ------
    DomainError
        If ``n`` exceeds the mode cutoff or the grid does not contain the mode.
    """
    if not 0 <= n <= MODE_CUTOFF:
        raise DomainError(f"mode index {n} outside 0..{MODE_CUTOFF}")
    x = np.asarray(x, dtype=float)
    psi = _hermite_function(n, m, omega, x)
    if x.ndim == 1 and x.size > 1:
        edge = max(abs(psi[0]), abs(psi[-1]))
        if edge > BOUNDARY_TOL:
            raise DomainError(f"grid too small for mode {n}: boundary amplitude {edge:.2e}")
    return psi


def hermite_residual(n: int, m: float, omega: float, x) -> float:
    """``max |H psi_n - E_n psi_n|`` with a spectral second derivative on ``x``."""
    x = np.asarray(x, dtype=float)
    psi = hermite_mode(n, m, omega, x)
    d2 = _spectral_derivative(psi.astype(complex), x[1] - x[0], 0, 2).real
    h_psi = -d2 / (2 * m) + 0.5 * m * omega**2 * x**2 * psi
    return float(np.abs(h_psi - (n + 0.5) * omega * psi).max())


# ---------------------------------------------------------------------------
# Phase-space waves


def wave_from_functions(psi, psi_tilde, grid: PhaseGrid = PhaseGrid(), m: float = 1.0, c: float = 1.0):
    """``phi(z, p) = int dr exp(-i p r) psi(z + r/2) conj(psi_tilde(z - r/2))``.

    ``psi`` and ``psi_tilde`` are callables.  The ``r`` integral is a discrete
    Fourier sum on the grid conjugate to ``p``.

    Raises
    ------
    NumericalError
        If more than ``1e-6`` of the weight sits in the outermost momentum band.
    """
    dr = 2 * np.pi / (grid.n_p * grid.dp)
    r = dr * (np.arange(grid.n_p) - grid.n_p // 2)
    z = grid.z
    f = psi(z[:, None] + r[None, :] / 2) * np.conj(psi_tilde(z[:, None] - r[None, :] / 2))
    kernel = np.exp(-1j * np.outer(r, grid.p))
    amp = (f @ kernel) * dr
    weight = np.abs(amp) ** 2
    band = max(1, grid.n_p // 16)
    outer = weight[:, :band].sum() + weight[:, -band:].sum()
    if outer > ALIAS_TOL * weight.sum():
        raise NumericalError("momentum grid too coarse: weight in the outermost band exceeds 1e-6")
    amp = amp / np.sqrt(weight.sum() * grid.dz * grid.dp)
    return PhaseSpaceWave(grid, amp, m, c)


def wave_from_modes(pair: ModePair, grid: PhaseGrid = PhaseGrid()) -> PhaseSpaceWave:
    """Phase-space wave of the eigenfunction pair ``(psi_n, psi_n')``."""
    w = pair.omega
    hermite_mode(pair.n, pair.m, w, grid.z)
    hermite_mode(pair.n_prime, pair.m, w, grid.z)
    return wave_from_functions(
        lambda x: _hermite_function(pair.n, pair.m, w, x),
        lambda x: _hermite_function(pair.n_prime, pair.m, w, x),
        grid,
        pair.m,
        pair.c,
    )


def stable_dt(grid: PhaseGrid, m: float, c: float) -> float:
    return min(grid.dz * m / grid.p_max, grid.dp / (c * grid.z_max)) / 4


def _liouville_rhs(phi, zz, pp, grid, m, c):
    dz = _spectral_derivative(phi, grid.dz, -2)
    dp = _spectral_derivative(phi, grid.dp, -1)
    return -(pp / m) * dz + c * zz * dp


def _rk4(phi, zz, pp, grid, m, c, h):
    k1 = _liouville_rhs(phi, zz, pp, grid, m, c)
    k2 = _liouville_rhs(phi + h / 2 * k1, zz, pp, grid, m, c)
    k3 = _liouville_rhs(phi + h / 2 * k2, zz, pp, grid, m, c)
    k4 = _liouville_rhs(phi + h * k3, zz, pp, grid, m, c)
    return phi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _steps(t_final: float, dt: float) -> tuple[int, float]:
    if t_final < 0:
        raise DomainError("t_final must be nonnegative")
    if dt <= 0:
        raise DomainError("dt must be positive")
    n = max(1, int(np.ceil(t_final / dt - 1e-9)))
    return n, t_final / n


def liouville_evolve(wave: PhaseSpaceWave, t_final: float, dt: float | None = None) -> PhaseSpaceWave:
    """Advance the wave by ``t_final`` with fourth-order Runge-Kutta steps.

    Raises
    ------
    NumericalError
        If the norm drifts by more than ``1e-3``.
    """
    g = wave.grid
    dt = stable_dt(g, wave.m, wave.c) if dt is None else dt
    n, h = _steps(t_final, dt)
    zz, pp = g.mesh()
    phi = wave.amplitudes.astype(complex)
    n0 = wave.norm()
    for _ in range(n):
        phi = _rk4(phi, zz, pp, g, wave.m, wave.c, h)
    out = replace(wave, amplitudes=phi, t=wave.t + t_final)
    if abs(out.norm() - n0) > NORM_DRIFT_TOL * n0:
        raise NumericalError("norm drift above 1e-3; reduce the time step")
    return out


# ---------------------------------------------------------------------------
# Observables


def double_position_density(wave: PhaseSpaceWave) -> tuple[np.ndarray, np.ndarray]:
    """Quantum density matrix on the ``z`` grid after integrating out ``y``.

    Returns ``(x, rho)`` where ``rho[a, b] = rho_Q(x_a, x_b) dx`` so that the
    matrix has unit trace.
    """
    g = wave.grid
    n = g.n_z
    # phi on the half-step grid in z by spectral interpolation
    spec = np.fft.fft(wave.amplitudes, axis=0)
    k = np.fft.fftfreq(n, d=g.dz) * 2 * np.pi
    shifted = np.fft.ifft(spec * np.exp(1j * k * g.dz / 2)[:, None], axis=0)
    fine = np.empty((2 * n, g.n_p), dtype=complex)
    fine[0::2] = wave.amplitudes
    fine[1::2] = shifted
    d = np.arange(-(n - 1), n)
    kernel = np.exp(1j * np.outer(g.p, d * g.dz))
    table = fine @ kernel
    a = np.arange(n)
    psi = table[a[:, None] + a[None, :], a[:, None] - a[None, :] + n - 1]
    rho = psi @ psi.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return g.z, rho / np.trace(rho).real


def _area(wave):
    return wave.grid.dz * wave.grid.dp


def _apply_h(wave: PhaseSpaceWave, tilde: bool = False) -> np.ndarray:
    g = wave.grid
    zz, pp = g.mesh()
    phi = wave.amplitudes
    dz1 = _spectral_derivative(phi, g.dz, 0)
    dz2 = _spectral_derivative(phi, g.dz, 0, 2)
    dp1 = _spectral_derivative(phi, g.dp, 1)
    dp2 = _spectral_derivative(phi, g.dp, 1, 2)
    s = -1 if tilde else 1
    kinetic = pp**2 * phi - 0.25 * dz2 - s * 1j * pp * dz1
    potential = zz**2 * phi - 0.25 * dp2 + s * 1j * zz * dp1
    return kinetic / (2 * wave.m) + 0.5 * wave.c * potential


def _mean(wave, op_phi) -> float:
    num = np.sum(np.conj(wave.amplitudes) * op_phi) * _area(wave)
    return float(num.real / wave.norm())


def quantum_energy_expectation(wave: PhaseSpaceWave) -> float:
    """``<H_Q>`` from the phase-space form of the quantum energy operator."""
    return _mean(wave, _apply_h(wave))


def conjugate_energy_expectation(wave: PhaseSpaceWave) -> float:
    """``<H~_Q>``, the energy of the second factor."""
    return _mean(wave, _apply_h(wave, tilde=True))


def position_expectation(wave: PhaseSpaceWave) -> float:
    """``<X_Q>`` with ``X_Q = z + (i/2) d/dp``."""
    zz, _ = wave.grid.mesh()
    op = zz * wave.amplitudes + 0.5j * _spectral_derivative(wave.amplitudes, wave.grid.dp, 1)
    return _mean(wave, op)


# ---------------------------------------------------------------------------
# Spectrum


@dataclass(frozen=True)
class SpectrumResult:
    pair: ModePair
    frequency: float
    expected: float
    bin_width: float

    @property
    def matches(self) -> bool:
        return abs(self.frequency - self.expected) <= self.bin_width + 1e-12


SPECTRUM_OBSERVABLES = ("overlap", "color_population")


def oscillation_spectrum(
    pairs,
    grid: PhaseGrid = PhaseGrid(64, 64),
    periods: int = 2,
    observable: str = "overlap",
    samples_per_period: int = 64,
) -> list[SpectrumResult]:
    """Dominant angular frequency of each mode pair's evolution.

    ``observable="overlap"`` uses ``<phi(0)|phi(t)>``, which carries the sign
    of the frequency.  ``"color_population"`` uses the total first-color
    weight, folded onto nonnegative frequencies; it is reported as 0 when the
    weight does not move (as for any single mode pair, whose wave satisfies
    ``sum phi^2 = 0``).

    All pairs are evolved together; they must share ``m`` and ``c``.
    """
    pairs = list(pairs)
    if not pairs:
        return []
    if observable not in SPECTRUM_OBSERVABLES:
        raise DomainError(f"unknown observable {observable!r}")
    if periods < 2:
        raise DomainError("need at least two periods to resolve the spectrum")
    m, c = pairs[0].m, pairs[0].c
    if any(p.m != m or p.c != c for p in pairs):
        raise DomainError("pairs must share mass and spring constant")
    omega = pairs[0].omega
    waves = [wave_from_modes(p, grid) for p in pairs]
    phi0 = np.stack([w.amplitudes for w in waves])
    area = grid.dz * grid.dp
    period = 2 * np.pi / omega
    n_samples = periods * samples_per_period
    sample_dt = period / samples_per_period
    n_sub, h = _steps(sample_dt, stable_dt(grid, m, c))
    zz, pp = grid.mesh()

    def measure(phi):
        if observable == "overlap":
            return np.sum(np.conj(phi0) * phi, axis=(1, 2)) * area
        return np.sum(phi.real**2, axis=(1, 2)) * area

    phi = phi0.copy()
    series = [measure(phi)]
    for _ in range(n_samples - 1):
        for _ in range(n_sub):
            phi = _rk4(phi, zz, pp, grid, m, c, h)
        series.append(measure(phi))
    series = np.array(series)
    times = sample_dt * np.arange(n_samples)
    duration = n_samples * sample_dt
    bin_width = 2 * np.pi / duration
    kmax = samples_per_period // 2
    nus = bin_width * np.arange(-kmax * periods + 1, kmax * periods)
    results = []
    for i, pair in enumerate(pairs):
        s = series[:, i]
        if observable == "color_population":
            s = s - s.mean()
        power = np.abs(np.exp(1j * np.outer(nus, times)) @ s)
        if observable == "color_population":
            if np.ptp(series[:, i].real) < 1e-8:
                nu = 0.0
            else:
                nu = abs(nus[int(np.argmax(power))])
            expected = abs(pair.frequency)
        else:
            nu = nus[int(np.argmax(power))]
            expected = pair.frequency
        results.append(SpectrumResult(pair, float(nu), float(expected), float(bin_width)))
    return results


# ---------------------------------------------------------------------------
# Export


def snapshot_csv(wave: PhaseSpaceWave) -> str:
    """Rows ``z, p, re, im`` for every grid node."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["z", "p", "re", "im"])
    zz, pp = wave.grid.mesh()
    for z, p, a in zip(zz.ravel(), pp.ravel(), wave.amplitudes.ravel()):
        w.writerow([repr(float(z)), repr(float(p)), repr(float(a.real)), repr(float(a.imag))])
    return buf.getvalue()


def snapshot_summary(wave: PhaseSpaceWave) -> dict:
    red, green = wave.color_populations()
    return {
        "t": wave.t,
        "norm": wave.norm(),
        "energy": quantum_energy_expectation(wave),
        "color_populations": [red, green],
    }
