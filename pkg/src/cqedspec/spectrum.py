"""
Absorption spectra from sampled correlation functions.

The spectrum on bin k (frequency w_k = 2 pi k / (N dt)) is

    sigma(w_k) = Re[ (1/N) sum_m C(m dt) exp(i w_k m dt) ]

which puts a unit peak at w_eg for an uncoupled molecule and satisfies the
sum rule sum_k sigma(w_k) = Re C(0). On the default grid (dt = 1, 900
samples, w_eg = pi/5, w0 = pi/90) every vibronic line w_eg + j w0 sits on an
exact bin, so peaks are read from single bins.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.special import gammaln, ive

from .errors import FitError, GridMismatchError
from .molecule import DEFAULT_DT, DEFAULT_OMEGA0, DEFAULT_OMEGA_EG, DEFAULT_T_MAX, MoleculeParams
from .oracles import PhononInit, correlation

BIN_TOL = 1e-9

ProgressionCase = Literal["vacuum", "fock1", "thermal", "damped"]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples t_k = k dt for k = 0..N-1 with N = t_max/dt (t_max excluded)."""

    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_T_MAX

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0):
            raise ValueError(f"grid needs dt > 0 and t_max > 0, got dt={self.dt}, t_max={self.t_max}")
        ratio = self.t_max / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"t_max={self.t_max} is not a whole number of steps dt={self.dt}")

    @property
    def n_samples(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt


DEFAULT_GRID = TimeGrid(DEFAULT_DT, DEFAULT_T_MAX)


@dataclass(frozen=True)
class CorrelationTrace:
    dt: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("a correlation trace needs a non-empty 1-D sequence of values")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt

    def scaled(self, factor: float) -> "CorrelationTrace":
        return CorrelationTrace(self.dt, factor * self.values)


@dataclass(frozen=True)
class Spectrum:
    d_omega: float
    values: np.ndarray
    # imaginary part of the transform, kept for diagnostics only
    imag: np.ndarray | None = None

    @property
    def omegas(self) -> np.ndarray:
        return np.arange(self.values.size) * self.d_omega

    def bin_of(self, omega: float) -> int:
        """Index of the bin at exactly ``omega``; raises GridMismatchError otherwise."""
        pos = omega / self.d_omega
        k = int(round(pos))
        if abs(pos - k) > BIN_TOL * max(1.0, abs(pos)) or not 0 <= k < self.values.size:
            raise GridMismatchError(
                f"omega={omega!r} is not a bin of this spectrum (d_omega={self.d_omega!r}, "
                f"position {pos:.6f}, {self.values.size} bins)"
            )
        return k


def oracle_trace(params: MoleculeParams, init: PhononInit, grid: TimeGrid = DEFAULT_GRID) -> CorrelationTrace:
    """Closed-form trace of the first mode of ``params`` on ``grid``."""
    return CorrelationTrace(grid.dt, correlation(params, params.mode, init, grid.times))


def dft_spectrum(trace: CorrelationTrace) -> Spectrum:
    n = trace.values.size
    # ifft carries exactly the (1/N) sum_m C_m exp(+2 pi i k m / N) we want
    z = np.fft.ifft(trace.values)
    return Spectrum(d_omega=2.0 * math.pi / (n * trace.dt), values=z.real.copy(), imag=z.imag.copy())


@dataclass(frozen=True)
class PeakSeries:
    j_indices: np.ndarray
    peak_values: np.ndarray
    omega_eg: float
    omega0: float


def peak_values(spectrum: Spectrum, omega_eg: float, omega0: float, j_max: int) -> PeakSeries:
    """Spectrum on the vibronic comb w_eg + j w0, j = 0..j_max."""
    js = np.arange(j_max + 1)
    bins = [spectrum.bin_of(omega_eg + j * omega0) for j in js]
    return PeakSeries(js, spectrum.values[bins].copy(), omega_eg, omega0)


@dataclass(frozen=True)
class PoissonFit:
    amplitude: float
    huang_rhys_D: float
    residual: float


def poisson_model(j, amplitude: float, huang_rhys_D: float):
    """amplitude * exp(-D) D^j / j!"""
    j = np.asarray(j, dtype=float)
    if huang_rhys_D == 0:
        return amplitude * (j == 0)
    return amplitude * np.exp(j * math.log(huang_rhys_D) - huang_rhys_D - gammaln(j + 1))


def poisson_fit(peaks: PeakSeries | Sequence[float]) -> PoissonFit:
    """Least-squares fit of A exp(-D) D^j / j! to peak heights."""
    if isinstance(peaks, PeakSeries):
        js, ys = np.asarray(peaks.j_indices, float), np.asarray(peaks.peak_values, float)
    else:
        ys = np.asarray(peaks, dtype=float)
        js = np.arange(ys.size, dtype=float)
    if ys.size < 3:
        raise FitError(f"need at least 3 peaks for a Poisson fit, got {ys.size}")
    if np.any(ys < -1e-12):
        raise FitError("peak heights must be non-negative")
    total = ys.sum()
    if not total > 0:
        raise FitError("cannot fit a Poisson law to all-zero peaks")

    mean = float(np.dot(js, ys) / total)

    def resid(p):
        return poisson_model(js, p[0], p[1]) - ys

    sol = least_squares(
        resid, x0=[total, max(mean, 1e-3)], bounds=([0.0, 0.0], [np.inf, np.inf]),
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10_000,
    )
    if not sol.success:
        raise FitError(f"Poisson fit did not converge: {sol.message}")
    return PoissonFit(float(sol.x[0]), float(sol.x[1]), float(np.linalg.norm(sol.fun)))


def peak_width(spectrum: Spectrum, omega: float) -> float:
    """Full width at half maximum of the line at ``omega``, by linear interpolation between bins."""
    k0 = spectrum.bin_of(omega)
    y = spectrum.values
    half = 0.5 * y[k0]
    if not half > 0:
        raise ValueError(f"no positive peak at omega={omega}")
    n = y.size

    def crossing(step):
        for dist in range(n // 2):
            here, nxt = y[(k0 + step * dist) % n], y[(k0 + step * (dist + 1)) % n]
            if nxt < half:
                return dist + (here - half) / (here - nxt)
        raise ValueError("line never drops below half maximum")

    return (crossing(+1) + crossing(-1)) * spectrum.d_omega


def _case_setup(case: ProgressionCase, value: float, huang_rhys_D: float, omega0: float):
    """(effective D, PhononInit) for one progression point."""
    if case == "vacuum":
        return value, PhononInit.vacuum()
    if case == "fock1":
        return value, PhononInit.fock(1)
    if case == "thermal":
        return huang_rhys_D, PhononInit.thermal(value)
    if case == "damped":
        if not value > 0:
            raise ValueError("1/(tau w0) must be > 0")
        return huang_rhys_D, PhononInit.vacuum(damping_tau=1.0 / (value * omega0))
    raise ValueError(f"unknown progression case {case!r}")


def peak_progression(
    case: ProgressionCase,
    values: Sequence[float],
    *,
    huang_rhys_D: float = 1.0,
    grid: TimeGrid = DEFAULT_GRID,
    omega_eg: float = DEFAULT_OMEGA_EG,
    omega0: float = DEFAULT_OMEGA0,
    j: int = 0,
    jobs: int = 1,
) -> list[tuple[float, float]]:
    """Spectral peak at w_eg + j w0 as a function of the swept parameter.

    ``case`` selects what is swept: D for "vacuum" and "fock1", nbar for
    "thermal" and 1/(tau w0) for "damped" (the last two at fixed
    ``huang_rhys_D``).
    """

    def point(value):
        d, init = _case_setup(case, float(value), huang_rhys_D, omega0)
        params = MoleculeParams.single_mode(d, omega_eg=omega_eg, omega0=omega0)
        spec = dft_spectrum(oracle_trace(params, init, grid))
        return float(value), float(spec.values[spec.bin_of(omega_eg + j * omega0)])

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(point, values))
    return [point(v) for v in values]


def _damped_zero_phonon(huang_rhys_D, tau, grid, omega0) -> float:
    """Series form: expand exp(D e^{-i w0 t}) and sum each damped phasor geometrically."""
    n, dt = grid.n_samples, grid.dt
    total = 0.0
    term = math.exp(-huang_rhys_D)
    for j in range(400):
        if j > huang_rhys_D and term < 1e-18:
            break
        q = np.exp(-dt / tau - 1j * j * omega0 * dt)
        total += term * ((1 - q**n) / (1 - q) / n).real
        term *= huang_rhys_D / (j + 1)
    return float(total)


def reference_peak(
    case: ProgressionCase,
    value: float,
    *,
    huang_rhys_D: float = 1.0,
    grid: TimeGrid = DEFAULT_GRID,
    omega0: float = DEFAULT_OMEGA0,
) -> float:
    """Zero-phonon peak predicted without a Fourier transform.

    vacuum: exp(-D); fock1: exp(-D)(1-D)^2; thermal: exp(-D(2 nbar+1)) I0(2 D sqrt(nbar(nbar+1)));
    damped: Poisson-weighted sum of finite geometric series on ``grid``.
    """
    if case == "vacuum":
        return math.exp(-value)
    if case == "fock1":
        return math.exp(-value) * (1.0 - value) ** 2
    if case == "thermal":
        z = 2.0 * huang_rhys_D * math.sqrt(value * (value + 1.0))
        # ive(0, z) = exp(-z) I0(z)
        return float(math.exp(-huang_rhys_D * (2 * value + 1) + z) * ive(0, z))
    if case == "damped":
        return _damped_zero_phonon(huang_rhys_D, 1.0 / (value * omega0), grid, omega0)
    raise ValueError(f"unknown progression case {case!r}")
