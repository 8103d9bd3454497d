"""
Acceptance suite: twelve end-to-end checks of the simulator against
closed-form results, runnable from tests or from ``cqedspec verify``.

Each criterion is a function returning a list of Check rows; a criterion
passes when every row is within its tolerance. Criteria take the time grid
as a parameter so that a deliberately broken grid can be fed in.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import ImperfectionModel, run_trace
from .fock import TruncatedSpace, displacement_matrix, fock_state, projector, wigner_point
from .molecule import DEFAULT_OMEGA0, DEFAULT_OMEGA_EG, ModeParams, MoleculeParams, evolution_brute, evolution_closed
from .oracles import PhononInit, corr_multimode, correlation
from .spectrum import (
    DEFAULT_GRID,
    TimeGrid,
    dft_spectrum,
    oracle_trace,
    peak_progression,
    peak_values,
    poisson_fit,
    poisson_model,
    reference_peak,
)

CONTRAST_F = 0.83
PREP_FIDELITY = 0.94
D_CURVE = tuple(0.5 * k for k in range(9))


@dataclass(frozen=True)
class Check:
    label: str
    error: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return bool(self.error < self.tolerance)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    max_error: float
    tolerance: float
    seconds: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} [{self.number:2d}] {self.title}: max_err={self.max_error:.3e} "
            f"tol={self.tolerance:.0e} time={self.seconds:.2f}s"
        )


def _max_abs(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _experiment_cases():
    """(label, params, init) for the four experiment cases at all swept values."""
    for d in (0.0, 1.0, 4.0):
        yield f"vacuum D={d:g}", MoleculeParams.single_mode(d), PhononInit.vacuum()
    for d in (0.5, 1.0, 2.0):
        yield f"fock1 D={d:g}", MoleculeParams.single_mode(d), PhononInit.fock(1)
    for nbar in (0.5, 1.0, 2.0):
        yield f"thermal nbar={nbar:g}", MoleculeParams.single_mode(1.0), PhononInit.thermal(nbar)
    for inv in (0.25, 0.5, 1.0):
        tau = 1.0 / (inv * DEFAULT_OMEGA0)
        yield f"damped 1/(tau w0)={inv:g}", MoleculeParams.single_mode(1.0), PhononInit.vacuum(tau)


def circuit_vs_oracle(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    for label, params, init in _experiment_cases():
        sim = run_trace(params, params.mode, init, grid)
        ref = oracle_trace(params, init, grid)
        checks.append(Check(label, _max_abs(sim.values, ref.values), 1e-8))
    return checks


def evolution_identity(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    for d in (0.5, 1.0, 4.0):
        params = MoleculeParams.single_mode(d)
        space = TruncatedSpace.for_protocol(d)
        s = space.safe_dim
        for t in (10.0, 45.0, 90.0, 180.0, 450.0):
            closed = evolution_closed(params, params.mode, t, space)[:s, :s]
            brute = evolution_brute(params, params.mode, t, space)[:s, :s]
            checks.append(Check(f"D={d:g} t={t:g}", _max_abs(closed, brute), 1e-7))
    return checks


def poisson_progression(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    js = np.arange(21)
    for d in (0.0, 1.0, 4.0):
        params = MoleculeParams.single_mode(d)
        spec = dft_spectrum(run_trace(params, params.mode, PhononInit.vacuum(), grid))
        peaks = peak_values(spec, params.omega_eg, params.mode.omega0, 20)
        checks.append(Check(f"D={d:g} comb j<=20", _max_abs(peaks.peak_values, poisson_model(js, 1.0, d)), 1e-6))
        if d == 0.0:
            k = spec.bin_of(params.omega_eg)
            others = np.delete(spec.values, k)
            checks.append(Check("D=0 unit peak", abs(spec.values[k] - 1.0), 1e-6))
            checks.append(Check("D=0 off-peak bins", float(np.max(np.abs(others))), 1e-6))
    return checks


def vacuum_curve(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    rows = peak_progression("vacuum", D_CURVE, grid=grid)
    return [Check(f"D={d:g}", abs(peak - math.exp(-d)), 1e-6) for d, peak in rows]


def fock_curve(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    rows = peak_progression("fock1", D_CURVE, grid=grid)
    checks = [Check(f"D={d:g}", abs(peak - reference_peak("fock1", d)), 1e-6) for d, peak in rows]
    zero = dict(rows)[1.0]
    checks.append(Check("zero at D=1", abs(zero), 1e-9))
    return checks


def thermal_trick(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    params = MoleculeParams.single_mode(1.0)
    for nbar in (0.5, 1.0, 2.0):
        init = PhononInit.thermal(nbar)
        faithful = run_trace(params, params.mode, init, grid, thermal_mode="faithful")
        direct = run_trace(params, params.mode, init, grid, thermal_mode="direct")
        checks.append(Check(f"nbar={nbar:g}", _max_abs(faithful.values, direct.values), 1e-8))
    return checks


def damping_factorization(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    params = MoleculeParams.single_mode(1.0)
    tau = 1.0 / (0.5 * DEFAULT_OMEGA0)
    decay = np.exp(-grid.times / tau)
    for label, init, damped in (
        ("vacuum", PhononInit.vacuum(), PhononInit.vacuum(tau)),
        ("fock1", PhononInit.fock(1), PhononInit.fock(1, tau)),
        ("thermal nbar=1", PhononInit.thermal(1.0), PhononInit.thermal(1.0, tau)),
    ):
        plain = run_trace(params, params.mode, init, grid)
        with_decay = run_trace(params, params.mode, damped, grid)
        checks.append(Check(label, _max_abs(with_decay.values, decay * plain.values), 1e-10))
    return checks


def sum_rule(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    for label, params, init in (
        ("vacuum D=1", MoleculeParams.single_mode(1.0), PhononInit.vacuum()),
        ("fock1 D=1", MoleculeParams.single_mode(1.0), PhononInit.fock(1)),
        ("thermal nbar=1", MoleculeParams.single_mode(1.0), PhononInit.thermal(1.0)),
        ("damped 1/(tau w0)=0.5", MoleculeParams.single_mode(1.0), PhononInit.vacuum(1.0 / (0.5 * DEFAULT_OMEGA0))),
    ):
        trace = run_trace(params, params.mode, init, grid)
        total = float(np.sum(dft_spectrum(trace).values))
        checks.append(Check(f"{label} vs Re C(0)", abs(total - trace.values[0].real), 1e-9))
        checks.append(Check(f"{label} vs 1", abs(total - 1.0), 1e-9))
    return checks


def contrast_linearity(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    checks = []
    imperfect = ImperfectionModel(contrast_f=CONTRAST_F)
    for d in (1.0, 4.0):
        params = MoleculeParams.single_mode(d)
        ideal = dft_spectrum(run_trace(params, params.mode, PhononInit.vacuum(), grid))
        scaled = dft_spectrum(run_trace(params, params.mode, PhononInit.vacuum(), grid, imperfect))
        checks.append(Check(f"D={d:g} spectrum", _max_abs(scaled.values, CONTRAST_F * ideal.values), 1e-12))
        fit = poisson_fit(peak_values(scaled, params.omega_eg, params.mode.omega0, 20))
        checks.append(Check(f"D={d:g} fitted A", abs(fit.amplitude - CONTRAST_F), 1e-6))
        checks.append(Check(f"D={d:g} fitted D", abs(fit.huang_rhys_D - d), 1e-6))
    return checks


def imperfect_fock(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    params = MoleculeParams.single_mode(1.0)
    mixed = run_trace(params, params.mode, PhononInit.fock(1), grid, ImperfectionModel(prep_fidelity_F=PREP_FIDELITY))
    t = grid.times
    expected = PREP_FIDELITY * correlation(params, params.mode, PhononInit.fock(1), t) + (
        1 - PREP_FIDELITY
    ) * correlation(params, params.mode, PhononInit.vacuum(), t)
    space = TruncatedSpace.from_dim(32)
    rho = PREP_FIDELITY * projector(fock_state(1, space)) + (1 - PREP_FIDELITY) * projector(fock_state(0, space))
    w0 = wigner_point(rho, 0.0)
    return [
        Check("trace vs F C_fock1 + (1-F) C_vac", _max_abs(mixed.values, expected), 1e-10),
        Check("W(0) vs (2/pi)(1-2F)", abs(w0 - 2 / math.pi * (1 - 2 * PREP_FIDELITY)), 1e-9),
    ]


def _two_mode_tensor_trace(omega_eg, modes, states, times, dim):
    """Tr(U rho1 (x) rho2) with U = exp(-i w_eg t) U1 (x) U2 built on dim levels per mode."""
    rho = np.kron(*states)
    out = np.empty(len(times), dtype=complex)
    for i, t in enumerate(times):
        factors = []
        for mode in modes:
            alpha = mode.d_tilde * np.expm1(1j * mode.omega0 * t)
            phase = np.exp(-1j * mode.huang_rhys_D * math.sin(mode.omega0 * t))
            factors.append(phase * displacement_matrix(alpha, dim))
        u = np.exp(-1j * omega_eg * t) * np.kron(*factors)
        out[i] = np.trace(u @ rho)
    return out


def multimode_factorization(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    dim = 12
    modes = (ModeParams(DEFAULT_OMEGA0, 0.5), ModeParams(2 * DEFAULT_OMEGA0, 0.5))
    vac = np.zeros((dim, dim), dtype=complex)
    vac[0, 0] = 1.0
    one = np.zeros((dim, dim), dtype=complex)
    one[1, 1] = 1.0
    checks = []
    for label, inits, states in (
        ("vacuum x vacuum", (PhononInit.vacuum(), PhononInit.vacuum()), (vac, vac)),
        ("fock1 x vacuum", (PhononInit.fock(1), PhononInit.vacuum()), (one, vac)),
    ):
        oracle = corr_multimode(DEFAULT_OMEGA_EG, list(zip(modes, inits)), grid.times)
        brute = _two_mode_tensor_trace(DEFAULT_OMEGA_EG, modes, states, grid.times, dim)
        checks.append(Check(label, _max_abs(oracle, brute), 1e-8))
    return checks


def wigner_origin(grid: TimeGrid = DEFAULT_GRID) -> list[Check]:
    space = TruncatedSpace.from_dim(32)
    return [
        Check("|1> W(0) = -2/pi", abs(wigner_point(projector(fock_state(1, space)), 0.0) + 2 / math.pi), 1e-9),
        Check("|0> W(0) = +2/pi", abs(wigner_point(projector(fock_state(0, space)), 0.0) - 2 / math.pi), 1e-9),
    ]


CRITERIA: dict[int, tuple[str, Callable[[TimeGrid], list[Check]]]] = {
    1: ("circuit vs oracle, four cases", circuit_vs_oracle),
    2: ("closed vs brute-force evolution", evolution_identity),
    3: ("Poisson progression of vacuum spectra", poisson_progression),
    4: ("vacuum zero-phonon peak vs D", vacuum_curve),
    5: ("Fock-1 zero-phonon peak vs D", fock_curve),
    6: ("thermal schedule vs Boltzmann average", thermal_trick),
    7: ("damping factorization", damping_factorization),
    8: ("spectral sum rule", sum_rule),
    9: ("contrast linearity and Poisson fit", contrast_linearity),
    10: ("imperfect Fock preparation", imperfect_fock),
    11: ("two-mode factorization", multimode_factorization),
    12: ("Wigner function at the origin", wigner_origin),
}


def run_criterion(number: int, grid: TimeGrid = DEFAULT_GRID) -> CriterionResult:
    title, func = CRITERIA[number]
    start = time.perf_counter()
    try:
        checks = func(grid)
    except Exception as exc:  # a crash is a failure of the criterion, reported like any other
        seconds = time.perf_counter() - start
        return CriterionResult(number, title, False, math.inf, math.nan, seconds, f"{type(exc).__name__}: {exc}")
    seconds = time.perf_counter() - start
    worst = max(checks, key=lambda c: c.error / c.tolerance)
    failed = [c for c in checks if not c.ok]
    detail = "; ".join(f"{c.label}: {c.error:.2e} (tol {c.tolerance:.0e})" for c in (failed or [worst]))
    return CriterionResult(number, title, not failed, worst.error, worst.tolerance, seconds, detail)


def run_all(numbers=None, grid: TimeGrid = DEFAULT_GRID) -> list[CriterionResult]:
    return [run_criterion(n, grid) for n in (numbers or sorted(CRITERIA))]

