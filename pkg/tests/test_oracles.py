import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqedspec.fock import thermal_cutoff, thermal_populations
from cqedspec.molecule import DEFAULT_OMEGA0, DEFAULT_OMEGA_EG, ModeParams, MoleculeParams
from cqedspec.oracles import (
    PhononInit,
    apply_damping,
    corr_fock,
    corr_multimode,
    corr_thermal,
    corr_vacuum,
    correlation,
)

GRID = np.arange(900.0)
P1 = MoleculeParams.single_mode(1.0)
HALF_PERIOD = math.pi / DEFAULT_OMEGA0


def test_init_validation():
    with pytest.raises(ValueError):
        PhononInit("squeezed")
    with pytest.raises(ValueError):
        PhononInit.fock(-1)
    with pytest.raises(ValueError):
        PhononInit.thermal(-0.1)
    with pytest.raises(ValueError):
        PhononInit.vacuum(damping_tau=0.0)


def test_vacuum_examples():
    assert corr_vacuum(P1, P1.mode, 0.0) == 1
    p0 = MoleculeParams.single_mode(0.0)
    assert np.allclose(corr_vacuum(p0, p0.mode, GRID), np.exp(-1j * DEFAULT_OMEGA_EG * GRID), atol=1e-15)
    assert abs(corr_vacuum(P1, P1.mode, HALF_PERIOD)) == pytest.approx(math.exp(-2), abs=1e-14)
    assert abs(corr_vacuum(P1, P1.mode, HALF_PERIOD)) == pytest.approx(0.13534, abs=1e-5)


def test_fock_reduces_to_vacuum():
    for d in (0.5, 1.0, 4.0):
        p = MoleculeParams.single_mode(d)
        assert np.max(np.abs(corr_fock(p, p.mode, 0, GRID) - corr_vacuum(p, p.mode, GRID))) < 1e-14


@pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
def test_fock_one_formula(d):
    p = MoleculeParams.single_mode(d)
    wt = DEFAULT_OMEGA0 * GRID
    expected = (
        np.exp(-1j * DEFAULT_OMEGA_EG * GRID) * np.exp(d * (np.exp(-1j * wt) - 1)) * (1 - 4 * d * np.sin(wt / 2) ** 2)
    )
    assert np.max(np.abs(corr_fock(p, p.mode, 1, GRID) - expected)) < 1e-13


def test_fock_one_half_period():
    assert abs(corr_fock(P1, P1.mode, 1, HALF_PERIOD)) == pytest.approx(3 * math.exp(-2), abs=1e-14)
    assert abs(corr_fock(P1, P1.mode, 1, HALF_PERIOD)) == pytest.approx(0.40601, abs=1e-5)


def test_thermal_examples():
    assert np.max(np.abs(corr_thermal(P1, P1.mode, 0.0, GRID) - corr_vacuum(P1, P1.mode, GRID))) < 1e-14
    assert corr_thermal(P1, P1.mode, 1.0, 0.0) == 1
    assert abs(corr_thermal(P1, P1.mode, 1.0, HALF_PERIOD)) == pytest.approx(math.exp(-6), rel=1e-12)
    assert abs(corr_thermal(P1, P1.mode, 1.0, HALF_PERIOD)) == pytest.approx(2.4788e-3, abs=1e-7)


@pytest.mark.parametrize("nbar", [0.5, 1.0, 2.0])
def test_thermal_is_boltzmann_average_of_fock(nbar):
    levels = thermal_cutoff(nbar)
    weights = thermal_populations(nbar, levels)
    average = sum(w * corr_fock(P1, P1.mode, n, GRID) for n, w in enumerate(weights))
    assert np.max(np.abs(average - corr_thermal(P1, P1.mode, nbar, GRID))) < 1e-10


def test_damping():
    assert apply_damping(0.7 + 0.1j, 0.0, 5.0) == 0.7 + 0.1j
    assert apply_damping(0.7 + 0.1j, 3.0, None) == 0.7 + 0.1j
    assert apply_damping(2.0, 5.0, 5.0) == pytest.approx(2 * math.exp(-1), abs=1e-15)
    with pytest.raises(ValueError):
        apply_damping(1.0, 1.0, -2.0)
    tau = 57.0
    damped = correlation(P1, P1.mode, PhononInit.fock(1, tau), GRID)
    assert np.max(np.abs(damped - np.exp(-GRID / tau) * corr_fock(P1, P1.mode, 1, GRID))) < 1e-15


INITS = [PhononInit.vacuum(), PhononInit.fock(1), PhononInit.fock(3), PhononInit.thermal(0.7), PhononInit.vacuum(40.0)]


@pytest.mark.parametrize("init", INITS)
@pytest.mark.parametrize("d", [0.0, 1.0, 4.0])
def test_contractive(init, d):
    p = MoleculeParams.single_mode(d)
    t = np.linspace(0, 900, 9001)
    assert np.max(np.abs(correlation(p, p.mode, init, t))) <= 1 + 1e-12


@pytest.mark.parametrize("init", INITS[:4])
def test_unit_at_origin(init):
    assert correlation(P1, P1.mode, init, 0.0) == 1


@pytest.mark.parametrize("init", INITS)
def test_conjugate_symmetry(init):
    t = np.linspace(0, 400, 401)
    plus = correlation(P1, P1.mode, init, t)
    minus = correlation(P1, P1.mode, init, -t)
    assert np.max(np.abs(minus - np.conj(plus))) < 1e-12


def test_thermal_monotonic_at_half_period():
    mags = [abs(corr_thermal(P1, P1.mode, nbar, HALF_PERIOD)) for nbar in np.linspace(0, 4, 41)]
    assert all(b < a for a, b in zip(mags, mags[1:]))


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from(["vacuum", "fock", "thermal"]),
    st.integers(0, 5),
    st.floats(0, 4),
    st.floats(0, 8),
    st.floats(-2000, 2000),
)
def test_oracle_properties_random(kind, n, nbar, d, t):
    p = MoleculeParams.single_mode(d)
    init = PhononInit(kind, n=n, nbar=nbar)
    c = correlation(p, p.mode, init, t)
    assert abs(c) <= 1 + 1e-12
    assert abs(correlation(p, p.mode, init, -t) - np.conj(c)) < 1e-12


def test_multimode_single_mode_reduction():
    for init in INITS:
        single = correlation(P1, P1.mode, init, GRID)
        multi = corr_multimode(DEFAULT_OMEGA_EG, [(P1.mode, init)], GRID)
        assert np.max(np.abs(single - multi)) < 1e-14


def test_multimode_two_vacua():
    m1, m2 = ModeParams(DEFAULT_OMEGA0, 0.5), ModeParams(3 * DEFAULT_OMEGA0, 1.5)
    expected = (
        np.exp(-1j * DEFAULT_OMEGA_EG * GRID)
        * np.exp(0.5 * (np.exp(-1j * m1.omega0 * GRID) - 1))
        * np.exp(1.5 * (np.exp(-1j * m2.omega0 * GRID) - 1))
    )
    got = corr_multimode(DEFAULT_OMEGA_EG, [(m1, PhononInit.vacuum()), (m2, PhononInit.vacuum())], GRID)
    assert np.max(np.abs(got - expected)) < 1e-13


def test_multimode_uncoupled_mode_is_inert():
    inits = [(P1.mode, PhononInit.fock(1)), (ModeParams(0.1, 0.0), PhononInit.thermal(2.0))]
    got = corr_multimode(DEFAULT_OMEGA_EG, inits, GRID)
    assert np.max(np.abs(got - corr_fock(P1, P1.mode, 1, GRID))) < 1e-14


def test_multimode_needs_modes():
    with pytest.raises(ValueError):
        corr_multimode(DEFAULT_OMEGA_EG, [], GRID)


def _two_mode_hamiltonian_trace(omega_eg, modes, states, times, dim):
    """C(t) = Tr(exp(i H_g t) exp(-i H_e t) rho) from the full two-mode Hamiltonians."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    n = np.diag(np.arange(dim, dtype=float))
    eye = np.eye(dim)
    ops = [(np.kron(n, eye), np.kron(a + a.T, eye)), (np.kron(eye, n), np.kron(eye, a + a.T))]
    h_g_diag = sum(m.omega0 * np.diag(num) for m, (num, _) in zip(modes, ops))
    h_e = omega_eg * np.eye(dim * dim)
    for m, (num, x) in zip(modes, ops):
        h_e = h_e + m.omega0 * (num - m.d_tilde * x + m.huang_rhys_D * np.eye(dim * dim))
    w, v = np.linalg.eigh(h_e)
    rho = np.kron(*states)
    # only rows and columns where rho is supported enter the trace
    keep = np.nonzero(np.any(rho != 0, axis=0) | np.any(rho != 0, axis=1))[0]
    vk, rk = v[keep], rho[np.ix_(keep, keep)]
    out = []
    for t in times:
        u = np.exp(1j * h_g_diag[keep] * t)[:, None] * ((vk * np.exp(-1j * w * t)) @ vk.conj().T)
        out.append(np.sum(u * rk.T))
    return np.array(out)


def test_multimode_against_two_mode_hamiltonian():
    # the truncated H_e shifts high levels; 24 per mode keeps the phase drift below 1e-10 up to t=900
    dim = 24
    modes = (ModeParams(DEFAULT_OMEGA0, 0.5), ModeParams(2 * DEFAULT_OMEGA0, 0.5))
    vac = np.zeros((dim, dim))
    vac[0, 0] = 1
    one = np.zeros((dim, dim))
    one[1, 1] = 1
    times = np.arange(0.0, 900.0, 7.0)
    for inits, states in (
        ((PhononInit.vacuum(), PhononInit.vacuum()), (vac, vac)),
        ((PhononInit.fock(1), PhononInit.vacuum()), (one, vac)),
    ):
        oracle = corr_multimode(DEFAULT_OMEGA_EG, list(zip(modes, inits)), times)
        brute = _two_mode_hamiltonian_trace(DEFAULT_OMEGA_EG, modes, states, times, dim)
        assert np.max(np.abs(oracle - brute)) < 1e-10
