import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from cqedspec.errors import TruncationError
from cqedspec.fock import (
    TruncatedSpace,
    annihilation,
    coherent_state,
    creation,
    displacement_matrix,
    displacement_operator,
    fock_state,
    laguerre,
    number,
    parity_expectation,
    projector,
    thermal_cutoff,
    thermal_density,
    thermal_populations,
    wigner_point,
)

SPACE = TruncatedSpace.for_protocol(1.0)
WIDE = TruncatedSpace.for_protocol(4.0)
# many certified levels, for coherent and thermal states
ROOMY = TruncatedSpace.for_protocol(1.0, n_init=100)


def closed_form_element(m, n, alpha):
    """<m|D(alpha)|n> straight from the Laguerre formula, via scipy."""
    x = abs(alpha) ** 2
    if m >= n:
        k = m - n
        pref = math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
        return pref * alpha**k * math.exp(-x / 2) * eval_genlaguerre(n, k, x)
    return np.conj(closed_form_element(n, m, -alpha))


def test_fock_state_basis():
    assert np.array_equal(fock_state(0, SPACE), np.eye(SPACE.dim)[0])
    assert np.array_equal(fock_state(1, SPACE), np.eye(SPACE.dim)[1])


def test_fock_state_out_of_range():
    with pytest.raises(TruncationError):
        fock_state(SPACE.dim, SPACE)
    with pytest.raises(TruncationError):
        fock_state(SPACE.safe_dim, SPACE)
    with pytest.raises(ValueError):
        fock_state(-1, SPACE)


def test_space_validation():
    with pytest.raises(ValueError):
        TruncatedSpace(dim=10, safe_dim=11)
    with pytest.raises(ValueError):
        TruncatedSpace(dim=10, safe_dim=0)
    with pytest.raises(TruncationError):
        TruncatedSpace.from_dim(12, alpha_max=1.5)


@pytest.mark.parametrize("d", [0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
@pytest.mark.parametrize("n_init", [0, 1, 30])
def test_protocol_space_contains_protocol(d, n_init):
    space = TruncatedSpace.for_protocol(d, n_init)
    assert space.dim >= 32
    assert space.safe_dim > n_init
    assert space.max_displacement >= 2 * math.sqrt(d) - 1e-12


def test_coherent_populations_alpha_one():
    pops = np.abs(coherent_state(1.0, ROOMY)) ** 2
    assert pops[:3] == pytest.approx([0.3679, 0.3679, 0.1839], abs=1e-4)
    assert pops[:3] == pytest.approx([math.exp(-1), math.exp(-1), math.exp(-1) / 2], abs=1e-12)


def test_coherent_matches_displaced_vacuum():
    psi = displacement_operator(1.0, ROOMY) @ fock_state(0, ROOMY)
    assert np.max(np.abs(psi - coherent_state(1.0, ROOMY))) < 1e-12


def test_coherent_zero_is_vacuum():
    assert np.array_equal(coherent_state(0.0, SPACE), fock_state(0, SPACE))


def test_coherent_truncation_error():
    with pytest.raises(TruncationError):
        coherent_state(5.0, TruncatedSpace.from_dim(40))


def test_thermal_density_geometric_law():
    rho = thermal_density(1.0, ROOMY)
    assert np.diag(rho)[:3].real == pytest.approx([0.5, 0.25, 0.125], abs=1e-12)
    assert abs(np.trace(number(ROOMY) @ rho) - 1.0) < 1e-10


def test_thermal_zero_temperature():
    rho = thermal_density(0.0, SPACE)
    assert np.array_equal(rho, projector(fock_state(0, SPACE)))


def test_thermal_tail_precondition():
    with pytest.raises(TruncationError):
        thermal_density(8.0, TruncatedSpace.from_dim(40))


def test_thermal_cutoff_meets_tail():
    for nbar in (0.5, 1.0, 2.0, 8.0):
        s = thermal_cutoff(nbar)
        ratio = nbar / (nbar + 1)
        assert ratio**s < 1e-12 <= ratio ** (s - 1)
    assert thermal_populations(2.0, thermal_cutoff(2.0)).sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("nbar", [0.0, 0.5, 1.0, 3.0])
def test_density_constructors_are_states(nbar):
    rho = thermal_density(nbar, ROOMY)
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_ladder_operators():
    a = annihilation(SPACE)
    assert np.allclose(a @ fock_state(1, SPACE), fock_state(0, SPACE), atol=0)
    assert np.array_equal(a @ fock_state(0, SPACE), np.zeros(SPACE.dim))
    assert np.array_equal(creation(SPACE), a.conj().T)
    assert np.allclose(number(SPACE), a.conj().T @ a, atol=1e-14)
    s = SPACE.safe_dim
    comm = a @ creation(SPACE) - creation(SPACE) @ a
    assert np.max(np.abs(comm[:s, :s] - np.eye(s))) < 1e-12


@pytest.mark.parametrize("n,k", [(0, 0), (1, 0), (3, 2), (7, 5), (20, 0), (12, 30)])
def test_laguerre_matches_scipy(n, k):
    x = np.linspace(0, 16, 33)
    assert np.allclose(laguerre(n, k, x), eval_genlaguerre(n, k, x), rtol=1e-10, atol=1e-10)
    assert isinstance(laguerre(n, k, 1.5), float)


def test_displacement_identity():
    assert np.array_equal(displacement_operator(0, SPACE), np.eye(SPACE.dim))


@pytest.mark.parametrize("alpha", [0.3, -1.0 + 0.5j, 2j, -1.4 - 1.4j])
def test_displacement_matches_closed_form(alpha):
    op = displacement_operator(alpha, SPACE)
    for m in range(12):
        for n in range(12):
            assert abs(op[m, n] - closed_form_element(m, n, alpha)) < 1e-12


@pytest.mark.parametrize("alpha", [0.5, 1.2 - 0.7j, -2.0, 3.5j])
def test_displacement_matches_generator_exponential(alpha):
    big = 260
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    ref = expm(alpha * a.T - np.conj(alpha) * a)
    op = displacement_operator(alpha, WIDE)
    s = WIDE.safe_dim
    assert np.max(np.abs(op[:s, :s] - ref[:s, :s])) < 1e-10


def test_vacuum_element():
    alpha = 1.3 - 0.4j
    assert abs(displacement_operator(alpha, SPACE)[0, 0] - math.exp(-abs(alpha) ** 2 / 2)) < 1e-14


def test_displacement_inverse():
    s = SPACE.safe_dim
    prod = displacement_operator(1.7j, SPACE) @ displacement_operator(-1.7j, SPACE)
    assert np.max(np.abs(prod[:s, :s] - np.eye(s))) < 1e-10


def test_displacement_truncation_error():
    with pytest.raises(TruncationError):
        displacement_operator(SPACE.max_displacement + 0.1, SPACE)


def test_unchecked_matrix_is_leading_block():
    big = displacement_operator(1.0 + 1.0j, WIDE)
    assert np.max(np.abs(displacement_matrix(1.0 + 1.0j, 12) - big[:12, :12])) < 1e-15


amplitudes = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(amplitudes)
def test_unitarity_on_safe_block(alpha):
    op = displacement_operator(alpha, SPACE)
    s = SPACE.safe_dim
    gram = op.conj().T @ op
    assert np.max(np.abs(gram[:s, :s] - np.eye(s))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(amplitudes, amplitudes)
def test_composition_phase(alpha, beta):
    space = TruncatedSpace.for_protocol(4.0)
    s = space.safe_dim
    lhs = displacement_operator(alpha, space) @ displacement_operator(beta, space)
    rhs = np.exp(1j * (alpha * np.conj(beta)).imag) * displacement_operator(alpha + beta, space)
    assert np.max(np.abs(lhs[:s, :s] - rhs[:s, :s])) < 1e-9


@settings(max_examples=60, deadline=None)
@given(amplitudes)
def test_coherent_populations(alpha):
    pops = np.abs(displacement_operator(alpha, SPACE)[:, 0]) ** 2
    n = np.arange(SPACE.safe_dim)
    x = abs(alpha) ** 2
    expected = np.exp(-x + n * np.log(x) - gammaln(n + 1)) if x > 0 else (n == 0).astype(float)
    assert np.max(np.abs(pops[: SPACE.safe_dim] - expected)) < 1e-10


def test_parity_examples():
    assert parity_expectation(projector(fock_state(0, SPACE))) == 1.0
    assert parity_expectation(projector(fock_state(1, SPACE))) == -1.0
    assert abs(parity_expectation(thermal_density(1.0, ROOMY)) - 1 / 3) < 1e-12


def test_wigner_examples():
    rho1 = projector(fock_state(1, SPACE))
    rho0 = projector(fock_state(0, SPACE))
    assert abs(wigner_point(rho1, 0) + 2 / math.pi) < 1e-12
    assert abs(wigner_point(rho0, 0) - 2 / math.pi) < 1e-12
    mixed = 0.94 * rho1 + 0.06 * rho0
    assert wigner_point(mixed, 0) == pytest.approx(-0.5602, abs=1e-4)
    assert abs(wigner_point(mixed, 0) - 2 / math.pi * (0.06 - 0.94)) < 1e-12


@pytest.mark.parametrize("n", [0, 1, 2, 3])
@pytest.mark.parametrize("beta", [0.3, 0.5 - 0.5j, 1.2j, -1.5])
def test_wigner_fock_closed_form(n, beta):
    rho = projector(fock_state(n, SPACE))
    x = 4 * abs(beta) ** 2
    expected = 2 / math.pi * (-1) ** n * math.exp(-x / 2) * eval_genlaguerre(n, 0, x)
    assert abs(wigner_point(rho, beta) - expected) < 1e-12


def test_wigner_truncation_error():
    with pytest.raises(TruncationError):
        wigner_point(projector(fock_state(1, SPACE)), 10.0)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0, 1),
    st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
    st.integers(0, 2**32 - 1),
)
def test_wigner_linearity(weight, beta, seed):
    rng = np.random.default_rng(seed)
    dim = SPACE.dim

    def random_density():
        v = np.zeros(dim, dtype=complex)
        v[:6] = rng.normal(size=6) + 1j * rng.normal(size=6)
        return projector(v / np.linalg.norm(v))

    r1, r2 = random_density(), random_density()
    mixed = weight * r1 + (1 - weight) * r2
    lhs = wigner_point(mixed, beta)
    rhs = weight * wigner_point(r1, beta) + (1 - weight) * wigner_point(r2, beta)
    assert abs(lhs - rhs) < 1e-12
