"""
Numerics on a truncated bosonic Fock space.

States are complex numpy vectors of length ``dim`` and operators/densities are
``dim x dim`` complex arrays, both in the number basis |0>, ..., |dim-1>.

The displacement operator is built from its closed-form matrix elements

    <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2),   m >= n

(the upper triangle follows from D(alpha)^dagger = D(-alpha)), so every stored
element is exact; truncation only removes rows/columns, it never perturbs the
ones that are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import TruncationError

# the space is always at least this large, however weak the coupling
MIN_DIM = 32
# number of certified levels requested by TruncatedSpace.for_protocol
MIN_SAFE = 16
THERMAL_TAIL = 1e-12


def _envelope(n_top: float, amplitude: float) -> float:
    """Highest Fock level with non-negligible weight after displacing |n_top> by |amplitude|."""
    u = math.sqrt(max(n_top, 0.0)) + abs(amplitude)
    return u * u + 6.0 * u + 10.0


@dataclass(frozen=True)
class TruncatedSpace:
    """Fock levels 0..dim-1, of which the first ``safe_dim`` are certified.

    A level n < safe_dim stays inside the space (tail weight far below 1e-10)
    under any displacement with |alpha| <= ``max_displacement``.
    """

    dim: int
    safe_dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or int(self.safe_dim) != self.safe_dim:
            raise ValueError("dim and safe_dim must be integers")
        if not 0 < self.safe_dim <= self.dim:
            raise ValueError(f"need 0 < safe_dim <= dim, got safe_dim={self.safe_dim}, dim={self.dim}")

    @classmethod
    def from_dim(cls, dim: int, alpha_max: float = 0.0) -> "TruncatedSpace":
        """Certify as many levels of a ``dim``-level space as displacements up to ``alpha_max`` allow."""
        reach = math.sqrt(dim - 1) - 3.0 - abs(alpha_max)
        if reach < 0:
            raise TruncationError(
                f"dim={dim} cannot contain displacements of |alpha|={abs(alpha_max):.4g}"
            )
        safe = min(dim, int(math.floor(reach * reach + 1e-12)) + 1)
        return cls(dim=int(dim), safe_dim=safe)

    @classmethod
    def for_protocol(cls, huang_rhys_D: float, n_init: int = 0) -> "TruncatedSpace":
        """Space for the spectroscopy circuit.

        The protocol displaces by alpha(t) = sqrt(D)(exp(i w0 t) - 1), so
        |alpha| <= 2 sqrt(D). The space keeps levels up to
        max(n_init, MIN_SAFE - 1) certified under that displacement.
        """
        if huang_rhys_D < 0:
            raise ValueError("huang_rhys_D must be >= 0")
        alpha_max = 2.0 * math.sqrt(huang_rhys_D)
        n_top = max(int(n_init), MIN_SAFE - 1)
        dim = max(MIN_DIM, math.ceil(_envelope(n_top, alpha_max)))
        return cls.from_dim(dim, alpha_max)

    @property
    def max_displacement(self) -> float:
        """Largest |alpha| for which the safe levels stay inside the space."""
        return max(0.0, math.sqrt(self.dim - 1) - 3.0 - math.sqrt(self.safe_dim - 1))

    def check_displacement(self, alpha: complex) -> None:
        if abs(alpha) > self.max_displacement + 1e-12:
            raise TruncationError(
                f"|alpha|={abs(alpha):.6g} exceeds max_displacement={self.max_displacement:.6g} "
                f"(dim={self.dim}, safe_dim={self.safe_dim})"
            )


def fock_state(n: int, space: TruncatedSpace) -> np.ndarray:
    if n < 0 or int(n) != n:
        raise ValueError(f"Fock level must be a non-negative integer, got {n}")
    if n >= space.safe_dim:
        raise TruncationError(f"Fock level {n} outside safe levels 0..{space.safe_dim - 1} (dim={space.dim})")
    psi = np.zeros(space.dim, dtype=complex)
    psi[n] = 1.0
    return psi


def coherent_state(alpha: complex, space: TruncatedSpace) -> np.ndarray:
    """Coherent state |alpha>, amplitudes exp(-|alpha|^2/2) alpha^n / sqrt(n!)."""
    r = abs(alpha)
    if r * r + 6 * r + 10 > space.safe_dim:
        raise TruncationError(
            f"coherent state |alpha|={r:.6g} needs safe_dim >= {r * r + 6 * r + 10:.1f}, have {space.safe_dim}"
        )
    if r == 0:
        return fock_state(0, space)
    n = np.arange(space.dim)
    log_mod = n * math.log(r) - 0.5 * r * r - 0.5 * gammaln(n + 1)
    psi = np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))
    return psi / np.linalg.norm(psi)


def thermal_cutoff(nbar: float, tol: float = THERMAL_TAIL) -> int:
    """Smallest s with (nbar/(nbar+1))^s < tol: levels 0..s-1 carry all but ``tol`` of the weight."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0:
        return 1
    ratio = nbar / (nbar + 1.0)
    return int(math.floor(math.log(tol) / math.log(ratio))) + 1


def thermal_populations(nbar: float, levels: int) -> np.ndarray:
    """Bose-Einstein weights nbar^n/(nbar+1)^(n+1) for n < levels, renormalized."""
    n = np.arange(levels)
    if nbar == 0:
        p = (n == 0).astype(float)
    else:
        p = np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))
    return p / p.sum()


def thermal_density(nbar: float, space: TruncatedSpace) -> np.ndarray:
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar > 0 and (nbar / (nbar + 1.0)) ** space.safe_dim >= THERMAL_TAIL:
        raise TruncationError(
            f"thermal state nbar={nbar} needs safe_dim >= {thermal_cutoff(nbar)}, have {space.safe_dim}"
        )
    return np.diag(thermal_populations(nbar, space.dim)).astype(complex)


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def annihilation(space: TruncatedSpace) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, space.dim)), 1).astype(complex)


def creation(space: TruncatedSpace) -> np.ndarray:
    return annihilation(space).conj().T


def number(space: TruncatedSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim)).astype(complex)


def laguerre(n: int, k: int, x):
    """Generalized Laguerre polynomial L_n^(k)(x) by the three-term recurrence

    (j+1) L_{j+1} = (2j+1+k-x) L_j - (j+k) L_{j-1}.
    """
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for j in range(n):
        prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


@lru_cache(maxsize=16)
def _triangle_index(dim: int):
    """Flat positions of the lower triangle (m >= n), its mirror, and the source entry h[n, m-n]."""
    rows, cols = np.tril_indices(dim)
    k = rows - cols
    lower = rows * dim + cols
    upper = cols * dim + rows
    source = cols * dim + k
    odd = (k % 2 == 1)
    return lower, upper, source, odd


def _normalized_laguerre_table(x: float, dim: int) -> np.ndarray:
    """Table h[n, k] = sqrt(n!/(n+k)!) x^(k/2) exp(-x/2) L_n^(k)(x).

    The recurrence is run on the normalized quantity, which is bounded by 1,
    so no factorial or power ever overflows.
    """
    k = np.arange(dim, dtype=float)
    table = np.empty((dim, dim))
    if x == 0.0:
        cur = (k == 0).astype(float)
    else:
        cur = np.exp(0.5 * k * math.log(x) - 0.5 * x - 0.5 * gammaln(k + 1))
    prev = np.zeros(dim)
    table[0] = cur
    for n in range(dim - 1):
        nxt = ((2 * n + 1 + k - x) * cur - np.sqrt(n * (n + k)) * prev) / np.sqrt((n + 1) * (n + 1 + k))
        table[n + 1] = nxt
        prev, cur = cur, nxt
    return table


def displacement_matrix(alpha: complex, dim: int) -> np.ndarray:
    """Leading dim x dim block of the infinite D(alpha), with no containment check.

    Every element is the exact one; whether the block is close to unitary is up
    to the caller (see TruncatedSpace).
    """
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    x = abs(alpha) ** 2
    # <m|D|n> = e^{i m theta} R[m, n] e^{-i n theta}, with R real and depending on |alpha| only
    lower, upper, source, odd = _triangle_index(dim)
    mags = _normalized_laguerre_table(x, dim).ravel()[source]
    real = np.empty(dim * dim)
    real[lower] = mags
    real[upper] = np.where(odd, -mags, mags)
    phase = np.exp(1j * float(np.angle(alpha)) * np.arange(dim))
    return phase[:, None] * real.reshape(dim, dim) * phase.conj()[None, :]


def displacement_operator(alpha: complex, space: TruncatedSpace) -> np.ndarray:
    """D(alpha) = exp(alpha a^dagger - alpha^* a) on the truncated space."""
    space.check_displacement(alpha)
    return displacement_matrix(alpha, space.dim)


def parity_expectation(rho: np.ndarray) -> float:
    diag = np.real(np.diagonal(rho))
    signs = np.where(np.arange(diag.size) % 2 == 0, 1.0, -1.0)
    return float(np.dot(signs, diag))


def _occupied_top(rho: np.ndarray, tol: float = 1e-14) -> int:
    occupied = np.nonzero(np.abs(np.diagonal(rho)) > tol)[0]
    return int(occupied[-1]) if occupied.size else 0


def wigner_point(rho: np.ndarray, beta: complex) -> float:
    """Wigner function as displaced parity, W(beta) = (2/pi) <Pi>_{D(-beta) rho D(beta)}."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    n_top = _occupied_top(rho)
    if _envelope(n_top, beta) > dim:
        raise TruncationError(
            f"Wigner point |beta|={abs(beta):.6g} on a state occupying level {n_top} needs "
            f"dim >= {_envelope(n_top, beta):.1f}, have {dim}"
        )
    if beta == 0:
        return 2.0 / math.pi * parity_expectation(rho)
    # containment was judged on the occupied levels above
    d_minus = displacement_matrix(-beta, dim)
    shifted = d_minus @ rho @ d_minus.conj().T
    return 2.0 / math.pi * parity_expectation(shifted)
