"""
Displaced-harmonic-oscillator molecule and its "forward and reversal" evolution.

Units have hbar = 1; each mode is described by its angular frequency and the
dimensionless Huang-Rhys factor D = d~^2, with d~ the shift between the ground
and excited potential minima in oscillator units.

The excited-state potential is (q - d)^2, which in ladder operators reads

    H_e = w_eg + w0 (a^dag a - d~ (a + a^dag) + d~^2) = w_eg + w0 D(d~) a^dag a D(-d~)

and makes the composite gate exp(i H_g t) exp(-i H_e t) equal to
exp(-i phi(t)) D(d~ (exp(i w0 t) - 1)) with phi(t) = w_eg t + D sin(w0 t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import TruncatedSpace, annihilation, displacement_operator, number

DEFAULT_OMEGA_EG = math.pi / 5
DEFAULT_OMEGA0 = math.pi / 90
DEFAULT_DT = 1.0
DEFAULT_T_MAX = 900.0


@dataclass(frozen=True)
class ModeParams:
    omega0: float
    huang_rhys_D: float

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if not self.huang_rhys_D >= 0:
            raise ValueError(f"huang_rhys_D must be >= 0, got {self.huang_rhys_D}")

    @property
    def d_tilde(self) -> float:
        return math.sqrt(self.huang_rhys_D)


@dataclass(frozen=True)
class MoleculeParams:
    omega_eg: float
    modes: tuple[ModeParams, ...]

    def __post_init__(self):
        if not self.omega_eg > 0:
            raise ValueError(f"omega_eg must be > 0, got {self.omega_eg}")
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ValueError("a molecule needs at least one vibronic mode")

    @classmethod
    def single_mode(
        cls, huang_rhys_D: float = 1.0, omega_eg: float = DEFAULT_OMEGA_EG, omega0: float = DEFAULT_OMEGA0
    ) -> "MoleculeParams":
        return cls(omega_eg=omega_eg, modes=(ModeParams(omega0, huang_rhys_D),))

    @property
    def mode(self) -> ModeParams:
        """The first (for single-mode molecules, the only) vibronic mode."""
        return self.modes[0]


def hamiltonian_ground(mode: ModeParams, space: TruncatedSpace) -> np.ndarray:
    return mode.omega0 * number(space)


def hamiltonian_excited(params: MoleculeParams, mode: ModeParams, space: TruncatedSpace) -> np.ndarray:
    a = annihilation(space)
    eye = np.eye(space.dim)
    d = mode.d_tilde
    return params.omega_eg * eye + mode.omega0 * (
        number(space) - d * (a + a.conj().T) + mode.huang_rhys_D * eye
    )


def phase_phi(params: MoleculeParams, mode: ModeParams, t):
    """phi(t) = w_eg t + D sin(w0 t)."""
    t = np.asarray(t, dtype=float)
    out = params.omega_eg * t + mode.huang_rhys_D * np.sin(mode.omega0 * t)
    return out if out.ndim else float(out)


def displacement_amplitude(mode: ModeParams, t):
    """alpha(t) = sqrt(D) (exp(i w0 t) - 1); |alpha(t)| = 2 sqrt(D) |sin(w0 t / 2)|."""
    t = np.asarray(t, dtype=float)
    out = mode.d_tilde * np.expm1(1j * mode.omega0 * t)
    return out if out.ndim else complex(out)


def evolution_closed(params: MoleculeParams, mode: ModeParams, t: float, space: TruncatedSpace) -> np.ndarray:
    phase = np.exp(-1j * phase_phi(params, mode, t))
    return phase * displacement_operator(displacement_amplitude(mode, t), space)


def _expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolution_brute(params: MoleculeParams, mode: ModeParams, t: float, space: TruncatedSpace) -> np.ndarray:
    """exp(i H_g t) exp(-i H_e t) from the truncated Hamiltonians (verification path)."""
    # H_g is diagonal, so its exponential is exact elementwise
    ground = np.exp(1j * mode.omega0 * np.arange(space.dim) * t)
    excited = _expm_hermitian(hamiltonian_excited(params, mode, space), t)
    return ground[:, None] * excited
