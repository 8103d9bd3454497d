"""
Closed-form dipole correlation functions C(t) = <psi| exp(i H_g t) exp(-i H_e t) |psi>.

These formulas are the reference every simulated circuit trace is checked
against, and they are also the fast path used for parameter sweeps. All
functions accept scalar or array ``t`` and return values of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .fock import laguerre, thermal_cutoff
from .molecule import ModeParams, MoleculeParams, displacement_amplitude

InitKind = Literal["vacuum", "fock", "thermal"]


@dataclass(frozen=True)
class PhononInit:
    """Initial nuclear state: vacuum, Fock |n>, or thermal with mean occupation nbar.

    ``damping_tau`` optionally attaches an exp(-t/tau) decay to the correlation
    function, independently of the state.
    """

    kind: InitKind = "vacuum"
    n: int = 0
    nbar: float = 0.0
    damping_tau: float | None = None

    def __post_init__(self):
        if self.kind not in ("vacuum", "fock", "thermal"):
            raise ValueError(f"unknown initial state kind {self.kind!r}")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"Fock level must be a non-negative integer, got {self.n}")
        if not self.nbar >= 0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")
        if self.damping_tau is not None and not self.damping_tau > 0:
            raise ValueError(f"damping_tau must be > 0, got {self.damping_tau}")

    @classmethod
    def vacuum(cls, damping_tau: float | None = None) -> "PhononInit":
        return cls("vacuum", damping_tau=damping_tau)

    @classmethod
    def fock(cls, n: int, damping_tau: float | None = None) -> "PhononInit":
        return cls("fock", n=n, damping_tau=damping_tau)

    @classmethod
    def thermal(cls, nbar: float, damping_tau: float | None = None) -> "PhononInit":
        return cls("thermal", nbar=nbar, damping_tau=damping_tau)

    def max_level(self) -> int:
        """Highest Fock level the state occupies (thermal: up to 1e-12 tail weight)."""
        if self.kind == "fock":
            return int(self.n)
        if self.kind == "thermal":
            return thermal_cutoff(self.nbar) - 1
        return 0


def _unwrap(values):
    values = np.asarray(values)
    return values if values.ndim else complex(values)


def corr_vacuum(params: MoleculeParams, mode: ModeParams, t):
    """exp(-i w_eg t) exp(D (exp(-i w0 t) - 1))."""
    t = np.asarray(t, dtype=float)
    out = np.exp(-1j * params.omega_eg * t + mode.huang_rhys_D * np.expm1(-1j * mode.omega0 * t))
    return _unwrap(out)


def corr_fock(params: MoleculeParams, mode: ModeParams, n: int, t):
    """exp(-i phi(t)) <n|D(alpha(t))|n> with <n|D|n> = exp(-|alpha|^2/2) L_n(|alpha|^2)."""
    t = np.asarray(t, dtype=float)
    x = np.abs(displacement_amplitude(mode, t)) ** 2
    # -i D sin(w0 t) - |alpha|^2/2 folds back into D(exp(-i w0 t) - 1)
    envelope = np.exp(-1j * params.omega_eg * t + mode.huang_rhys_D * np.expm1(-1j * mode.omega0 * t))
    return _unwrap(envelope * laguerre(n, 0, x))


def corr_thermal(params: MoleculeParams, mode: ModeParams, nbar: float, t):
    """exp(-i w_eg t + D[(nbar+1)(exp(-i w0 t) - 1) + nbar (exp(i w0 t) - 1)])."""
    t = np.asarray(t, dtype=float)
    wt = mode.omega0 * t
    exponent = -1j * params.omega_eg * t + mode.huang_rhys_D * (
        (nbar + 1.0) * np.expm1(-1j * wt) + nbar * np.expm1(1j * wt)
    )
    return _unwrap(np.exp(exponent))


def apply_damping(value, t, tau: float | None):
    """Attenuate by exp(-|t|/tau); ``tau=None`` means undamped.

    The decay uses |t| so that C(-t) = conj(C(t)) survives damping.
    """
    if tau is None:
        return value
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    return value * np.exp(-np.abs(np.asarray(t, dtype=float)) / tau)


def correlation(params: MoleculeParams, mode: ModeParams, init: PhononInit, t):
    """Closed-form C(t) for any single-mode initial state, damping included."""
    if init.kind == "vacuum":
        value = corr_vacuum(params, mode, t)
    elif init.kind == "fock":
        value = corr_fock(params, mode, init.n, t)
    else:
        value = corr_thermal(params, mode, init.nbar, t)
    return apply_damping(value, t, init.damping_tau)


def corr_multimode(omega_eg: float, inits: Sequence[tuple[ModeParams, PhononInit]], t):
    """exp(-i w_eg t) times the product of per-mode factors F_k(t).

    Exact for tensor-product initial states: the trace of a product operator
    over a product state factorizes. Each mode's own damping is applied to its
    factor.
    """
    if not inits:
        raise ValueError("corr_multimode needs at least one mode")
    t = np.asarray(t, dtype=float)
    params = MoleculeParams(omega_eg=omega_eg, modes=tuple(m for m, _ in inits))
    strip = np.exp(1j * omega_eg * t)
    total = np.exp(-1j * omega_eg * t).astype(complex)
    for mode, init in inits:
        total = total * (correlation(params, mode, init, t) * strip)
    return _unwrap(total)

