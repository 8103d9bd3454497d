"""
Ancilla-qubit circuit that measures the dipole correlation function.

One run at time t:

1. rotate the qubit from |g> by R_{-phi-pi/2}(pi - gamma), giving
   exp(-i phi) sin(gamma/2)|g> + cos(gamma/2)|e>,
2. displace the cavity by alpha(t) conditioned on |g>,
3. read <sigma_x> + i<sigma_y> of the qubit,

which returns sin(gamma) exp(-i phi(t)) <D(alpha(t))> over the cavity state.

Qubit conventions: vectors are ordered (g, e) and sigma_z|e> = +|e>, so that
sigma_x = |e><g| + |g><e| and sigma_y = -i|e><g| + i|g><e|. With this choice
R_phi(theta) = exp(-i theta/2 (cos phi sigma_x + sin phi sigma_y)) produces the
preparation above, and the pi/2 pulses R_X, R_Y followed by a Z readout give
<sigma_y> and <sigma_x> respectively.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .fock import (
    TruncatedSpace,
    displacement_operator,
    fock_state,
    projector,
    thermal_populations,
    thermal_cutoff,
)
from .molecule import ModeParams, MoleculeParams, displacement_amplitude, phase_phi
from .oracles import PhononInit
from .spectrum import DEFAULT_GRID, CorrelationTrace, TimeGrid

ThermalMode = Literal["faithful", "direct"]

GROUND = np.array([1.0, 0.0], dtype=complex)
EXCITED = np.array([0.0, 1.0], dtype=complex)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)

# pi/2 pulses used before the Z readout
R_X = np.array([[1, -1j], [-1j, 1]], dtype=complex) / math.sqrt(2)
R_Y = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)


def rotation_gate(theta: float, phi_axis: float) -> np.ndarray:
    """Rotation by ``theta`` about the axis at azimuth ``phi_axis`` in the X-Y plane."""
    axis = math.cos(phi_axis) * SIGMA_X + math.sin(phi_axis) * SIGMA_Y
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * axis


@dataclass(frozen=True)
class QubitPrep:
    gamma: float
    phi: float

    def state(self) -> np.ndarray:
        """exp(-i phi) sin(gamma/2)|g> + cos(gamma/2)|e>."""
        return np.array(
            [np.exp(-1j * self.phi) * math.sin(self.gamma / 2), math.cos(self.gamma / 2)], dtype=complex
        )

    def pulse(self) -> np.ndarray:
        """The single rotation that prepares ``state()`` from |g>, up to a global phase."""
        return rotation_gate(math.pi - self.gamma, -self.phi - math.pi / 2)


@dataclass(frozen=True)
class ImperfectionModel:
    """Phenomenological hardware errors.

    contrast_f scales every measured coherence; prep_fidelity_F mixes a
    prepared Fock state |n> with vacuum, F|n><n| + (1-F)|0><0|.
    """

    contrast_f: float = 1.0
    prep_fidelity_F: float = 1.0

    def __post_init__(self):
        for name in ("contrast_f", "prep_fidelity_F"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")


@dataclass(frozen=True)
class JointState:
    """Qubit (x) cavity state, pure (``vector``) or mixed (``density``).

    Index ordering is qubit-major: entry q*dim + n holds qubit level q
    (0 = g, 1 = e) and Fock level n.
    """

    space: TruncatedSpace
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if (self.vector is None) == (self.density is None):
            raise ValueError("JointState needs exactly one of vector or density")

    @classmethod
    def product(cls, qubit: np.ndarray, cavity: np.ndarray, space: TruncatedSpace) -> "JointState":
        """|qubit> (x) cavity, where ``cavity`` is a state vector or a density matrix."""
        qubit = np.asarray(qubit, dtype=complex)
        cavity = np.asarray(cavity, dtype=complex)
        if cavity.ndim == 1:
            return cls(space, vector=np.outer(qubit, cavity).ravel())
        return cls(space, density=np.kron(projector(qubit), cavity))

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def apply_qubit(self, gate: np.ndarray) -> "JointState":
        d = self.space.dim
        if self.is_pure:
            blocks = self.vector.reshape(2, d)
            return replace(self, vector=(gate @ blocks).reshape(-1))
        rho = self.density.reshape(2, d, 2, d)
        rho = np.einsum("ab,bjck,dc->ajdk", gate, rho, gate.conj())
        return replace(self, density=rho.reshape(2 * d, 2 * d))

    def reduced_qubit(self) -> np.ndarray:
        d = self.space.dim
        if self.is_pure:
            blocks = self.vector.reshape(2, d)
            return blocks @ blocks.conj().T
        return np.einsum("ajbj->ab", self.density.reshape(2, d, 2, d))


def _controlled(op: np.ndarray, joint: JointState) -> JointState:
    """Apply |g><g| (x) op + |e><e| (x) I."""
    d = joint.space.dim
    if joint.is_pure:
        blocks = joint.vector.reshape(2, d).copy()
        blocks[0] = op @ blocks[0]
        return replace(joint, vector=blocks.reshape(-1))
    rho = joint.density.reshape(2, d, 2, d).copy()
    op_dag = op.conj().T
    rho[0, :, 0, :] = op @ rho[0, :, 0, :] @ op_dag
    rho[0, :, 1, :] = op @ rho[0, :, 1, :]
    rho[1, :, 0, :] = rho[1, :, 0, :] @ op_dag
    return replace(joint, density=rho.reshape(2 * d, 2 * d))


def controlled_displacement(alpha: complex, joint: JointState) -> JointState:
    """Displace the cavity by ``alpha`` on the |g> branch only."""
    return _controlled(displacement_operator(alpha, joint.space), joint)


def measure_sxy(joint: JointState, route: Literal["direct", "rotation"] = "direct") -> complex:
    """<sigma_x> + i<sigma_y> of the qubit.

    ``route="rotation"`` follows the hardware: a pi/2 pulse (R_Y for sigma_x,
    R_X for sigma_y) and then a Z-basis expectation.
    """
    if route == "direct":
        rho = joint.reduced_qubit()
        return complex(np.trace(rho @ SIGMA_X).real + 1j * np.trace(rho @ SIGMA_Y).real)
    if route == "rotation":
        sx = np.trace(joint.apply_qubit(R_Y).reduced_qubit() @ SIGMA_Z).real
        sy = np.trace(joint.apply_qubit(R_X).reduced_qubit() @ SIGMA_Z).real
        return complex(sx + 1j * sy)
    raise ValueError(f"unknown measurement route {route!r}")


def gamma_schedule(init: PhononInit, mode: ModeParams, t: float) -> float:
    """Polar angle of the qubit preparation.

    sin(gamma) = exp(2 D nbar (cos(w0 t) - 1)) for thermal states, times
    exp(-|t|/tau) when damping is attached; gamma = pi/2 otherwise.
    """
    log_sin = 0.0
    if init.kind == "thermal":
        log_sin += 2.0 * mode.huang_rhys_D * init.nbar * (math.cos(mode.omega0 * t) - 1.0)
    if init.damping_tau is not None:
        log_sin -= abs(t) / init.damping_tau
    return math.asin(math.exp(log_sin))


def protocol_space(mode: ModeParams, init: PhononInit, thermal_mode: ThermalMode = "faithful") -> TruncatedSpace:
    """Default truncation for simulating ``init`` under this mode's displacements."""
    n_top = 0 if (init.kind == "thermal" and thermal_mode == "faithful") else init.max_level()
    return TruncatedSpace.for_protocol(mode.huang_rhys_D, n_top)


def _cavity_ensemble(init, space, thermal_mode, imperfection):
    """Cavity preparation as a list of (weight, state vector or density).

    Also returns the PhononInit whose gamma schedule the qubit should follow.
    """
    schedule = init
    if init.kind == "vacuum":
        parts = [(1.0, fock_state(0, space))]
    elif init.kind == "fock":
        psi = fock_state(init.n, space)
        fid = 1.0 if imperfection is None else imperfection.prep_fidelity_F
        if fid < 1.0:
            rho = fid * projector(psi) + (1.0 - fid) * projector(fock_state(0, space))
            parts = [(1.0, rho)]
        else:
            parts = [(1.0, psi)]
    elif thermal_mode == "faithful":
        parts = [(1.0, fock_state(0, space))]
    elif thermal_mode == "direct":
        levels = thermal_cutoff(init.nbar)
        weights = thermal_populations(init.nbar, levels)
        parts = [(float(w), fock_state(n, space)) for n, w in enumerate(weights)]
        # the Boltzmann average replaces the thermal factor in sin(gamma)
        schedule = PhononInit.vacuum(init.damping_tau)
    else:
        raise ValueError(f"unknown thermal mode {thermal_mode!r}")
    return parts, schedule


def _run_prepared(params, mode, t, space, parts, schedule, contrast) -> complex:
    gamma = gamma_schedule(schedule, mode, t)
    prep = QubitPrep(gamma, phase_phi(params, mode, t))
    qubit = prep.pulse() @ GROUND
    op = displacement_operator(displacement_amplitude(mode, t), space)
    total = 0j
    for weight, cavity in parts:
        joint = JointState.product(qubit, cavity, space)
        total += weight * measure_sxy(_controlled(op, joint))
    return contrast * total


def run_point(
    params: MoleculeParams,
    mode: ModeParams,
    init: PhononInit,
    t: float,
    space: TruncatedSpace | None = None,
    *,
    thermal_mode: ThermalMode = "faithful",
    imperfection: ImperfectionModel | None = None,
) -> complex:
    """Simulated C(t) from one execution of the circuit.

    Thermal states run either as the hardware does (``"faithful"``: vacuum
    cavity, thermal factor folded into gamma) or as an explicit Boltzmann
    average of Fock-state runs with gamma = pi/2 (``"direct"``).
    """
    if space is None:
        space = protocol_space(mode, init, thermal_mode)
    parts, schedule = _cavity_ensemble(init, space, thermal_mode, imperfection)
    contrast = 1.0 if imperfection is None else imperfection.contrast_f
    return _run_prepared(params, mode, float(t), space, parts, schedule, contrast)


def run_trace(
    params: MoleculeParams,
    mode: ModeParams,
    init: PhononInit,
    grid: TimeGrid = DEFAULT_GRID,
    imperfection: ImperfectionModel | None = None,
    *,
    space: TruncatedSpace | None = None,
    thermal_mode: ThermalMode = "faithful",
    jobs: int = 1,
) -> CorrelationTrace:
    """Run the circuit at every grid time; each point is computed independently."""
    if space is None:
        space = protocol_space(mode, init, thermal_mode)
    parts, schedule = _cavity_ensemble(init, space, thermal_mode, imperfection)
    contrast = 1.0 if imperfection is None else imperfection.contrast_f

    def point(t):
        return _run_prepared(params, mode, float(t), space, parts, schedule, contrast)

    times = grid.times
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(point, times))
    else:
        values = [point(t) for t in times]
    return CorrelationTrace(dt=grid.dt, values=np.array(values, dtype=complex))
