"""
Run configuration: YAML text in, validated RunConfig out, and back again.

Schema (every key optional; omitted keys take the defaults shown):

    molecule:
      omega_eg: 0.6283185307179586      # pi/5
      modes:
        - {omega0: 0.03490658503988659, D: 1.0}
    init:
      kind: vacuum                       # vacuum | fock | thermal
      n: 0                               # Fock level (kind: fock)
      nbar: 0.0                          # mean occupation (kind: thermal)
      tau: null                          # damping time; null = undamped
    grid: {dt: 1.0, t_max: 900.0}
    imperfection: {f: 1.0, F: 1.0}       # block absent = ideal hardware
    truncation: {dim: null}              # null = automatic
    simulation: {engine: auto, thermal_mode: faithful}
    sweep: {parameter: D, values: [0, 1, 4], j: 0}
    output: {format: csv}

``engine: auto`` runs the circuit for single-mode traces and spectra and the
closed-form oracles for sweeps and multi-mode molecules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Literal

import yaml

from .circuit import ImperfectionModel
from .errors import ConfigError
from .molecule import DEFAULT_DT, DEFAULT_OMEGA0, DEFAULT_OMEGA_EG, DEFAULT_T_MAX, ModeParams, MoleculeParams
from .oracles import PhononInit
from .spectrum import TimeGrid

MAX_D = 8.0
MAX_NBAR = 8.0
MAX_INV_TAU = 4.0
MAX_FOCK = 40

SweepParameter = Literal["D", "nbar", "inv_tau_omega0"]
Engine = Literal["auto", "circuit", "oracle"]

_SCHEMA = {
    "molecule": {"omega_eg", "modes"},
    "init": {"kind", "n", "nbar", "tau"},
    "grid": {"dt", "t_max"},
    "imperfection": {"f", "F"},
    "truncation": {"dim"},
    "simulation": {"engine", "thermal_mode"},
    "sweep": {"parameter", "values", "j"},
    "output": {"format"},
}


@dataclass(frozen=True)
class SweepSpec:
    parameter: SweepParameter
    values: tuple[float, ...]
    j: int = 0


@dataclass(frozen=True)
class RunConfig:
    molecule: MoleculeParams = field(default_factory=MoleculeParams.single_mode)
    init: PhononInit = field(default_factory=PhononInit.vacuum)
    grid: TimeGrid = field(default_factory=TimeGrid)
    imperfection: ImperfectionModel | None = None
    dim: int | None = None
    engine: Engine = "auto"
    thermal_mode: str = "faithful"
    sweep: SweepSpec | None = None
    output_format: str = "csv"

    def to_mapping(self) -> dict[str, Any]:
        """Fully resolved config in schema form; parse_mapping() inverts it exactly."""
        init = {"kind": self.init.kind, "n": int(self.init.n), "nbar": float(self.init.nbar), "tau": self.init.damping_tau}
        out: dict[str, Any] = {
            "molecule": {
                "omega_eg": self.molecule.omega_eg,
                "modes": [{"omega0": m.omega0, "D": m.huang_rhys_D} for m in self.molecule.modes],
            },
            "init": init,
            "grid": {"dt": self.grid.dt, "t_max": self.grid.t_max},
            "imperfection": None
            if self.imperfection is None
            else {"f": self.imperfection.contrast_f, "F": self.imperfection.prep_fidelity_F},
            "truncation": {"dim": self.dim},
            "simulation": {"engine": self.engine, "thermal_mode": self.thermal_mode},
            "sweep": None
            if self.sweep is None
            else {"parameter": self.sweep.parameter, "values": list(self.sweep.values), "j": self.sweep.j},
            "output": {"format": self.output_format},
        }
        return out


class _Locator:
    """Maps dotted key paths to 1-based line numbers of the source text."""

    def __init__(self, node):
        self.lines: dict[str, int] = {}
        if node is not None:
            self._walk(node, "")

    def _walk(self, node, prefix):
        self.lines.setdefault(prefix, node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                self.lines[path] = key.start_mark.line + 1
                self._walk(value, path)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                self._walk(item, f"{prefix}[{i}]")

    def error(self, path: str, message: str) -> ConfigError:
        probe = path
        while probe and probe not in self.lines:
            probe = probe.rsplit(".", 1)[0] if "." in probe else ""
        line = self.lines.get(probe)
        return ConfigError(message, field=path, line=line)


def parse_config(text: str) -> RunConfig:
    """Parse and validate YAML config text."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"malformed config: {exc.problem or exc}", line=line) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return parse_mapping(data, _Locator(node))


def parse_mapping(data: Any, locator: _Locator | None = None) -> RunConfig:
    loc = locator or _Locator(None)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise loc.error("", "config must be a mapping at the top level")
    for key, value in data.items():
        if key not in _SCHEMA:
            raise loc.error(str(key), f"unknown config section {key!r}")
        if value is not None and not isinstance(value, dict):
            raise loc.error(str(key), f"section {key!r} must be a mapping")
        for sub in value or {}:
            if sub not in _SCHEMA[key]:
                raise loc.error(f"{key}.{sub}", f"unknown key {key}.{sub}")

    def section(name):
        return data.get(name) or {}

    def number(path, value, *, lo=None, hi=None, lo_open=False, integer=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise loc.error(path, f"{path} must be a number, got {value!r}")
        if integer and int(value) != value:
            raise loc.error(path, f"{path} must be an integer, got {value!r}")
        value = int(value) if integer else float(value)
        if not math.isfinite(value):
            raise loc.error(path, f"{path} must be finite, got {value!r}")
        if lo is not None and (value <= lo if lo_open else value < lo):
            bound = f"> {lo}" if lo_open else f">= {lo}"
            raise loc.error(path, f"{path}={value} out of range: must be {bound}")
        if hi is not None and value > hi:
            raise loc.error(path, f"{path}={value} out of range: must be <= {hi}")
        return value

    def choice(path, value, options):
        if value not in options:
            raise loc.error(path, f"{path} must be one of {sorted(options)}, got {value!r}")
        return value

    mol = section("molecule")
    omega_eg = number("molecule.omega_eg", mol.get("omega_eg", DEFAULT_OMEGA_EG), lo=0.0, lo_open=True)
    raw_modes = mol.get("modes", [{"omega0": DEFAULT_OMEGA0, "D": 1.0}])
    if not isinstance(raw_modes, list) or not raw_modes:
        raise loc.error("molecule.modes", "molecule.modes must be a non-empty list")
    modes = []
    for i, raw in enumerate(raw_modes):
        path = f"molecule.modes[{i}]"
        if not isinstance(raw, dict):
            raise loc.error(path, f"{path} must be a mapping with omega0 and D")
        for key in raw:
            if key not in ("omega0", "D"):
                raise loc.error(f"{path}.{key}", f"unknown key {path}.{key}")
        omega0 = number(f"{path}.omega0", raw.get("omega0", DEFAULT_OMEGA0), lo=0.0, lo_open=True)
        d = number(f"{path}.D", raw.get("D", 1.0), lo=0.0, hi=MAX_D)
        modes.append(ModeParams(omega0, d))
    molecule = MoleculeParams(omega_eg, tuple(modes))

    ini = section("init")
    kind = choice("init.kind", ini.get("kind", "vacuum"), {"vacuum", "fock", "thermal"})
    n = number("init.n", ini.get("n", 0), lo=0, hi=MAX_FOCK, integer=True)
    nbar = number("init.nbar", ini.get("nbar", 0.0), lo=0.0, hi=MAX_NBAR)
    tau = ini.get("tau")
    if tau is not None:
        tau = number("init.tau", tau, lo=0.0, lo_open=True)
        inv = 1.0 / (tau * modes[0].omega0)
        if inv > MAX_INV_TAU:
            raise loc.error("init.tau", f"init.tau={tau} gives 1/(tau omega0)={inv:.6g}, must be <= {MAX_INV_TAU}")
    init = PhononInit(kind, n=n, nbar=nbar, damping_tau=tau)

    grd = section("grid")
    dt = number("grid.dt", grd.get("dt", DEFAULT_DT), lo=0.0, lo_open=True)
    t_max = number("grid.t_max", grd.get("t_max", DEFAULT_T_MAX), lo=0.0, lo_open=True)
    try:
        grid = TimeGrid(dt, t_max)
    except ValueError as exc:
        raise loc.error("grid", str(exc)) from None

    imperfection = None
    if data.get("imperfection") is not None:
        imp = section("imperfection")
        f = number("imperfection.f", imp.get("f", 1.0), lo=0.0, hi=1.0, lo_open=True)
        big_f = number("imperfection.F", imp.get("F", 1.0), lo=0.0, hi=1.0, lo_open=True)
        imperfection = ImperfectionModel(f, big_f)

    dim = section("truncation").get("dim")
    if dim is not None:
        dim = number("truncation.dim", dim, lo=2, integer=True)

    sim = section("simulation")
    engine = choice("simulation.engine", sim.get("engine", "auto"), {"auto", "circuit", "oracle"})
    thermal_mode = choice("simulation.thermal_mode", sim.get("thermal_mode", "faithful"), {"faithful", "direct"})
    if engine == "circuit" and len(modes) > 1:
        raise loc.error("simulation.engine", "the circuit engine simulates one mode; use engine: oracle")

    sweep = None
    if data.get("sweep") is not None:
        swp = section("sweep")
        parameter = choice("sweep.parameter", swp.get("parameter"), {"D", "nbar", "inv_tau_omega0"})
        values = swp.get("values")
        if not isinstance(values, list) or not values:
            raise loc.error("sweep.values", "sweep.values must be a non-empty list")
        limits = {"D": (0.0, MAX_D, False), "nbar": (0.0, MAX_NBAR, False), "inv_tau_omega0": (0.0, MAX_INV_TAU, True)}
        lo, hi, lo_open = limits[parameter]
        checked = tuple(
            number(f"sweep.values[{i}]", v, lo=lo, hi=hi, lo_open=lo_open) for i, v in enumerate(values)
        )
        if any(b <= a for a, b in zip(checked, checked[1:])):
            raise loc.error("sweep.values", "sweep.values must be strictly ascending")
        if parameter == "D" and len(modes) > 1:
            raise loc.error("sweep.parameter", "a D sweep needs a single-mode molecule")
        if parameter == "nbar" and kind != "thermal":
            raise loc.error("sweep.parameter", "an nbar sweep needs init.kind: thermal")
        j = number("sweep.j", swp.get("j", 0), lo=0, integer=True)
        sweep = SweepSpec(parameter, checked, j)

    fmt = choice("output.format", section("output").get("format", "csv"), {"csv", "structured"})
    return RunConfig(molecule, init, grid, imperfection, dim, engine, thermal_mode, sweep, fmt)


def dump_config(config: RunConfig) -> str:
    """YAML text that parses back to ``config``."""
    return yaml.safe_dump(config.to_mapping(), sort_keys=True)
