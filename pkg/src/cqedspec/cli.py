"""
Command-line front end.

    cqedspec trace    --config run.yaml --out trace.csv
    cqedspec spectrum --config run.yaml --out spectrum.csv
    cqedspec sweep    --config sweep.yaml --out sweep.csv --jobs 4
    cqedspec verify

Every output file starts with a manifest (resolved config, truncation used,
code version, command) from which the run can be repeated byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .acceptance import CRITERIA, run_all
from .circuit import protocol_space, run_trace
from .config import RunConfig, parse_config, parse_mapping
from .errors import ConfigError, GridMismatchError, TruncationError
from .fock import TruncatedSpace
from .molecule import ModeParams, MoleculeParams
from .oracles import PhononInit, apply_damping, corr_multimode
from .spectrum import CorrelationTrace, dft_spectrum

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TRUNCATION = 2
EXIT_VERIFY = 3

MANIFEST_PREFIX = "# "


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _uses_circuit(config: RunConfig, command: str) -> bool:
    if config.engine == "auto":
        return command != "sweep" and len(config.molecule.modes) == 1
    return config.engine == "circuit"


def _space(config: RunConfig) -> TruncatedSpace:
    mode = config.molecule.mode
    try:
        if config.dim is None:
            return protocol_space(mode, config.init, config.thermal_mode)
        return TruncatedSpace.from_dim(config.dim, 2.0 * mode.d_tilde)
    except TruncationError as exc:
        raise TruncationError(f"D={mode.huang_rhys_D:g}, dim={config.dim}: {exc}") from None


def compute_trace(config: RunConfig, command: str, jobs: int = 1) -> tuple[CorrelationTrace, dict | None]:
    """Correlation trace for ``config`` and the truncation that produced it (None for the oracle)."""
    mol, init, grid = config.molecule, config.init, config.grid
    if _uses_circuit(config, command):
        space = _space(config)
        try:
            trace = run_trace(
                mol, mol.mode, init, grid, config.imperfection, space=space,
                thermal_mode=config.thermal_mode, jobs=jobs,
            )
        except TruncationError as exc:
            raise TruncationError(f"D={mol.mode.huang_rhys_D:g}, dim={space.dim}: {exc}") from None
        return trace, {"dim": space.dim, "safe_dim": space.safe_dim}

    t = grid.times
    undamped = replace(init, damping_tau=None)
    states = [undamped]
    imp = config.imperfection
    weights = [1.0]
    if imp is not None and init.kind == "fock" and imp.prep_fidelity_F < 1.0:
        # the same vacuum admixture the circuit applies, by linearity of C in the state
        states = [undamped, PhononInit.vacuum()]
        weights = [imp.prep_fidelity_F, 1.0 - imp.prep_fidelity_F]
    values = np.zeros(t.size, dtype=complex)
    for w, state in zip(weights, states):
        values += w * corr_multimode(mol.omega_eg, [(m, state) for m in mol.modes], t)
    values = apply_damping(values, t, init.damping_tau)
    if imp is not None:
        values = imp.contrast_f * values
    return CorrelationTrace(grid.dt, values), None


def _sweep_config(config: RunConfig, value: float) -> RunConfig:
    parameter = config.sweep.parameter
    if parameter == "D":
        mode = config.molecule.mode
        molecule = MoleculeParams(config.molecule.omega_eg, (ModeParams(mode.omega0, value),))
        return replace(config, molecule=molecule)
    if parameter == "nbar":
        return replace(config, init=replace(config.init, nbar=value))
    tau = 1.0 / (value * config.molecule.mode.omega0)
    return replace(config, init=replace(config.init, damping_tau=tau))


def cmd_trace(config: RunConfig, jobs: int = 1):
    trace, trunc = compute_trace(config, "trace", jobs)
    rows = [(t, v.real, v.imag) for t, v in zip(trace.times, trace.values)]
    return ["t", "re_C", "im_C"], rows, trunc


def cmd_spectrum(config: RunConfig, jobs: int = 1):
    trace, trunc = compute_trace(config, "spectrum", jobs)
    spec = dft_spectrum(trace)
    return ["omega", "sigma"], list(zip(spec.omegas, spec.values)), trunc


def cmd_sweep(config: RunConfig, jobs: int = 1):
    if config.sweep is None:
        raise ConfigError("the sweep command needs a 'sweep' section", field="sweep")
    mol = config.molecule
    omega = mol.omega_eg + config.sweep.j * mol.mode.omega0

    def point(value):
        sub = _sweep_config(config, value)
        trace, trunc = compute_trace(sub, "sweep")
        spec = dft_spectrum(trace)
        return (value, float(spec.values[spec.bin_of(omega)])), trunc

    # points are independent; pool.map keeps input order so output is scheduling-free
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(point, config.sweep.values))
    else:
        results = [point(v) for v in config.sweep.values]
    rows = [r for r, _ in results]
    truncs = [t for _, t in results]
    trunc = None if all(t is None for t in truncs) else truncs
    return ["param", "peak"], rows, trunc


COMMANDS = {"trace": cmd_trace, "spectrum": cmd_spectrum, "sweep": cmd_sweep}


def build_manifest(config: RunConfig, command: str, truncation) -> dict[str, Any]:
    return {
        "command": command,
        "config": config.to_mapping(),
        "truncation": truncation,
        "version": __version__,
    }


def render(columns, rows, manifest, fmt: str) -> str:
    if fmt == "structured":
        doc = {
            "manifest": manifest,
            "columns": columns,
            "rows": [[float(x) for x in row] for row in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    header = json.dumps(manifest, sort_keys=True, indent=1).splitlines()
    lines = [MANIFEST_PREFIX + h for h in header]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def load_manifest(path: str | Path) -> dict[str, Any]:
    """Manifest block of a file written by this CLI, in either format."""
    text = Path(path).read_text()
    if text.startswith(MANIFEST_PREFIX):
        block = [line[len(MANIFEST_PREFIX):] for line in text.splitlines() if line.startswith(MANIFEST_PREFIX)]
        return json.loads("\n".join(block))
    return json.loads(text)["manifest"]


def config_from_manifest(manifest: dict[str, Any]) -> RunConfig:
    return parse_mapping(manifest["config"])


def _read_config(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
    config = parse_config(text)
    if args.dim is not None:
        if args.dim < 2:
            raise ConfigError(f"--dim must be >= 2, got {args.dim}", field="truncation.dim")
        config = replace(config, dim=args.dim)
    if args.format is not None:
        config = replace(config, output_format=args.format)
    return config


def _run_command(args) -> int:
    config = _read_config(args)
    columns, rows, trunc = COMMANDS[args.command](config, args.jobs)
    text = render(columns, rows, build_manifest(config, args.command, trunc), config.output_format)
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {args.out}: {exc.strerror}") from None
    return EXIT_OK


def _run_verify(args) -> int:
    numbers = None
    if args.criteria:
        try:
            numbers = sorted({int(x) for x in args.criteria.split(",")})
        except ValueError:
            raise ConfigError(f"--criteria must be comma-separated integers, got {args.criteria!r}") from None
        unknown = [n for n in numbers if n not in CRITERIA]
        if unknown:
            raise ConfigError(f"unknown criteria {unknown}; known: 1..{max(CRITERIA)}")
    results = run_all(numbers)
    for r in results:
        print(r.line())
        if not r.passed or args.verbose:
            print(f"       {r.detail}")
    failed = sum(not r.passed for r in results)
    total = sum(r.seconds for r in results)
    print(f"{len(results) - failed}/{len(results)} criteria passed in {total:.1f}s")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqedspec", description="Circuit simulation of vibronic spectroscopy.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("trace", "correlation function C(t) on the time grid"),
        ("spectrum", "absorption spectrum from the correlation function"),
        ("sweep", "zero-phonon (or j-th) peak as a function of a swept parameter"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML run configuration (defaults apply when omitted)")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "structured"), help="csv (default) or JSON")
        p.add_argument("--dim", type=int, help="Fock-space dimension override")
        p.add_argument("--jobs", type=int, default=1, help="worker threads")
    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--criteria", help="comma-separated subset, e.g. 1,4,12")
    v.add_argument("-v", "--verbose", action="store_true", help="print the worst check of every criterion")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.command == "verify":
            return _run_verify(args)
        return _run_command(args)
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (ConfigError, GridMismatchError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
