"""
Command Line - check, bands, invariant, sweep, edge and selftest.

Examples:
    python main.py invariant --model ssh --delta 0.5
    python main.py sweep --model kitaev --mu -3:3:0.25 --delta -2:2:0.25 --jobs 4
    python main.py edge --model kitaev --mu 1 --delta 0.5 --cells 60 --format csv
    python main.py check --file my_model.json

Artifacts go to --out (or standard output); status lines go to standard
error. Exit codes: 0 ok, 1 invalid model or arguments, 2 numerical
failure, 3 internal disagreement.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bands.chains import (
    KitaevParams,
    SSHParams,
    kitaev_gapless_distance,
    kitaev_model,
    ssh_gapless_distance,
    ssh_model,
)
from bands.model import (
    SymmetryKind,
    TightBindingModel,
    hermiticity_residual,
    model_to_document,
    parse_model,
    validate_symmetry,
)
from bands.spectral import band_energies, certify_gap
from boundary.edge import build_truncated, find_edge_modes
from core.config import Settings, defaults, override
from core.errors import ChainError, GapError, ModelInvalidError, UsageError
from topology.invariant import compute_invariant, sweep
from ui import reports
from ui.selftest import run_selftest

logger = logging.getLogger(__name__)

COMMANDS = ("check", "bands", "invariant", "sweep", "edge", "selftest")
RANGE_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs, validated by from_args."""

    command: str
    model: Optional[str] = None
    file: Optional[Path] = None
    delta: Optional[str] = None
    mu: Optional[str] = None
    symmetry: Optional[str] = None
    grid_size: int = 2048
    cells: int = 60
    jobs: int = 1
    seed: int = 0
    out: Optional[Path] = None
    format: str = "json"
    settings: Settings = field(default_factory=defaults)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_range(text: str) -> List[float]:
    """
    ``start:stop:step`` (start included, stop excluded beyond RANGE_TOL) or a
    single number.
    """
    parts = text.split(":")
    try:
        numbers = [float(part) for part in parts]
    except ValueError:
        raise UsageError(f"not a number or range: {text!r}")
    if len(numbers) == 1:
        return numbers
    if len(numbers) != 3 or numbers[2] <= 0.0:
        raise UsageError(f"range must be start:stop:step with a positive step, got {text!r}")
    start, stop, step = numbers
    values = []
    index = 0
    while start + index * step < stop - RANGE_TOL * step:
        values.append(round(start + index * step, 12))
        index += 1
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="z2chain", description="Z2 invariant of symmetric 1D insulators")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--model", choices=("ssh", "kitaev"), help="built-in chain")
    parser.add_argument("--file", type=Path, help="model JSON document")
    parser.add_argument("--delta", help="SSH staggering or Kitaev pairing (range for sweep)")
    parser.add_argument("--mu", help="Kitaev chemical potential (range for sweep)")
    parser.add_argument(
        "--symmetry", choices=[kind.value for kind in SymmetryKind], help="declared symmetry of the Kitaev chain"
    )
    parser.add_argument("--grid", type=int, help="momentum grid size (power of two, at least 256)")
    parser.add_argument("--cells", type=int, default=60, help="unit cells of the truncated chain")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, help="output file (default: standard output)")
    parser.add_argument("--format", choices=("json", "csv"), default=None)
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a setting")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        settings = override(defaults(), args.set)
    except ValueError as exc:
        raise UsageError(str(exc))

    if args.command != "selftest":
        if (args.model is None) == (args.file is None):
            raise UsageError("give exactly one model source: --model or --file")
    if args.model == "ssh" and args.mu is not None:
        raise UsageError("the SSH chain has no --mu")

    default_grid = settings.smoke_grid if args.command == "selftest" else settings.transport_grid
    grid = default_grid if args.grid is None else args.grid
    if grid < 256 or grid & (grid - 1):
        raise UsageError(f"--grid must be a power of two >= 256, got {grid}")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")

    default_format = "csv" if args.command in ("bands", "sweep") else "json"
    return RunConfig(
        command=args.command,
        model=args.model,
        file=args.file,
        delta=args.delta,
        mu=args.mu,
        symmetry=args.symmetry,
        grid_size=grid,
        cells=args.cells,
        jobs=args.jobs,
        seed=args.seed,
        out=args.out,
        format=args.format or default_format,
        settings=settings,
    )


def _single(text: Optional[str], name: str, default: float) -> float:
    if text is None:
        return default
    values = parse_range(text)
    if len(values) != 1:
        raise UsageError(f"--{name} takes a single value for this command")
    return values[0]


def _builtin(config: RunConfig, delta: float, mu: float) -> TightBindingModel:
    if config.model == "ssh":
        return ssh_model(SSHParams(delta))
    return kitaev_model(KitaevParams(mu, delta), config.symmetry or SymmetryKind.PARTICLE_HOLE.value)


def load_model(config: RunConfig) -> TightBindingModel:
    """Built-in shortcuts go through the same JSON document path as files."""
    if config.file is not None:
        try:
            document = config.file.read_text()
        except OSError as exc:
            raise ModelInvalidError(f"cannot read {config.file}: {exc}", code="schema")
    else:
        delta = _single(config.delta, "delta", 0.5)
        mu = _single(config.mu, "mu", 1.0)
        document = json.dumps(model_to_document(_builtin(config, delta, mu)))
    return parse_model(document, config.settings)


def _run_check(config: RunConfig) -> Tuple[str, int]:
    model = load_model(config)
    document = {
        "N": model.N,
        "R": model.R,
        "hermiticity": hermiticity_residual(model, config.grid_size),
    }
    status = 0
    if model.symmetry is not None:
        symmetry = validate_symmetry(model, config.grid_size, config.settings)
        document["symmetry"] = reports.symmetry_to_dict(symmetry)
        if not symmetry.passed:
            status = ModelInvalidError.exit_code
    try:
        document["gap"] = reports.gap_to_dict(certify_gap(model, config.grid_size, config.settings))
        document["insulator"] = True
    except GapError as exc:
        document["gap"] = {"error": str(exc), "k": exc.k}
        document["insulator"] = False
        status = status or GapError.exit_code
    return reports.to_json(document), status


def _run_bands(config: RunConfig) -> Tuple[str, int]:
    model = load_model(config)
    ks = np.linspace(0.0, 2.0 * np.pi, config.grid_size + 1)
    energies = band_energies(model, ks, config.settings)
    if config.format == "json":
        return reports.to_json({"k": list(ks), "energies": [list(e) for e in energies]}), 0
    return reports.bands_csv(ks, energies), 0


def _run_invariant(config: RunConfig) -> Tuple[str, int]:
    report = compute_invariant(load_model(config), config.grid_size, config.settings)
    return reports.to_json(reports.invariant_to_dict(report)), 0


def _run_sweep(config: RunConfig) -> Tuple[str, int]:
    if config.model is None:
        raise UsageError("sweep needs a built-in --model")
    skip = config.settings.gapless_skip
    deltas = parse_range(config.delta) if config.delta is not None else [0.5]
    points = []
    skipped = 0
    if config.model == "ssh":
        names = ["delta"]
        for delta in deltas:
            if ssh_gapless_distance(SSHParams(delta)) < skip:
                skipped += 1
                continue
            points.append(((("delta", delta),), _builtin(config, delta, 0.0)))
    else:
        names = ["mu", "delta"]
        mus = parse_range(config.mu) if config.mu is not None else [1.0]
        for mu in mus:
            for delta in deltas:
                if kitaev_gapless_distance(KitaevParams(mu, delta)) < skip:
                    skipped += 1
                    continue
                points.append(((("mu", mu), ("delta", delta)), _builtin(config, delta, mu)))
    if skipped:
        logger.info("skipped %d points within %.3g of the gapless set", skipped, skip)
    rows = sweep(points, config.grid_size, config.jobs, config.settings)
    if config.format == "json":
        document = [
            dict(row.params, z2=row.z2, berry_integer=row.berry_integer, gap=row.gap, residual_max=row.residual_max)
            for row in rows
        ]
        return reports.to_json({"rows": document}), 0
    return reports.sweep_csv(rows, names), 0


def _run_edge(config: RunConfig) -> Tuple[str, int]:
    chain = build_truncated(load_model(config), config.cells)
    report = find_edge_modes(chain, settings=config.settings)
    if config.format == "csv":
        return reports.edge_profiles_csv(report), 0
    return reports.to_json(reports.edge_to_dict(report)), 0


def _run_selftest(config: RunConfig) -> Tuple[str, int]:
    report = run_selftest(config.grid_size, config.seed, config.settings)
    for result in report.results:
        mark = "✅" if result.passed else "❌"
        print(f"{mark} {result.name}: {result.detail}", file=sys.stderr)
    document = {
        "passed": report.passed,
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in report.results],
    }
    return reports.to_json(document), 0 if report.passed else 3


HANDLERS = {
    "check": _run_check,
    "bands": _run_bands,
    "invariant": _run_invariant,
    "sweep": _run_sweep,
    "edge": _run_edge,
    "selftest": _run_selftest,
}


def run(config: RunConfig) -> int:
    """
    Execute one command and write its artifact.

    Returns:
        Exit status (0, 1, 2 or 3)
    """
    text, status = HANDLERS[config.command](config)
    if config.out is None:
        sys.stdout.write(text)
    else:
        config.out.write_text(text)
        print(f"📄 Wrote {config.out}", file=sys.stderr)
    return status


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _attach_values(argv: Sequence[str]) -> List[str]:
    """Glue range values starting with a minus sign to their flag (--mu -3:3:1 -> --mu=-3:3:1)."""
    out: List[str] = []
    tokens = list(argv)
    index = 0
    while index < len(tokens):
        token = tokens[index]
        if token in ("--mu", "--delta") and index + 1 < len(tokens) and not tokens[index + 1].startswith("--"):
            out.append(f"{token}={tokens[index + 1]}")
            index += 2
            continue
        out.append(token)
        index += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run, and map errors to exit codes."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(_attach_values(argv))
        configure_logging(args.verbose)
        config = config_from_args(args)
        status = run(config)
    except KeyboardInterrupt:
        print("\n👋 Interrupted", file=sys.stderr)
        return 130
    except ChainError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code

    if status == 0:
        print(f"✅ {config.command} finished", file=sys.stderr)
    else:
        print(f"⚠️ {config.command} finished with status {status}", file=sys.stderr)
    return status
