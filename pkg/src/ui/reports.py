"""
Reports - Turning results into JSON documents and CSV tables.

Floats are written with 12 significant digits, keys are sorted and CSV
rows end in a bare LF, so identical runs give byte-identical files.
"""

import csv
import io
import json
import math
from typing import Any, Iterable, List, Sequence

import numpy as np

from bands.model import SymmetryReport
from bands.spectral import GapReport
from boundary.edge import EdgeModeReport
from topology.invariant import HomotopyReport, InvariantReport, SweepRow


def fmt(value: float) -> str:
    """A float with 12 significant digits."""
    return f"{float(value):.12g}"


def _clean(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return None
        return float(fmt(value))
    return value


def to_json(document: dict) -> str:
    return json.dumps(_clean(document), indent=2, sort_keys=True) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(cell) if isinstance(cell, (float, np.floating)) else cell for cell in row])
    return buffer.getvalue()


def gap_to_dict(gap: GapReport) -> dict:
    return {
        "g": gap.g,
        "min_abs_eigenvalue": gap.min_abs_eigenvalue,
        "lower_bound": gap.lower_bound,
        "grid_size": gap.grid_size,
        "k_min": gap.k_min,
        "slope_bound": gap.slope_bound,
        "refined_samples": gap.refined_samples,
    }


def symmetry_to_dict(report: SymmetryReport) -> dict:
    return {
        "kind": report.kind,
        "residual": report.residual,
        "grid_size": report.grid_size,
        "tolerance": report.tolerance,
        "passed": report.passed,
    }


def invariant_to_dict(report: InvariantReport) -> dict:
    return {
        "z2": report.z2,
        "berry_integer": report.berry_integer,
        "berry_value": report.berry_value,
        "pathway_agreement": report.pathway_agreement,
        "gap": gap_to_dict(report.gap),
        "residuals": report.residuals,
        "grid_size": report.grid_size,
        "symmetry": report.symmetry,
        "branch_flag": report.branch_flag,
    }


def edge_to_dict(report: EdgeModeReport) -> dict:
    return {
        "cells": report.cells,
        "near_zero_energies": report.near_zero_energies,
        "modes": [
            {
                "end": mode.end,
                "energy": mode.energy,
                "localization": mode.localization,
                "decay_fit": mode.decay_fit,
            }
            for mode in report.modes
        ],
        "count": {"left": len(report.at("left")), "right": len(report.at("right"))},
    }


def edge_profiles_csv(report: EdgeModeReport) -> str:
    """|psi_n| per cell for every reported mode."""
    header = ["cell"] + [f"mode_{i}_{mode.end}" for i, mode in enumerate(report.modes)]
    rows = [
        [cell] + [float(mode.cell_norms[cell]) for mode in report.modes] for cell in range(report.cells)
    ]
    return to_csv(header, rows)


def homotopy_to_dict(report: HomotopyReport) -> dict:
    return {
        "samples": report.samples,
        "z2": report.z2,
        "distances": report.distances,
        "transport_residual": report.transport_residual,
        "constant": report.constant,
    }


def sweep_csv(rows: List[SweepRow], names: Sequence[str]) -> str:
    header = list(names) + ["z2", "berry_integer", "gap", "residual_max"]
    body = [
        [float(value) for _, value in row.params] + [row.z2, row.berry_integer, row.gap, row.residual_max]
        for row in rows
    ]
    return to_csv(header, body)


def bands_csv(ks: Sequence[float], energies: Sequence[np.ndarray]) -> str:
    n = len(energies[0]) if len(energies) else 0
    header = ["k"] + [f"E_{i + 1}" for i in range(n)]
    return to_csv(header, ([float(k)] + [float(e) for e in row] for k, row in zip(ks, energies)))
