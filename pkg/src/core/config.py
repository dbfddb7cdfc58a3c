"""
Settings - Every numerical tolerance and default in one frozen place.

Library functions take an optional ``settings`` argument and fall back to
``defaults()``. The command line builds a modified copy with
``override(settings, ["transport_grid=4096", ...])``.
"""

from dataclasses import dataclass, fields, replace
from typing import Iterable


@dataclass(frozen=True)
class Settings:
    """Numerical knobs shared across the pipeline."""

    # structural checks (hermiticity, unitarity, symmetry residuals)
    structural_tol: float = 1e-10
    # models whose certified gap falls below this are rejected
    gap_threshold: float = 1e-6

    # Jacobi eigensolver
    jacobi_tol: float = 1e-14
    jacobi_max_sweeps: int = 50

    # parallel transport
    transport_grid: int = 2048
    smoke_grid: int = 256
    intertwining_limit: float = 1e-6
    periodicity_limit: float = 1e-6
    refinement_levels: int = 4
    branch_tol: float = 1e-8

    # Berry phase rounding
    rounding_tol: float = 0.1

    # winding numbers
    aliasing_margin: float = 0.1
    aliasing_levels: int = 3

    # Riesz projection oracle
    quad_points: int = 256
    contour_margin: float = 1e-8

    # homotopy paths
    homotopy_bisect: float = 0.9
    homotopy_max_depth: int = 8

    # truncated chains
    edge_tol: float = 1e-6
    loc_threshold: float = 0.9
    spectrum_padding: float = 0.1

    # sweeps
    gapless_skip: float = 0.05


_DEFAULTS = Settings()


def defaults() -> Settings:
    """Return the shared default settings."""
    return _DEFAULTS


def _coerce(raw: str, template):
    if isinstance(template, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(template, int):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    return raw


def override(settings: Settings, assignments: Iterable[str]) -> Settings:
    """
    Apply ``KEY=VALUE`` assignments to a settings object.

    Args:
        settings: Starting point (left untouched)
        assignments: Strings such as ``"edge_tol=1e-8"``

    Returns:
        A new Settings instance

    Raises:
        ValueError: malformed assignment, unknown key or bad value
    """
    known = {f.name: getattr(settings, f.name) for f in fields(settings)}
    changes = {}
    for item in assignments:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise ValueError(f"expected KEY=VALUE, got {item!r}")
        if key not in known:
            raise ValueError(f"unknown setting {key!r}")
        changes[key] = _coerce(raw.strip(), known[key])
    return replace(settings, **changes)
