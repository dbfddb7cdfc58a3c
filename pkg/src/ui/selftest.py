"""
Self Test - A quick tour through every module's properties.

Each check is a small function returning a short detail string and
raising AssertionError (or any package error) when something is off.
The runner never stops at the first failure; it reports them all.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from bands.chains import (
    KitaevParams,
    SSHParams,
    kitaev_bands,
    kitaev_invariant_oracle,
    kitaev_model,
    ssh_bands,
    ssh_invariant_oracle,
    ssh_model,
)
from bands.model import fiber, validate_symmetry
from bands.spectral import eigensystem, projector_riesz_deviation
from boundary.edge import build_truncated, edge_mode_exists_oracle, find_edge_modes
from core.config import Settings, defaults
from topology.frame import berry_phase
from topology.invariant import HomotopyPath, check_homotopy, compute_invariant, gauge_robustness, invariant_pipeline
from topology.winding import ScalarLoop, scalar_winding, winding_properties_suite

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class SelftestReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)


def _fiber_checks(grid: int, seed: int, settings: Settings) -> str:
    H = fiber(ssh_model(SSHParams(0.0)), 0.0).H
    assert np.allclose(H, [[0, 1], [1, 0]])
    entry = fiber(kitaev_model(KitaevParams(1.0, 0.5)), math.pi / 2).H[0, 1]
    assert abs(entry - (1 - 1j)) < 1e-12, entry
    model = kitaev_model(KitaevParams(1.0, 0.5))
    errors = []
    for h in (1e-3, 1e-4):
        plus, minus = fiber(model, 0.7 + h).H, fiber(model, 0.7 - h).H
        errors.append(np.linalg.norm((plus - minus) / (2 * h) - fiber(model, 0.7).dH))
    ratio = errors[0] / errors[1]
    assert 80.0 <= ratio <= 120.0, ratio
    return f"derivative ratio {ratio:.1f}"


def _symmetry_checks(grid: int, seed: int, settings: Settings) -> str:
    residuals = [
        validate_symmetry(ssh_model(SSHParams(0.5)), grid, settings),
        validate_symmetry(kitaev_model(KitaevParams(1.0, 0.5)), grid, settings),
    ]
    assert all(report.passed for report in residuals), residuals
    return "max residual {:.1e}".format(max(report.residual for report in residuals))


def _band_checks(grid: int, seed: int, settings: Settings) -> str:
    worst = 0.0
    for k in np.linspace(0.0, 2 * math.pi, 128, endpoint=False):
        p, q = SSHParams(0.5), KitaevParams(1.0, 0.5)
        worst = max(
            worst,
            float(np.max(np.abs(eigensystem(fiber(ssh_model(p), k)).eigenvalues - ssh_bands(p, k)))),
            float(np.max(np.abs(eigensystem(fiber(kitaev_model(q), k)).eigenvalues - kitaev_bands(q, k)))),
        )
    assert worst <= 1e-12, worst
    return f"band error {worst:.1e}"


def _riesz_checks(grid: int, seed: int, settings: Settings) -> str:
    deviation = max(
        projector_riesz_deviation(ssh_model(SSHParams(0.5)), settings=settings),
        projector_riesz_deviation(kitaev_model(KitaevParams(1.0, 0.5)), settings=settings),
    )
    assert deviation <= 1e-8, deviation
    return f"eigen vs Riesz {deviation:.1e}"


def _transport_checks(grid: int, seed: int, settings: Settings) -> str:
    worst = 0.0
    for model in (ssh_model(SSHParams(0.5)), kitaev_model(KitaevParams(1.0, 0.5))):
        pipeline = invariant_pipeline(model, grid, settings)
        residuals = pipeline.transport.residuals
        assert residuals["unitarity"] <= 1e-10, residuals
        assert residuals["determinant"] <= 1e-8, residuals
        all_bands = berry_phase(pipeline.frame, "all", settings)
        assert abs(all_bands.value - pipeline.transport.berry_trace) <= 1e-6
        worst = max(worst, residuals["intertwining"])
    return f"intertwining {worst:.1e}"


def _invariant_checks(grid: int, seed: int, settings: Settings) -> str:
    for delta in (-1.5, -0.5, 0.0, 0.5, 1.5):
        p = SSHParams(delta)
        assert compute_invariant(ssh_model(p), grid, settings).z2 == ssh_invariant_oracle(p), delta
    for mu, delta in ((1.0, 0.5), (3.0, 0.5), (-1.0, -0.5), (0.0, 1.0)):
        p = KitaevParams(mu, delta)
        assert compute_invariant(kitaev_model(p), grid, settings).z2 == kitaev_invariant_oracle(p), (mu, delta)
    return "9 phase-diagram points"


def _gauge_checks(grid: int, seed: int, settings: Settings) -> str:
    report = gauge_robustness(kitaev_model(KitaevParams(1.0, 0.5)), grid, range(seed, seed + 5), settings)
    assert report.passed, report.failures
    return f"windings {report.windings}"


def _winding_checks(grid: int, seed: int, settings: Settings) -> str:
    report = winding_properties_suite(seed, pairs=20)
    assert report.passed, report.failures
    assert scalar_winding(ScalarLoop.from_function(lambda k: 0.5 + np.exp(1j * k), 256)) == 1
    assert scalar_winding(ScalarLoop.from_function(lambda k: 1.5 + np.exp(1j * k), 256)) == 0
    return f"{report.pairs} loop pairs"


def _edge_checks(grid: int, seed: int, settings: Settings) -> str:
    ssh = find_edge_modes(build_truncated(ssh_model(SSHParams(0.5)), 40), settings=settings)
    assert len(ssh.at("left")) == 1, ssh.modes
    assert abs(ssh.at("left")[0].decay_fit - 0.5) <= 0.05
    trivial = find_edge_modes(build_truncated(ssh_model(SSHParams(2.0)), 40), settings=settings)
    assert trivial.count == 0
    kitaev = find_edge_modes(build_truncated(kitaev_model(KitaevParams(1.0, 0.5)), 60), settings=settings)
    assert kitaev.count == 2 and edge_mode_exists_oracle(KitaevParams(1.0, 0.5))
    return "SSH and Kitaev end states"


def _homotopy_checks(grid: int, seed: int, settings: Settings) -> str:
    path = HomotopyPath.linear(lambda t: ssh_model(SSHParams(0.2 + 0.6 * t)), 10)
    report = check_homotopy(path, grid, settings)
    assert report.constant and report.z2[0] == 1
    return f"{len(report.samples)} samples"


CHECKS: List[Tuple[str, Callable[[int, int, Settings], str]]] = [
    ("model", _fiber_checks),
    ("symmetry", _symmetry_checks),
    ("bands", _band_checks),
    ("riesz", _riesz_checks),
    ("transport", _transport_checks),
    ("invariant", _invariant_checks),
    ("gauge", _gauge_checks),
    ("winding", _winding_checks),
    ("edge", _edge_checks),
    ("homotopy", _homotopy_checks),
]


def run_selftest(grid: Optional[int] = None, seed: int = 0, settings: Optional[Settings] = None) -> SelftestReport:
    """Run every check and collect the outcomes."""
    settings = settings or defaults()
    grid = grid or settings.smoke_grid
    report = SelftestReport()
    for name, check in CHECKS:
        try:
            detail = check(grid, seed, settings)
            report.results.append(CheckResult(name, True, detail))
            logger.info("selftest %s: ok (%s)", name, detail)
        except Exception as exc:
            report.results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
            logger.warning("selftest %s failed: %s", name, exc)
    return report
