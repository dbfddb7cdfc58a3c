"""
Winding Numbers - Degrees of scalar loops and of unitary matrix loops.

The winding of a nonvanishing loop f is computed by summing the principal
arguments of successive ratios f(k_{j+1}) / f(k_j). For a closed loop the
sum is exactly 2 pi times an integer, so no quadrature or rounding of a
floating value is involved. Unitary loops reduce to their determinant.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from bands.model import TWO_PI, momentum_grid
from core.config import Settings, defaults
from core.errors import AliasingError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalarLoop:
    """
    Samples of a complex loop f over the closed grid [0, 2pi].

    Keeping the sampler lets scalar_winding refine the grid by itself when
    adjacent phase steps get close to pi.
    """

    grid: np.ndarray
    values: np.ndarray
    sampler: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    @classmethod
    def from_function(cls, f: Callable[[float], complex], grid_size: int) -> "ScalarLoop":
        def sampler(ks: np.ndarray) -> np.ndarray:
            return np.array([f(k) for k in ks], dtype=complex)

        grid = momentum_grid(grid_size)
        return cls(grid=grid, values=sampler(grid), sampler=sampler)

    @property
    def grid_size(self) -> int:
        return len(self.grid) - 1

    def refined(self) -> "ScalarLoop":
        grid = momentum_grid(2 * self.grid_size)
        return ScalarLoop(grid=grid, values=self.sampler(grid), sampler=self.sampler)


@dataclass(frozen=True)
class UnitaryLoop:
    """Samples U(k) of a loop of N x N unitaries over the closed grid [0, 2pi]."""

    grid: np.ndarray
    values: np.ndarray
    sampler: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    @classmethod
    def from_function(cls, U: Callable[[float], np.ndarray], grid_size: int) -> "UnitaryLoop":
        def sampler(ks: np.ndarray) -> np.ndarray:
            return np.array([U(k) for k in ks], dtype=complex)

        grid = momentum_grid(grid_size)
        return cls(grid=grid, values=sampler(grid), sampler=sampler)

    def unitarity_residual(self) -> float:
        n = self.values.shape[1]
        products = np.einsum("kji,kjl->kil", np.conj(self.values), self.values)
        return float(np.max(np.abs(products - np.eye(n))))

    def determinant_loop(self) -> ScalarLoop:
        det_sampler = None
        if self.sampler is not None:
            inner = self.sampler

            def det_sampler(ks: np.ndarray) -> np.ndarray:
                return np.linalg.det(inner(ks))

        return ScalarLoop(grid=self.grid, values=np.linalg.det(self.values), sampler=det_sampler)


def scalar_winding(loop: ScalarLoop, settings: Optional[Settings] = None, tol: float = 1e-8) -> int:
    """
    Winding number of a closed nonvanishing loop.

    Raises:
        DomainError: the loop vanishes at a sample or does not close
        AliasingError: some phase step is within the aliasing margin of pi
            even after the allowed grid doublings
    """
    settings = settings or defaults()
    values = loop.values
    scale = float(np.max(np.abs(values)))
    smallest = float(np.min(np.abs(values)))
    if scale == 0.0 or smallest <= 1e-14 * scale:
        j = int(np.argmin(np.abs(values)))
        raise DomainError(f"loop vanishes near k={loop.grid[j]:.6g}")
    if abs(values[0] - values[-1]) > tol * scale:
        raise DomainError(f"loop is not closed: |f(0) - f(2pi)| = {abs(values[0] - values[-1]):.3e}")

    levels = 0
    while True:
        steps = np.angle(values[1:] / values[:-1])
        worst = float(np.max(np.abs(steps)))
        if worst < math.pi - settings.aliasing_margin:
            break
        if loop.sampler is None or levels >= settings.aliasing_levels:
            raise AliasingError(
                f"phase step {worst:.3f} too close to pi on {loop.grid_size} points; refine the grid"
            )
        loop = loop.refined()
        values = loop.values
        levels += 1
        logger.info("winding: aliasing guard doubled the grid to %d points", loop.grid_size)

    return int(round(float(np.sum(steps)) / TWO_PI))


def unitary_winding(loop: UnitaryLoop, settings: Optional[Settings] = None, tol: float = 1e-8) -> int:
    """Winding of det U(k)."""
    residual = loop.unitarity_residual()
    if residual > tol:
        raise DomainError(f"loop is not unitary (residual {residual:.3e})")
    return scalar_winding(loop.determinant_loop(), settings, tol)


def random_fourier_loop(
    rng: np.random.Generator, winding: int, degree: int = 3
) -> Callable[[float], complex]:
    """
    f(k) = e^{iwk} (a0 + sum_j a_j e^{ijk} + b_j e^{-ijk}) with |a0| larger
    than the sum of the other coefficients, so f never vanishes and
    winds exactly w times.
    """
    coeffs = rng.normal(size=(2, degree)) + 1j * rng.normal(size=(2, degree))
    a0 = (np.sum(np.abs(coeffs)) + 0.5 + rng.random()) * np.exp(1j * TWO_PI * rng.random())
    orders = np.arange(1, degree + 1)

    def f(k: float) -> complex:
        waves = np.exp(1j * orders * k)
        body = a0 + np.dot(coeffs[0], waves) + np.dot(coeffs[1], np.conj(waves))
        return complex(np.exp(1j * winding * k) * body)

    return f


@dataclass
class WindingSuiteReport:
    seed: int
    pairs: int
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def winding_properties_suite(seed: int, pairs: int = 100, grid_size: int = 256) -> WindingSuiteReport:
    """
    Property checks on seeded random loop pairs:
    additivity w(fg) = w(f) + w(g), involution w(f(-k)) = -w(f),
    radial homotopy w(c f) = w(f) and grid-doubling stability.
    """
    rng = np.random.default_rng(seed)
    report = WindingSuiteReport(seed=seed, pairs=pairs)
    for index in range(pairs):
        wf, wg = (int(w) for w in rng.integers(-3, 4, size=2))
        f = random_fourier_loop(rng, wf)
        g = random_fourier_loop(rng, wg)
        scale = float(0.1 + 10.0 * rng.random())

        checks = {
            "f": (ScalarLoop.from_function(f, grid_size), wf),
            "product": (ScalarLoop.from_function(lambda k: f(k) * g(k), grid_size), wf + wg),
            "involution": (ScalarLoop.from_function(lambda k: f(-k), grid_size), -wf),
            "radial": (ScalarLoop.from_function(lambda k: scale * f(k), grid_size), wf),
            "refined": (ScalarLoop.from_function(f, 2 * grid_size), wf),
        }
        for name, (loop, expected) in checks.items():
            got = scalar_winding(loop)
            if got != expected:
                report.failures.append(f"pair {index}: {name} winding {got}, expected {expected}")

    logger.info("winding suite seed=%d: %d pairs, %d failures", seed, pairs, len(report.failures))
    return report
