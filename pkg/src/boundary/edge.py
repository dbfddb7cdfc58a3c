"""
Edge Modes - Truncated chains, their zero-energy boundary states, and the
recursion analysis that predicts them.

A chain of L cells with a hard cut on both sides has the banded matrix

    block (n, n + j) = A_j   for 0 <= j <= R,   (n + j, n) = A_j^H

Zero modes of the half-infinite chain solve a linear recursion. For the
Kitaev chain the two components decouple:

    hole sector:     (1 + d) y_{n+1} + mu y_n + (1 - d) y_{n-1} = 0
    particle sector: the same with d -> -d

and a square-summable solution exists iff both roots of
lambda^2 + mu/(1+d) lambda + (1-d)/(1+d) = 0 lie inside the unit disk.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from bands.chains import KitaevParams, SSHParams, kitaev_in_eta
from bands.model import TightBindingModel
from core.config import Settings, defaults
from core.errors import DomainError, SizeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncatedChain:
    model: TightBindingModel
    cells: int
    H_sharp: np.ndarray


@dataclass(frozen=True)
class EdgeMode:
    """One near-zero state, rotated inside the near-zero space to sit at one end."""

    end: str
    energy: float
    localization: float
    decay_fit: float
    cell_norms: np.ndarray


@dataclass
class EdgeModeReport:
    cells: int
    near_zero_energies: List[float] = field(default_factory=list)
    modes: List[EdgeMode] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.modes)

    def at(self, end: str) -> List[EdgeMode]:
        return [mode for mode in self.modes if mode.end == end]

    @property
    def localization(self) -> List[float]:
        return [mode.localization for mode in self.modes]

    @property
    def decay_fit(self) -> List[float]:
        return [mode.decay_fit for mode in self.modes]


@dataclass(frozen=True)
class CharacteristicRoots:
    lam_plus: complex
    lam_minus: complex
    first_order: bool
    sector: str

    @property
    def max_modulus(self) -> float:
        return max(abs(self.lam_plus), abs(self.lam_minus))


def build_truncated(model: TightBindingModel, cells: int) -> TruncatedChain:
    """
    Hermitian banded matrix of a chain with `cells` unit cells.

    Raises:
        SizeError: cells < max(1, 4R)
    """
    n, r = model.N, model.R
    if cells < max(1, 4 * r):
        raise SizeError(f"a chain with hopping range {r} needs at least {max(1, 4 * r)} cells, got {cells}")
    H = np.zeros((n * cells, n * cells), dtype=complex)
    for cell in range(cells):
        for j, a in enumerate(model.hoppings):
            other = cell + j
            if other >= cells:
                break
            H[n * cell : n * cell + n, n * other : n * other + n] = a
            if j:
                H[n * other : n * other + n, n * cell : n * cell + n] = a.conj().T
    return TruncatedChain(model=model, cells=cells, H_sharp=H)


def _cell_norms(chain: TruncatedChain, vector: np.ndarray) -> np.ndarray:
    return np.linalg.norm(vector.reshape(chain.cells, chain.model.N), axis=1)


def _decay_fit(norms: np.ndarray, window: int) -> float:
    """|lambda| from a log-linear fit of cell norms over cells 2 .. window - 1."""
    cells = np.arange(2, window)
    values = norms[2:window]
    usable = values > 1e-12 * max(float(np.max(norms)), 1e-300)
    if np.count_nonzero(usable) < 3:
        return float("nan")
    slope, _ = np.polyfit(cells[usable], np.log(values[usable]), 1)
    return float(math.exp(slope))


def find_edge_modes(
    chain: TruncatedChain,
    edge_tol: Optional[float] = None,
    loc_threshold: Optional[float] = None,
    settings: Optional[Settings] = None,
) -> EdgeModeReport:
    """
    Diagonalize the truncated chain and report end-localized near-zero states.

    Eigenstates with |E| < edge_tol span the near-zero space. On a finite
    chain the left and right end states hybridize, so the space is rotated
    to diagonalize the weight in the left window (first ceil(L/4) cells);
    a rotated state counts as a mode of the end whose window holds more
    than loc_threshold of its weight.
    """
    settings = settings or defaults()
    edge_tol = settings.edge_tol if edge_tol is None else edge_tol
    loc_threshold = settings.loc_threshold if loc_threshold is None else loc_threshold

    energies, vectors = scipy.linalg.eigh(chain.H_sharp)
    near = np.abs(energies) < edge_tol
    report = EdgeModeReport(cells=chain.cells, near_zero_energies=[float(e) for e in energies[near]])
    if not np.any(near):
        logger.debug("no near-zero states on %d cells", chain.cells)
        return report

    # Rotate the near-zero space so each state sits at one end
    n = chain.model.N
    window = math.ceil(chain.cells / 4)
    space = vectors[:, near]
    left_rows = slice(0, n * window)
    left_weight = space[left_rows].conj().T @ space[left_rows]
    _, rotation = scipy.linalg.eigh(left_weight)
    rotated = space @ rotation

    # Classify each rotated state by the end window holding its weight
    for column in rotated.T:
        norms = _cell_norms(chain, column)
        weights = norms**2
        left = float(np.sum(weights[:window]))
        right = float(np.sum(weights[-window:]))
        energy = float(np.real(np.vdot(column, chain.H_sharp @ column)))
        if left > loc_threshold:
            report.modes.append(EdgeMode("left", energy, left, _decay_fit(norms, window), norms))
        elif right > loc_threshold:
            report.modes.append(EdgeMode("right", energy, right, _decay_fit(norms[::-1], window), norms))

    logger.info(
        "%d near-zero states on %d cells, %d end-localized", len(report.near_zero_energies), chain.cells, report.count
    )
    return report


def characteristic_roots(p: KitaevParams, sector: str = "hole") -> CharacteristicRoots:
    """
    Roots of lambda^2 + mu/(1+d) lambda + (1-d)/(1+d) = 0, with d = delta in
    the hole sector and d = -delta in the particle sector.

    d = +1 makes the recursion first order: roots (-mu/2, 0).
    d = -1 kills the leading coefficient; the remaining first-order
    recursion mu y_n + 2 y_{n-1} = 0 has the single root -2/mu, the other
    root is reported as infinite. Both cases set first_order.
    """
    if sector not in ("hole", "particle"):
        raise ValueError(f"sector must be 'hole' or 'particle', got {sector!r}")
    d = p.delta if sector == "hole" else -p.delta
    mu = p.mu
    if d == 1.0:
        return CharacteristicRoots(complex(-mu / 2.0), 0j, True, sector)
    if d == -1.0:
        root = complex(-2.0 / mu) if mu != 0.0 else complex("inf")
        return CharacteristicRoots(root, complex("inf"), True, sector)
    b = mu / (1.0 + d)
    c = (1.0 - d) / (1.0 + d)
    root = cmath.sqrt(b * b - 4.0 * c)
    return CharacteristicRoots((-b + root) / 2.0, (-b - root) / 2.0, False, sector)


def edge_sector(p: KitaevParams) -> str:
    """The sector whose zero mode sits at the left end (d = |delta| >= 0)."""
    return "hole" if p.delta >= 0.0 else "particle"


def edge_mode_exists_oracle(p: KitaevParams) -> bool:
    """
    True iff the left-end sector has both characteristic roots inside the unit disk.

    Raises:
        DomainError: (mu, delta) in the gapless set
    """
    if kitaev_in_eta(p):
        raise DomainError(f"Kitaev chain is gapless at mu={p.mu}, delta={p.delta}")
    roots = characteristic_roots(p, edge_sector(p))
    return roots.max_modulus < 1.0


def recursion_profile(p: KitaevParams, cells: int, sector: Optional[str] = None) -> np.ndarray:
    """
    Zero-energy solution y_0 = 1, y_1 = -mu/(1+d), then the three-term recursion.

    Raises:
        ValueError: d = -1 (that sector carries no zero mode)
    """
    sector = sector or edge_sector(p)
    d = p.delta if sector == "hole" else -p.delta
    if d == -1.0:
        raise ValueError("the d = -1 sector has only the trivial solution")
    y = np.zeros(cells, dtype=complex)
    y[0] = 1.0
    if cells > 1:
        y[1] = -p.mu / (1.0 + d)
    for n in range(1, cells - 1):
        y[n + 1] = -(p.mu * y[n] + (1.0 - d) * y[n - 1]) / (1.0 + d)
    return y


def ssh_profile(p: SSHParams, cells: int) -> np.ndarray:
    """x_n = (-delta)^n."""
    return (-p.delta) ** np.arange(cells, dtype=float)


def splitting_scaling(model: TightBindingModel, cells_list: Sequence[int]) -> Tuple[List[Tuple[int, float]], float]:
    """
    Smallest |E| of the truncated chain for each length and the geometric
    ratio from a log-linear fit.
    """
    rows = []
    for cells in cells_list:
        energies = scipy.linalg.eigvalsh(build_truncated(model, cells).H_sharp)
        rows.append((cells, float(np.min(np.abs(energies)))))
    lengths = np.array([cells for cells, _ in rows], dtype=float)
    splittings = np.array([s for _, s in rows])
    slope, _ = np.polyfit(lengths, np.log(splittings), 1)
    return rows, float(math.exp(slope))


@dataclass
class EssentialSpectrumReport:
    outliers: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.outliers


def essential_spectrum_check(
    chain: TruncatedChain,
    gap: float,
    band_max: float,
    modes: EdgeModeReport,
    settings: Optional[Settings] = None,
) -> EssentialSpectrumReport:
    """Every eigenvalue outside the near-zero set lies in the padded bulk bands."""
    settings = settings or defaults()
    pad = settings.spectrum_padding
    energies = scipy.linalg.eigvalsh(chain.H_sharp)
    skip = len(modes.near_zero_energies)
    order = np.argsort(np.abs(energies))
    report = EssentialSpectrumReport()
    for e in energies[order[skip:]]:
        magnitude = abs(float(e))
        if magnitude < gap - pad or magnitude > band_max + pad:
            report.outliers.append(float(e))
    return report
