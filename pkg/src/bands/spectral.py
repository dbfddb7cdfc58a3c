"""
Spectral Analysis - Eigensystems, gap certification and spectral projections.

Everything downstream works with the occupied projection

    P_-(k) = sum_{E_i(k) < 0} v_i(k) v_i(k)^H

sampled on a uniform grid. Two independent routes produce it: the
eigenvector route (Jacobi) and the Riesz contour integral, the latter
being used as an oracle only.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from bands.jacobi import jacobi_eigh
from bands.model import (
    TWO_PI,
    FiberSample,
    SymmetryDescriptor,
    TightBindingModel,
    fiber,
    momentum_grid,
    symmetric_partner_indices,
)
from core.config import Settings, defaults
from core.errors import ContourError, GapError, KatoNagyDistanceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigenSystem:
    """Sorted eigenvalues and phase-fixed orthonormal eigenvectors at one k."""

    k: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def occupied(self) -> np.ndarray:
        return self.eigenvectors[:, self.eigenvalues < 0.0]

    @property
    def empty(self) -> np.ndarray:
        return self.eigenvectors[:, self.eigenvalues >= 0.0]


@dataclass(frozen=True)
class GapReport:
    """
    Gap diagnostics of a model on a momentum grid.

    g is the smallest |E_i(k)| seen on the grid; lower_bound is -2r of the
    Riesz contour; slope_bound bounds ||H'(k)|| and is what makes the
    certification between grid points rigorous.
    """

    g: float
    min_abs_eigenvalue: float
    lower_bound: float
    grid_size: int
    k_min: float
    slope_bound: float
    refined_samples: int = 0


def fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest component (lowest index on ties) is real positive."""
    moduli = np.abs(vector)
    top = float(np.max(moduli))
    if top == 0.0:
        return vector
    pivot = int(np.argmax(moduli >= top * (1.0 - 1e-12)))
    return vector * (abs(vector[pivot]) / vector[pivot])


def eigensystem(sample: FiberSample, settings: Optional[Settings] = None) -> EigenSystem:
    """
    Diagonalize H(k) with the Jacobi solver.

    Eigenvalues come out ascending (stable for degeneracies) and every
    eigenvector carries the deterministic phase convention of fix_phase.
    """
    settings = settings or defaults()
    values, vectors = jacobi_eigh(sample.H, tol=settings.jacobi_tol, max_sweeps=settings.jacobi_max_sweeps)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for i in range(vectors.shape[1]):
        vectors[:, i] = fix_phase(vectors[:, i])
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenSystem(k=sample.k, eigenvalues=values, eigenvectors=vectors)


def slope_bound(model: TightBindingModel) -> float:
    """Upper bound on ||H'(k)|| (and so on the Lipschitz constant of every band)."""
    return float(sum(2.0 * j * np.linalg.norm(a, 2) for j, a in enumerate(model.hoppings) if j))


def spectral_radius(model: TightBindingModel, grid_size: int) -> float:
    """max_k ||H(k)|| sampled on the grid."""
    return max(float(np.linalg.norm(fiber(model, k).H, 2)) for k in momentum_grid(grid_size)[:-1])


def riesz_radius(model: TightBindingModel, grid_size: int) -> float:
    """Default contour radius r = ||H||_grid + 1."""
    return spectral_radius(model, grid_size) + 1.0


def _min_abs_energy(model: TightBindingModel, k: float, settings: Settings) -> float:
    return float(np.min(np.abs(eigensystem(fiber(model, k), settings).eigenvalues)))


def certify_gap(
    model: TightBindingModel, grid_size: int, settings: Optional[Settings] = None
) -> GapReport:
    """
    Certify a zero-centered spectral gap.

    Bands are Lipschitz with constant L = slope_bound(model), so on an
    interval [a, b] the smallest |E| is at least (e_a + e_b)/2 - L(b - a)/2.
    Intervals where that bound does not clear the threshold are bisected.

    Raises:
        GapError: some sampled |E| falls below settings.gap_threshold, or the
            bisection budget runs out (the gap cannot be certified)
    """
    settings = settings or defaults()
    threshold = settings.gap_threshold
    ks = momentum_grid(grid_size)
    # Sample |E| on the grid (k = 2pi repeats k = 0)
    energies = [_min_abs_energy(model, k, settings) for k in ks[:-1]]
    energies.append(energies[0])

    g = min(energies)
    j_min = int(np.argmin(energies))
    k_min = float(ks[j_min])
    if g < threshold:
        raise GapError(f"not an insulator: |E| = {g:.3e} below gap threshold {threshold:.1e}", k=k_min)

    # Queue every interval the Lipschitz bound cannot clear
    lipschitz = slope_bound(model)
    stack = [
        (ks[j], ks[j + 1], energies[j], energies[j + 1])
        for j in range(grid_size)
        if 0.5 * (energies[j] + energies[j + 1]) - 0.5 * lipschitz * (ks[j + 1] - ks[j]) < threshold
    ]
    budget = 64 * grid_size
    refined = 0
    while stack:
        a, b, ea, eb = stack.pop()
        mid = 0.5 * (a + b)
        em = _min_abs_energy(model, mid, settings)
        refined += 1
        # A sample below threshold is a real closing; an exhausted budget is not certifiable
        if em < threshold:
            raise GapError(f"not an insulator: |E| = {em:.3e} between grid points", k=mid)
        if refined > budget or b - a < 1e-12:
            raise GapError("gap could not be certified between grid points", k=mid)
        # Keep only halves that still need refinement
        for lo, hi, elo, ehi in ((a, mid, ea, em), (mid, b, em, eb)):
            if 0.5 * (elo + ehi) - 0.5 * lipschitz * (hi - lo) < threshold:
                stack.append((lo, hi, elo, ehi))

    r = riesz_radius(model, grid_size)
    logger.info("gap certified: g=%.6g at k=%.6g (%d refinement samples)", g, k_min, refined)
    return GapReport(
        g=g,
        min_abs_eigenvalue=g,
        lower_bound=-2.0 * r,
        grid_size=grid_size,
        k_min=k_min,
        slope_bound=lipschitz,
        refined_samples=refined,
    )


def projector_eigen(
    es: EigenSystem, settings: Optional[Settings] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Spectral projections (P_-, P_+) onto negative and positive energies.

    Raises:
        GapError: an eigenvalue sits inside the gap tolerance band
    """
    settings = settings or defaults()
    if np.any(np.abs(es.eigenvalues) < settings.gap_threshold):
        raise GapError("eigenvalue inside the gap band; projection is ambiguous", k=es.k)
    occupied = es.occupied
    p_minus = occupied @ occupied.conj().T
    p_plus = np.eye(p_minus.shape[0]) - p_minus
    return p_minus, p_plus


def projector_riesz(
    sample: FiberSample, r: float, quad_points: int = 256, settings: Optional[Settings] = None
) -> np.ndarray:
    """
    P_- as the contour integral (1/2 pi i) of the resolvent over the circle of
    radius r centred at -r, discretized by the trapezoid rule.

    Raises:
        ContourError: an eigenvalue lies (numerically) on the contour
    """
    settings = settings or defaults()
    if quad_points < 32:
        raise ValueError(f"quad_points must be at least 32, got {quad_points}")
    n = sample.H.shape[0]
    identity = np.eye(n)
    total = np.zeros((n, n), dtype=complex)
    for theta in TWO_PI * np.arange(quad_points) / quad_points:
        weight = r * np.exp(1j * theta)
        shifted = (weight - r) * identity - sample.H
        margin = float(np.min(scipy.linalg.svdvals(shifted)))
        if margin < settings.contour_margin:
            raise ContourError(
                f"resolvent nearly singular on the contour (margin {margin:.3e}) at k={sample.k:.6g}"
            )
        total += weight * np.linalg.solve(shifted, identity)
    return total / quad_points


def projector_derivative(es: EigenSystem, dH: np.ndarray) -> np.ndarray:
    """
    Analytic k-derivative of P_- from first-order perturbation theory:

        dP = sum_{a occ, b empty} v_b (v_b^H dH v_a) / (E_a - E_b) v_a^H + h.c.
    """
    negative = es.eigenvalues < 0.0
    occ, emp = es.eigenvectors[:, negative], es.eigenvectors[:, ~negative]
    e_occ, e_emp = es.eigenvalues[negative], es.eigenvalues[~negative]
    denominators = e_occ[None, :] - e_emp[:, None]
    assert np.all(np.abs(denominators) > 0.0), "degenerate cross-gap pair"
    coupling = (emp.conj().T @ dH @ occ) / denominators
    term = emp @ coupling @ occ.conj().T
    return term + term.conj().T


def kato_nagy(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """
    Kato-Nagy unitary U = [1 - (P - Q)^2]^{-1/2} [P Q + (1 - P)(1 - Q)], with P U = U Q.

    Raises:
        KatoNagyDistanceError: ||P - Q|| >= 1
    """
    diff = P - Q
    distance = float(np.linalg.norm(diff, 2))
    if distance >= 1.0 - 1e-12:
        raise KatoNagyDistanceError(f"projections too far apart: ||P - Q|| = {distance:.6g}")
    identity = np.eye(P.shape[0])
    values, vectors = scipy.linalg.eigh(identity - diff @ diff)
    inverse_root = (vectors / np.sqrt(values)) @ vectors.conj().T
    return inverse_root @ (P @ Q + (identity - P) @ (identity - Q))


@dataclass(frozen=True)
class ProjectionFamily:
    """
    P_-(k) and P_-'(k) on the M+1 grid points (endpoint duplicated) and on
    the M interval midpoints needed by the Runge-Kutta stages.
    """

    grid: np.ndarray
    P: np.ndarray
    dP: np.ndarray
    P_mid: np.ndarray
    dP_mid: np.ndarray
    m: int
    min_abs_energy: float

    @property
    def grid_size(self) -> int:
        return len(self.grid) - 1

    @property
    def N(self) -> int:
        return self.P.shape[1]

    def complement(self) -> "ProjectionFamily":
        """The P_+ = 1 - P_- family."""
        identity = np.eye(self.N)
        return ProjectionFamily(
            grid=self.grid,
            P=identity - self.P,
            dP=-self.dP,
            P_mid=identity - self.P_mid,
            dP_mid=-self.dP_mid,
            m=self.N - self.m,
            min_abs_energy=self.min_abs_energy,
        )

    def residuals(self) -> dict:
        """Idempotency, hermiticity, rank and closure residuals over the grid."""
        squares = np.einsum("kij,kjl->kil", self.P, self.P)
        traces = np.real(np.einsum("kii->k", self.P))
        return {
            "idempotency": float(np.max(np.abs(squares - self.P))),
            "hermiticity": float(np.max(np.abs(self.P - np.conj(np.transpose(self.P, (0, 2, 1)))))),
            "rank": float(np.max(np.abs(traces - self.m))),
            "closure": float(np.max(np.abs(self.P[0] - self.P[-1]))),
        }


def projection_family(
    model: TightBindingModel, grid_size: int, settings: Optional[Settings] = None
) -> ProjectionFamily:
    """Sample P_- and its analytic derivative on the grid and its midpoints."""
    settings = settings or defaults()
    ks = momentum_grid(grid_size)
    h = TWO_PI / grid_size

    def sample(k: float) -> Tuple[np.ndarray, np.ndarray, float]:
        point = fiber(model, k)
        es = eigensystem(point, settings)
        p_minus, _ = projector_eigen(es, settings)
        return p_minus, projector_derivative(es, point.dH), float(np.min(np.abs(es.eigenvalues)))

    on_grid = [sample(k) for k in ks]
    between = [sample(k + 0.5 * h) for k in ks[:-1]]
    ranks = {int(round(np.real(np.trace(p)))) for p, _, _ in on_grid}
    if len(ranks) != 1:
        raise GapError(f"rank of P_- changes along the grid: {sorted(ranks)}")

    family = ProjectionFamily(
        grid=ks,
        P=np.array([p for p, _, _ in on_grid]),
        dP=np.array([d for _, d, _ in on_grid]),
        P_mid=np.array([p for p, _, _ in between]),
        dP_mid=np.array([d for _, d, _ in between]),
        m=ranks.pop(),
        min_abs_energy=min(e for _, _, e in on_grid + between),
    )
    logger.debug("projection family on %d points: %s", grid_size, family.residuals())
    return family


def projection_symmetry_residual(pf: ProjectionFamily, sym: SymmetryDescriptor) -> float:
    """
    Chiral:        max_k || S P_+(k) - P_-(k) S ||
    Particle-hole: max_k || C P_+(k) - P_-(-k) C ||, with -k at the partner grid index
    """
    identity = np.eye(pf.N)
    M = pf.grid_size
    partner = symmetric_partner_indices(M)
    U = sym.matrix
    worst = 0.0
    for j in range(M + 1):
        p_plus = identity - pf.P[j]
        if sym.antiunitary:
            defect = U @ np.conj(p_plus) - pf.P[partner[j]] @ U
        else:
            defect = U @ p_plus - pf.P[j] @ U
        worst = max(worst, float(np.linalg.norm(defect, 2)))
    return worst


def band_energies(model: TightBindingModel, ks, settings: Optional[Settings] = None) -> List[np.ndarray]:
    """Sorted band energies at each momentum."""
    return [eigensystem(fiber(model, k), settings).eigenvalues for k in ks]


def projector_riesz_deviation(
    model: TightBindingModel,
    points: int = 64,
    quad_points: int = 256,
    settings: Optional[Settings] = None,
) -> float:
    """max_k || P_eigen(k) - P_riesz(k) || over an evenly spaced set of momenta."""
    settings = settings or defaults()
    r = riesz_radius(model, max(points, 64))
    worst = 0.0
    for k in TWO_PI * np.arange(points) / points:
        sample = fiber(model, k)
        p_eigen, _ = projector_eigen(eigensystem(sample, settings), settings)
        p_riesz = projector_riesz(sample, r, quad_points, settings)
        worst = max(worst, float(np.linalg.norm(p_eigen - p_riesz, 2)))
    return worst
