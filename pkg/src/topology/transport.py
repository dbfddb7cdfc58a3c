"""
Parallel Transport - Solving T'(k) = [P'(k), P(k)] T(k) around the Brillouin circle.

The transport operators carry Ran P(0) onto Ran P(k) without twisting:
P(k) T(k) = T(k) P(0). After one full turn the holonomy T(2 pi) commutes
with P(0); its logarithm X (eigenphases in [0, 2 pi)) carries the Berry
phase: -tr X / 2 pi is an integer.

Integration is classical Runge-Kutta 4 on the sampled projection family,
with a polar re-unitarization after every step.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from bands.model import TWO_PI, SymmetryDescriptor, symmetric_partner_indices
from bands.spectral import ProjectionFamily
from core.config import Settings, defaults
from core.errors import ConvergenceError
from topology.winding import UnitaryLoop

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HolonomyLog:
    X: np.ndarray
    phases: np.ndarray
    eigenvectors: np.ndarray
    branch_flag: bool


@dataclass(frozen=True)
class TransportResult:
    """
    Transport unitaries on the closed grid plus the holonomy data.

    T[j] is T(k_j); T_second[j] is T(2 pi + k_j) from a second lap over the
    same samples, kept for the telescopic check.
    """

    family: ProjectionFamily
    T: np.ndarray
    T_second: np.ndarray
    holonomy: np.ndarray
    X: np.ndarray
    phases: np.ndarray
    eigenvectors: np.ndarray
    branch_flag: bool
    residuals: Dict[str, float]

    @property
    def grid(self) -> np.ndarray:
        return self.family.grid

    @property
    def grid_size(self) -> int:
        return self.family.grid_size

    @property
    def berry_trace(self) -> float:
        """-tr X / 2 pi."""
        return -float(np.sum(self.phases)) / TWO_PI


def _generator(P: np.ndarray, dP: np.ndarray) -> np.ndarray:
    return dP @ P - P @ dP


def _nearest_unitary(T: np.ndarray) -> np.ndarray:
    unitary, _ = scipy.linalg.polar(T)
    return unitary


def _lap(pf: ProjectionFamily, start: np.ndarray) -> np.ndarray:
    M = pf.grid_size
    h = TWO_PI / M
    out = np.empty((M + 1,) + start.shape, dtype=complex)
    out[0] = start
    T = start
    g_next = _generator(pf.P[0], pf.dP[0])
    for j in range(M):
        # Generators at k_j, the midpoint and k_{j+1}
        g_here = g_next
        g_mid = _generator(pf.P_mid[j], pf.dP_mid[j])
        g_next = _generator(pf.P[j + 1], pf.dP[j + 1])
        # Classic RK4 stages
        k1 = g_here @ T
        k2 = g_mid @ (T + 0.5 * h * k1)
        k3 = g_mid @ (T + 0.5 * h * k2)
        k4 = g_next @ (T + h * k3)
        # Step, then snap back onto the unitary group
        T = _nearest_unitary(T + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        out[j + 1] = T
    return out


def holonomy_log(holonomy: np.ndarray, branch_tol: float = 1e-8) -> HolonomyLog:
    """
    X = -i ln T(2 pi) with eigenphases in [0, 2 pi).

    The holonomy is diagonalized by a complex Schur decomposition (diagonal
    for normal matrices). Phases within branch_tol of the 0 / 2 pi cut are
    set to exactly 0 and the result is flagged.
    """
    schur_form, vectors = scipy.linalg.schur(holonomy, output="complex")
    phases = np.mod(np.angle(np.diag(schur_form)), TWO_PI)
    near_cut = (phases < branch_tol) | (phases > TWO_PI - branch_tol)
    flagged = bool(np.any(near_cut & (phases != 0.0)))
    phases = np.where(near_cut, 0.0, phases)
    X = (vectors * phases) @ vectors.conj().T
    X = 0.5 * (X + X.conj().T)
    if flagged:
        logger.debug("holonomy eigenphase within %.1e of the branch cut, snapped to 0", branch_tol)
    return HolonomyLog(X=X, phases=phases, eigenvectors=vectors, branch_flag=flagged)


def integrate_transport(pf: ProjectionFamily, settings: Optional[Settings] = None) -> TransportResult:
    """
    Integrate the parallel transport over one lap (and a second lap for the
    telescopic identity T(2 pi + k) = T(k) T(2 pi)).

    Raises:
        ConvergenceError: intertwining residual above settings.intertwining_limit
    """
    settings = settings or defaults()
    n = pf.N
    identity = np.eye(n, dtype=complex)

    T = _lap(pf, identity)
    holonomy = T[-1]
    T_second = _lap(pf, holonomy)
    log = holonomy_log(holonomy, settings.branch_tol)

    adjoint = np.conj(np.transpose(T, (0, 2, 1)))
    unitarity = float(np.max(np.linalg.norm(adjoint @ T - identity, ord=2, axis=(1, 2))))
    intertwining = float(np.max(np.linalg.norm(pf.P @ T - T @ pf.P[0], ord=2, axis=(1, 2))))
    telescopic = float(np.max(np.linalg.norm(T_second - T @ holonomy, ord=2, axis=(1, 2))))
    determinant = float(np.max(np.abs(np.linalg.det(T) - 1.0)))
    commutator = float(np.linalg.norm(holonomy @ pf.P[0] - pf.P[0] @ holonomy, 2))
    exp_check = float(np.linalg.norm(scipy.linalg.expm(1j * log.X) - holonomy, 2))

    residuals = {
        "unitarity": unitarity,
        "intertwining": intertwining,
        "telescopic": telescopic,
        "determinant": determinant,
        "holonomy_commutator": commutator,
        "logarithm": exp_check,
    }
    logger.debug("transport residuals on %d points: %s", pf.grid_size, residuals)

    if intertwining > settings.intertwining_limit:
        raise ConvergenceError(
            f"intertwining residual {intertwining:.3e} on {pf.grid_size} points exceeds "
            f"{settings.intertwining_limit:.1e}; refine the grid"
        )

    return TransportResult(
        family=pf,
        T=T,
        T_second=T_second,
        holonomy=holonomy,
        X=log.X,
        phases=log.phases,
        eigenvectors=log.eigenvectors,
        branch_flag=log.branch_flag,
        residuals=residuals,
    )


def twist(tr: TransportResult, k: float) -> np.ndarray:
    """e^{-ikX/2pi}, built from the eigenbasis of X."""
    vectors = tr.eigenvectors
    return (vectors * np.exp(-1j * k * tr.phases / TWO_PI)) @ vectors.conj().T


def det_winding_loop(tr: TransportResult) -> UnitaryLoop:
    """W(k) = T(k) e^{-ikX/2pi}, a periodic loop whose winding is -tr X / 2 pi."""
    values = np.array([tr.T[j] @ twist(tr, k) for j, k in enumerate(tr.grid)])
    return UnitaryLoop(grid=tr.grid, values=values)


def transport_symmetry_check(tr: TransportResult, sym: SymmetryDescriptor) -> float:
    """
    Chiral:        max_k || S T(k) - T(k) S ||
    Particle-hole: max_k || C T(k) - T(-k) C || with T(-k) = T(2pi - k) T(2pi)^{-1}
    """
    U = sym.matrix
    M = tr.grid_size
    partner = symmetric_partner_indices(M)
    inverse_holonomy = tr.holonomy.conj().T
    worst = 0.0
    for j in range(M + 1):
        if sym.antiunitary:
            mirrored = tr.T[partner[j]] @ inverse_holonomy
            defect = U @ np.conj(tr.T[j]) - mirrored @ U
        else:
            defect = U @ tr.T[j] - tr.T[j] @ U
        worst = max(worst, float(np.linalg.norm(defect, 2)))
    return worst
