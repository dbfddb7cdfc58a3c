"""
Bloch Frames - Periodic orthonormal bases adapted to Ran P_- (+) Ran P_+.

The transport frame is v_i(k) = T(k) e^{-ikX/2pi} v_i(0). Starting from a
symmetric basis of H(0) it is a symmetric Bloch basis:

    chiral:        S v_i(k) = v_{N-i+1}(k)
    particle-hole: C v_i(k) = v_{N-i+1}(-k)

Gauges are written in frame coordinates: G(k) = F(k) B(k) F(k)^H where
F(k) holds the frame vectors as columns and B(k) = diag(g_-(k), g_+(k)).
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from bands.model import TWO_PI, SymmetryDescriptor, SymmetryKind, apply_symmetry, symmetric_partner_indices
from bands.spectral import EigenSystem, ProjectionFamily
from core.config import Settings, defaults
from core.errors import ConvergenceError, GaugeError, ModelInvalidError, ResolutionError
from topology.transport import TransportResult, twist
from topology.winding import UnitaryLoop, unitary_winding

logger = logging.getLogger(__name__)

BlockFunction = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class BlochFrame:
    """vectors[j] holds v_1(k_j) ... v_N(k_j) as columns."""

    grid: np.ndarray
    vectors: np.ndarray
    m: int
    family: ProjectionFamily
    symmetric: Optional[SymmetryKind] = None

    @property
    def grid_size(self) -> int:
        return len(self.grid) - 1

    @property
    def N(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class BlochGauge:
    grid: np.ndarray
    G: np.ndarray
    winding: int
    symmetric: bool = False


@dataclass(frozen=True)
class BerryPhase:
    """A Berry phase together with its rounding."""

    value: float
    integer: int
    residual: float
    bands: str


def initial_basis(es0: EigenSystem) -> np.ndarray:
    """Eigenbasis of H(0): occupied vectors first, then the empty ones."""
    return np.column_stack([es0.occupied, es0.empty])


def initial_symmetric_basis(
    es0: EigenSystem, sym: SymmetryDescriptor, settings: Optional[Settings] = None
) -> np.ndarray:
    """
    Symmetric eigenbasis of H(0): v_1..v_m are the phase-fixed occupied
    eigenvectors and v_{N-i+1} = S v_i (or C v_i).

    Raises:
        ModelInvalidError: (symmetry_violation) the occupied space is not half
            of C^N, or the symmetry does not map it onto the empty space
    """
    settings = settings or defaults()
    occupied = es0.occupied
    n = es0.eigenvectors.shape[0]
    m = occupied.shape[1]
    if 2 * m != n:
        raise ModelInvalidError(
            f"negative eigenspace of H(0) has dimension {m}, expected {n // 2}", code="symmetry_violation"
        )

    basis = np.zeros((n, n), dtype=complex)
    for i in range(m):
        basis[:, i] = occupied[:, i]
        basis[:, n - 1 - i] = apply_symmetry(sym, occupied[:, i])

    H0 = (es0.eigenvectors * es0.eigenvalues) @ es0.eigenvectors.conj().T
    partners = basis[:, m:]
    projected = occupied @ (occupied.conj().T @ partners)
    gram = basis.conj().T @ basis
    tol = 1e3 * settings.structural_tol
    if float(np.max(np.abs(projected))) > tol or float(np.max(np.abs(gram - np.eye(n)))) > tol:
        raise ModelInvalidError(
            "symmetry does not map occupied states of H(0) onto empty states", code="symmetry_violation"
        )
    energies = np.real(np.einsum("ij,ij->j", basis.conj(), H0 @ basis))
    if np.any(energies[m:] <= 0.0):
        raise ModelInvalidError("symmetry partners do not have positive energy", code="symmetry_violation")
    return basis


def build_frame(
    tr: TransportResult,
    basis0: np.ndarray,
    symmetric: Optional[SymmetryKind] = None,
    settings: Optional[Settings] = None,
) -> BlochFrame:
    """
    Transport frame v_i(k) = T(k) e^{-ikX/2pi} v_i(0).

    Raises:
        ConvergenceError: ||v_i(2pi) - v_i(0)|| above settings.periodicity_limit
    """
    settings = settings or defaults()
    vectors = np.array([tr.T[j] @ twist(tr, k) @ basis0 for j, k in enumerate(tr.grid)])
    periodicity = float(np.max(np.abs(vectors[-1] - vectors[0])))
    if periodicity > settings.periodicity_limit:
        raise ConvergenceError(
            f"frame periodicity residual {periodicity:.3e} exceeds {settings.periodicity_limit:.1e}; "
            "refine the transport grid"
        )
    return BlochFrame(grid=tr.grid, vectors=vectors, m=tr.family.m, family=tr.family, symmetric=symmetric)


def frame_residuals(frame: BlochFrame, sym: Optional[SymmetryDescriptor] = None) -> dict:
    """Orthonormality, span, periodicity and (optionally) symmetry residuals."""
    n, m, M = frame.N, frame.m, frame.grid_size
    V = frame.vectors
    gram = np.conj(np.transpose(V, (0, 2, 1))) @ V
    projected = frame.family.P @ V
    span_occupied = float(np.max(np.abs(projected[:, :, :m] - V[:, :, :m])))
    span_empty = float(np.max(np.abs(projected[:, :, m:])))
    out = {
        "orthonormality": float(np.max(np.abs(gram - np.eye(n)))),
        "span": max(span_occupied, span_empty),
        "periodicity": float(np.max(np.abs(V[-1] - V[0]))),
    }
    if sym is not None:
        partner = symmetric_partner_indices(M)
        worst = 0.0
        for j in range(M + 1):
            image = apply_symmetry(sym, V[j][:, :m])
            target_index = partner[j] if sym.antiunitary else j
            target = V[target_index][:, ::-1][:, :m]
            worst = max(worst, float(np.max(np.linalg.norm(image - target, axis=0))))
        out["symmetry"] = worst
    return out


def _connection(frame: BlochFrame) -> np.ndarray:
    """Im <v_i(k_j) | v_i'(k_j)> on the open grid, 5-point stencil with wrap-around."""
    V = frame.vectors[:-1]
    h = TWO_PI / frame.grid_size
    derivative = (
        -np.roll(V, -2, axis=0) + 8.0 * np.roll(V, -1, axis=0) - 8.0 * np.roll(V, 1, axis=0) + np.roll(V, 2, axis=0)
    ) / (12.0 * h)
    return np.imag(np.einsum("kij,kij->kj", np.conj(V), derivative))


def berry_connection_rows(frame: BlochFrame) -> List[Tuple[float, ...]]:
    """(k, Im<v_1|v_1'>, ..., Im<v_N|v_N'>) per grid point, for plotting."""
    connection = _connection(frame)
    return [(float(k),) + tuple(float(a) for a in row) for k, row in zip(frame.grid[:-1], connection)]


def berry_phase(frame: BlochFrame, bands: str = "all", settings: Optional[Settings] = None) -> BerryPhase:
    """
    Berry phase of a Bloch frame.

    bands="all":      (1/2 pi i) int sum_{i<=N} <v_i|v_i'> dk
    bands="occupied": (1/pi i)   int sum_{i<=m} <v_i|v_i'> dk

    Raises:
        ResolutionError: the value is further than settings.rounding_tol from an integer
    """
    settings = settings or defaults()
    h = TWO_PI / frame.grid_size
    connection = _connection(frame)
    if bands == "all":
        value = h * float(np.sum(connection)) / TWO_PI
    elif bands == "occupied":
        value = h * float(np.sum(connection[:, : frame.m])) / np.pi
    else:
        raise ValueError(f"bands must be 'all' or 'occupied', got {bands!r}")

    integer = int(round(value))
    residual = abs(value - integer)
    if residual > settings.rounding_tol:
        raise ResolutionError(
            f"{bands}-band Berry phase {value:.6f} is {residual:.3f} away from an integer"
        )
    return BerryPhase(value=value, integer=integer, residual=residual, bands=bands)


# -- gauges -------------------------------------------------------------------


def block_gauge(
    frame: BlochFrame, g_minus: BlockFunction, g_plus: BlockFunction, symmetric: bool = False
) -> BlochGauge:
    """Gauge G(k) = F(k) diag(g_-(k), g_+(k)) F(k)^H from m x m block loops."""
    m, n = frame.m, frame.N

    def block(k: float) -> np.ndarray:
        B = np.zeros((n, n), dtype=complex)
        B[:m, :m] = g_minus(k)
        B[m:, m:] = g_plus(k)
        return B

    blocks = [block(k) for k in frame.grid]
    G = np.array([F @ B @ F.conj().T for F, B in zip(frame.vectors, blocks)])
    winding = unitary_winding(UnitaryLoop.from_function(block, frame.grid_size))
    return BlochGauge(grid=frame.grid, G=G, winding=winding, symmetric=symmetric)


def identity_gauge(frame: BlochFrame) -> BlochGauge:
    m, p = frame.m, frame.N - frame.m
    return block_gauge(frame, lambda k: np.eye(m), lambda k: np.eye(p), symmetric=True)


def _fourier_generator(rng: np.random.Generator, m: int, degree: int, amplitude: float) -> BlockFunction:
    coeffs = amplitude * (rng.normal(size=(degree + 1, m, m)) + 1j * rng.normal(size=(degree + 1, m, m)))
    orders = np.arange(degree + 1)

    def generator(k: float) -> np.ndarray:
        waves = np.exp(1j * orders * k)[:, None, None]
        half = np.sum(waves * coeffs, axis=0)
        return half + half.conj().T

    return generator


def random_symmetric_gauge(
    frame: BlochFrame,
    sym: SymmetryDescriptor,
    seed: int,
    max_winding: int = 2,
    amplitude: float = 0.5,
    degree: int = 3,
    winding: Optional[int] = None,
) -> BlochGauge:
    """
    Random smooth gauge compatible with the symmetry.

    g_-(k) = expm(i A(k)) diag(e^{iwk}, 1, ..., 1) with A a random Hermitian
    Fourier polynomial and w drawn from [-max_winding, max_winding] (or
    given). The empty block follows from the symmetry, with R the index
    reversal:
        chiral:        g_+(k) = R g_-(k) R
        particle-hole: g_+(k) = R conj(g_-(-k)) R
    so the total winding is 2 w.
    """
    rng = np.random.default_rng(seed)
    m = frame.m
    if sym.antiunitary and frame.grid_size % 2:
        raise GaugeError("particle-hole gauges need an even grid")
    generator = _fourier_generator(rng, m, degree, amplitude)
    twist_winding = int(rng.integers(-max_winding, max_winding + 1)) if winding is None else int(winding)

    def g_minus(k: float) -> np.ndarray:
        tw = np.ones(m, dtype=complex)
        tw[0] = np.exp(1j * twist_winding * k)
        return scipy.linalg.expm(1j * generator(k)) * tw[None, :]

    if sym.antiunitary:

        def g_plus(k: float) -> np.ndarray:
            return np.conj(g_minus(-k))[::-1, ::-1]

    else:

        def g_plus(k: float) -> np.ndarray:
            return g_minus(k)[::-1, ::-1]

    gauge = block_gauge(frame, g_minus, g_plus, symmetric=True)
    logger.debug("random symmetric gauge seed=%d twist=%d total winding=%d", seed, twist_winding, gauge.winding)
    return gauge


def apply_gauge(frame: BlochFrame, gauge: BlochGauge, settings: Optional[Settings] = None) -> BlochFrame:
    """
    u_i(k) = G(k) v_i(k).

    Raises:
        GaugeError: incompatible grid, non-unitary, non-periodic or not block diagonal
    """
    settings = settings or defaults()
    if gauge.G.shape[0] != len(frame.grid) or not np.allclose(gauge.grid, frame.grid):
        raise GaugeError("gauge and frame live on different grids")
    tol = settings.intertwining_limit
    n = frame.N
    identity = np.eye(n)
    P = frame.family.P
    G = gauge.G
    adjoint = np.conj(np.transpose(G, (0, 2, 1)))
    unitarity = float(np.max(np.abs(adjoint @ G - identity)))
    leak = max(
        float(np.max(np.abs((identity - P) @ G @ P))),
        float(np.max(np.abs(P @ G @ (identity - P)))),
    )
    periodicity = float(np.max(np.abs(G[-1] - G[0])))
    if unitarity > tol:
        raise GaugeError(f"gauge is not unitary (residual {unitarity:.3e})")
    if leak > tol:
        raise GaugeError(f"gauge mixes occupied and empty states (residual {leak:.3e})")
    if periodicity > tol:
        raise GaugeError(f"gauge is not periodic (residual {periodicity:.3e})")
    return BlochFrame(
        grid=frame.grid,
        vectors=G @ frame.vectors,
        m=frame.m,
        family=frame.family,
        symmetric=frame.symmetric if gauge.symmetric else None,
    )
