"""
Tight-Binding Models - Hopping matrices, symmetries and fiber Hamiltonians.

A translation-invariant chain with N internal states per cell and hopping
range R is described by matrices A_0 ... A_R. Its Bloch fiber is

    H(k) = A_0 + sum_j ( e^{-ijk} A_j + e^{ijk} A_j^H )

Symmetries come in two flavours:
- chiral:         a unitary S with S H(k) = -H(k) S
- particle_hole:  an anti-unitary C v = U conj(v) with C H(-k) = -H(k) C

Models live in JSON documents; complex numbers are written as [re, im].
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.config import Settings, defaults
from core.errors import ModelInvalidError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class SymmetryKind(Enum):
    CHIRAL = "chiral"
    PARTICLE_HOLE = "particle_hole"


def _frozen(matrix) -> np.ndarray:
    array = np.array(matrix, dtype=complex)
    array.setflags(write=False)
    return array


def _opnorm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix, 2)) if matrix.size else 0.0


@dataclass(frozen=True)
class SymmetryDescriptor:
    """
    A chiral unitary S or the unitary part U of a particle-hole operator.

    Particle-hole symmetry acts as v -> matrix @ conj(v).
    """

    kind: SymmetryKind
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def antiunitary(self) -> bool:
        return self.kind is SymmetryKind.PARTICLE_HOLE

    def unitarity_residual(self) -> float:
        n = self.matrix.shape[0]
        return _opnorm(self.matrix @ self.matrix.conj().T - np.eye(n))


@dataclass(frozen=True)
class TightBindingModel:
    """
    Finite-range translation-invariant Hamiltonian.

    Construction validates the structural assumptions and raises
    ModelInvalidError with a distinct code for each violation.
    """

    hoppings: Tuple[np.ndarray, ...]
    symmetry: Optional[SymmetryDescriptor] = None
    tol: float = 1e-10

    def __post_init__(self):
        if len(self.hoppings) == 0:
            raise ModelInvalidError("at least A0 is required", code="empty_hoppings")
        frozen = tuple(_frozen(a) for a in self.hoppings)
        object.__setattr__(self, "hoppings", frozen)

        n = frozen[0].shape[0] if frozen[0].ndim == 2 else -1
        for j, a in enumerate(frozen):
            if a.ndim != 2 or a.shape != (n, n) or n < 1:
                raise ModelInvalidError(
                    f"A{j} has shape {a.shape}, expected ({n}, {n})", code="dimension_mismatch"
                )

        onsite = frozen[0]
        skew = float(np.max(np.abs(onsite - onsite.conj().T)))
        if skew > self.tol:
            raise ModelInvalidError(
                f"A0 is not Hermitian (max |A0 - A0^H| = {skew:.3e})", code="non_hermitian_onsite"
            )

        if self.symmetry is not None:
            if self.symmetry.matrix.shape != (n, n):
                raise ModelInvalidError(
                    f"symmetry matrix has shape {self.symmetry.matrix.shape}, expected ({n}, {n})",
                    code="dimension_mismatch",
                )
            residual = self.symmetry.unitarity_residual()
            if residual > self.tol:
                raise ModelInvalidError(
                    f"symmetry matrix is not unitary (residual {residual:.3e})",
                    code="non_unitary_symmetry",
                )
            if n % 2:
                raise ModelInvalidError(
                    f"a symmetric insulator needs an even fiber dimension, got N={n}",
                    code="odd_dimension",
                )

    @property
    def N(self) -> int:
        return self.hoppings[0].shape[0]

    @property
    def R(self) -> int:
        return len(self.hoppings) - 1


@dataclass(frozen=True)
class FiberSample:
    """H(k) and its k-derivative at one reduced momentum."""

    k: float
    H: np.ndarray
    dH: np.ndarray


@dataclass(frozen=True)
class SymmetryReport:
    kind: str
    residual: float
    grid_size: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def reduce_momentum(k: float) -> float:
    """Map k into [0, 2pi)."""
    reduced = math.fmod(float(k), TWO_PI)
    if reduced < 0.0:
        reduced += TWO_PI
    if reduced >= TWO_PI:
        reduced = 0.0
    return reduced


def fiber(model: TightBindingModel, k: float) -> FiberSample:
    """
    Evaluate the Bloch fiber H(k) and its derivative.

    Args:
        model: A validated model
        k: Momentum in radians, any real value

    Returns:
        FiberSample at k reduced to [0, 2pi)
    """
    k = reduce_momentum(k)
    onsite = model.hoppings[0]
    H = onsite.copy()
    dH = np.zeros_like(onsite)
    for j in range(1, model.R + 1):
        a = model.hoppings[j]
        forward = np.exp(-1j * j * k)
        backward = np.exp(1j * j * k)
        adjoint = a.conj().T
        H += forward * a + backward * adjoint
        dH += -1j * j * forward * a + 1j * j * backward * adjoint
    return FiberSample(k=k, H=H, dH=dH)


def momentum_grid(grid_size: int) -> np.ndarray:
    """Uniform grid over [0, 2pi] with the endpoint duplicated (M+1 samples)."""
    if grid_size < 1:
        raise ValueError(f"grid size must be positive, got {grid_size}")
    return np.linspace(0.0, TWO_PI, grid_size + 1)


def apply_symmetry(sym: SymmetryDescriptor, v: np.ndarray) -> np.ndarray:
    """Apply S (or C = U conj) to a vector or to the columns of a matrix."""
    if sym.antiunitary:
        return sym.matrix @ np.conj(v)
    return sym.matrix @ v


def conjugate_by_symmetry(sym: SymmetryDescriptor, operator: np.ndarray) -> np.ndarray:
    """Return S A S^-1, or C A C^-1 = U conj(A) U^H for the anti-unitary case."""
    inner = np.conj(operator) if sym.antiunitary else operator
    return sym.matrix @ inner @ sym.matrix.conj().T


def validate_symmetry(
    model: TightBindingModel, grid_size: int, settings: Optional[Settings] = None
) -> SymmetryReport:
    """
    Check the anticommutation relation of the declared symmetry on a k-grid.

    Chiral:        max_k || S H(k) + H(k) S ||
    Particle-hole: max_k || C H(-k) + H(k) C ||, i.e. || U conj(H(-k)) + H(k) U ||
    """
    settings = settings or defaults()
    sym = model.symmetry
    if sym is None:
        raise ModelInvalidError("model declares no symmetry", code="symmetry_violation")

    residual = 0.0
    for k in momentum_grid(grid_size)[:-1]:
        H = fiber(model, k).H
        if sym.antiunitary:
            mirrored = fiber(model, -k).H
            defect = sym.matrix @ np.conj(mirrored) + H @ sym.matrix
        else:
            defect = sym.matrix @ H + H @ sym.matrix
        residual = max(residual, _opnorm(defect))

    logger.debug("symmetry residual %.3e on %d points", residual, grid_size)
    return SymmetryReport(
        kind=sym.kind.value, residual=residual, grid_size=grid_size, tolerance=settings.structural_tol
    )


def with_symmetry(model: TightBindingModel, symmetry: Optional[SymmetryDescriptor]) -> TightBindingModel:
    """Same hoppings, different declared symmetry."""
    return TightBindingModel(hoppings=model.hoppings, symmetry=symmetry, tol=model.tol)


# -- JSON documents -----------------------------------------------------------


def _decode_matrix(raw, label: str) -> np.ndarray:
    try:
        rows = [[complex(float(entry[0]), float(entry[1])) for entry in row] for row in raw]
    except (TypeError, ValueError, IndexError, KeyError) as exc:
        raise ModelInvalidError(f"{label}: entries must be [re, im] pairs ({exc})", code="schema")
    for entry_row in raw:
        for entry in entry_row:
            if len(entry) != 2:
                raise ModelInvalidError(f"{label}: entries must be [re, im] pairs", code="schema")
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ModelInvalidError(f"{label}: ragged or empty matrix", code="schema")
    return np.array(rows, dtype=complex)


def _encode_matrix(matrix: np.ndarray) -> List[List[List[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def parse_model(document: str, settings: Optional[Settings] = None) -> TightBindingModel:
    """
    Build a validated model from a JSON document.

    Expected layout:
        {"N": 2, "R": 1,
         "hoppings": {"A0": [[[re, im], ...], ...], "A1": ...},
         "symmetry": {"kind": "chiral" | "particle_hole", "matrix": ...} | null}

    Raises:
        ModelInvalidError: with code schema, empty_hoppings, dimension_mismatch,
            non_hermitian_onsite, non_unitary_symmetry or odd_dimension
    """
    settings = settings or defaults()
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelInvalidError(f"not valid JSON: {exc}", code="schema")
    if not isinstance(data, dict):
        raise ModelInvalidError("top level must be an object", code="schema")

    for key in ("N", "R", "hoppings"):
        if key not in data:
            raise ModelInvalidError(f"missing key {key!r}", code="schema")
    n, r, hoppings = data["N"], data["R"], data["hoppings"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ModelInvalidError(f"N must be a positive integer, got {n!r}", code="schema")
    if not isinstance(r, int) or isinstance(r, bool) or r < 0:
        raise ModelInvalidError(f"R must be a non-negative integer, got {r!r}", code="schema")
    if not isinstance(hoppings, dict):
        raise ModelInvalidError("hoppings must be an object keyed A0..AR", code="schema")
    if not hoppings:
        raise ModelInvalidError("hopping list is empty", code="empty_hoppings")

    matrices = []
    for j in range(r + 1):
        label = f"A{j}"
        if label not in hoppings:
            raise ModelInvalidError(f"missing hopping {label}", code="schema")
        matrix = _decode_matrix(hoppings[label], label)
        if matrix.shape != (n, n):
            raise ModelInvalidError(
                f"{label} has shape {matrix.shape}, expected ({n}, {n})", code="dimension_mismatch"
            )
        matrices.append(matrix)
    extra = set(hoppings) - {f"A{j}" for j in range(r + 1)}
    if extra:
        raise ModelInvalidError(f"unexpected hoppings {sorted(extra)} beyond R={r}", code="schema")

    symmetry = None
    raw_sym = data.get("symmetry")
    if raw_sym is not None:
        if not isinstance(raw_sym, dict) or "kind" not in raw_sym or "matrix" not in raw_sym:
            raise ModelInvalidError("symmetry needs 'kind' and 'matrix'", code="schema")
        try:
            kind = SymmetryKind(raw_sym["kind"])
        except ValueError:
            raise ModelInvalidError(f"unknown symmetry kind {raw_sym['kind']!r}", code="schema")
        symmetry = SymmetryDescriptor(kind=kind, matrix=_decode_matrix(raw_sym["matrix"], "symmetry"))

    model = TightBindingModel(hoppings=tuple(matrices), symmetry=symmetry, tol=settings.structural_tol)
    logger.info("parsed model N=%d R=%d symmetry=%s", model.N, model.R, raw_sym and raw_sym["kind"])
    return model


def model_to_document(model: TightBindingModel) -> dict:
    """Inverse of parse_model (as a dict ready for json.dumps)."""
    symmetry = None
    if model.symmetry is not None:
        symmetry = {"kind": model.symmetry.kind.value, "matrix": _encode_matrix(model.symmetry.matrix)}
    return {
        "N": model.N,
        "R": model.R,
        "hoppings": {f"A{j}": _encode_matrix(a) for j, a in enumerate(model.hoppings)},
        "symmetry": symmetry,
    }


def hermiticity_residual(model: TightBindingModel, grid_size: int) -> float:
    """max_k || H(k) - H(k)^H || over a grid."""
    worst = 0.0
    for k in momentum_grid(grid_size)[:-1]:
        H = fiber(model, k).H
        worst = max(worst, float(np.max(np.abs(H - H.conj().T))))
    return worst


def symmetric_partner_indices(grid_size: int) -> Sequence[int]:
    """Index of -k for each grid index j (j <-> M - j)."""
    return [grid_size - j for j in range(grid_size + 1)]
