"""
Built-in Chains - The SSH chain and the Kitaev chain with their closed forms.

SSH:    A0 = [[0, d], [d, 0]], A1 = [[0, 0], [1, 0]], chiral S = diag(1, -1)
        bands  +-sqrt((d + cos k)^2 + sin^2 k), gapless iff d = +-1
Kitaev: A0 = [[0, mu], [mu, 0]], A1 = [[0, 1 + d], [1 - d, 0]],
        particle-hole C(x, y) = (conj x, -conj y)
        bands  +-sqrt((mu + 2 cos k)^2 + (2 d sin k)^2)
        gapless set eta = {|mu| < 2, d = 0} U {|mu| = 2}
"""

import math
from dataclasses import dataclass

import numpy as np

from bands.model import SymmetryDescriptor, SymmetryKind, TightBindingModel
from core.errors import DomainError

PARAMETER_TOL = 1e-12
SIGMA_3 = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class SSHParams:
    delta: float


@dataclass(frozen=True)
class KitaevParams:
    mu: float
    delta: float


def ssh_model(p: SSHParams) -> TightBindingModel:
    """SSH chain with its chiral symmetry sigma_3."""
    d = float(p.delta)
    onsite = np.array([[0.0, d], [d, 0.0]], dtype=complex)
    hop = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    return TightBindingModel(
        hoppings=(onsite, hop),
        symmetry=SymmetryDescriptor(kind=SymmetryKind.CHIRAL, matrix=SIGMA_3),
    )


def kitaev_model(p: KitaevParams, symmetry: str = "particle_hole") -> TightBindingModel:
    """
    Kitaev chain in the 2x2 Bloch form.

    Args:
        p: chemical potential and pairing
        symmetry: "particle_hole" (default) or "chiral"; the chain has both
    """
    mu, d = float(p.mu), float(p.delta)
    onsite = np.array([[0.0, mu], [mu, 0.0]], dtype=complex)
    hop = np.array([[0.0, 1.0 + d], [1.0 - d, 0.0]], dtype=complex)
    kind = SymmetryKind(symmetry)
    return TightBindingModel(
        hoppings=(onsite, hop),
        symmetry=SymmetryDescriptor(kind=kind, matrix=SIGMA_3),
    )


def ssh_bands(p: SSHParams, k: float) -> tuple:
    e = math.hypot(p.delta + math.cos(k), math.sin(k))
    return (-e, e)


def kitaev_bands(p: KitaevParams, k: float) -> tuple:
    e = math.hypot(p.mu + 2.0 * math.cos(k), 2.0 * p.delta * math.sin(k))
    return (-e, e)


def ssh_gapless_distance(p: SSHParams) -> float:
    return abs(abs(p.delta) - 1.0)


def kitaev_gapless_distance(p: KitaevParams) -> float:
    """Euclidean distance from (mu, delta) to the gapless set eta."""
    to_lines = abs(abs(p.mu) - 2.0)
    if abs(p.mu) < 2.0:
        return min(to_lines, abs(p.delta))
    return to_lines


def kitaev_in_eta(p: KitaevParams) -> bool:
    return kitaev_gapless_distance(p) <= PARAMETER_TOL


def ssh_invariant_oracle(p: SSHParams) -> int:
    """1 on |delta| < 1, 0 on |delta| > 1."""
    if ssh_gapless_distance(p) <= PARAMETER_TOL:
        raise DomainError(f"SSH chain is gapless at delta={p.delta}")
    return 1 if abs(p.delta) < 1.0 else 0


def kitaev_invariant_oracle(p: KitaevParams) -> int:
    """1 on |mu| < 2 with delta != 0, 0 elsewhere off eta."""
    if kitaev_in_eta(p):
        raise DomainError(f"Kitaev chain is gapless at mu={p.mu}, delta={p.delta}")
    return 1 if abs(p.mu) < 2.0 and p.delta != 0.0 else 0


def ssh_offdiagonal(p: SSHParams, k: float) -> complex:
    """The (1, 2) fiber entry delta + e^{ik}."""
    return p.delta + complex(math.cos(k), math.sin(k))


def kitaev_offdiagonal(p: KitaevParams, k: float) -> complex:
    """The (1, 2) fiber entry mu + 2 cos k - 2 i delta sin k."""
    return complex(p.mu + 2.0 * math.cos(k), -2.0 * p.delta * math.sin(k))
