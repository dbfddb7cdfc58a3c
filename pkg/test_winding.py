"""Winding numbers of scalar and unitary loops."""

import numpy as np
import pytest
import scipy.linalg

from bands.chains import KitaevParams, SSHParams, kitaev_offdiagonal, ssh_offdiagonal
from bands.model import momentum_grid
from core.errors import AliasingError, DomainError
from topology.transport import det_winding_loop
from topology.winding import (
    ScalarLoop,
    UnitaryLoop,
    random_fourier_loop,
    scalar_winding,
    unitary_winding,
    winding_properties_suite,
)


def _exp(n):
    return lambda k: np.exp(1j * n * k)


def _random_unitary_loop(rng, n, winding):
    """exp(i H(k)) diag(e^{iwk}, 1, ...) with a smooth periodic Hermitian H."""
    coeffs = rng.normal(size=(3, n, n)) + 1j * rng.normal(size=(3, n, n))

    def U(k):
        generator = sum(c * np.exp(1j * (j + 1) * k) for j, c in enumerate(coeffs))
        generator = 0.3 * (generator + generator.conj().T)
        twist = np.eye(n, dtype=complex)
        twist[0, 0] = np.exp(1j * winding * k)
        return scipy.linalg.expm(1j * generator) @ twist

    return U


def test_canonical_generator():
    assert scalar_winding(ScalarLoop.from_function(_exp(1), 64)) == 1
    assert scalar_winding(ScalarLoop.from_function(_exp(-3), 64)) == -3


@pytest.mark.parametrize("delta, expected", [(0.5, 1), (1.5, 0), (-0.5, 1), (-2.0, 0)])
def test_ssh_offdiagonal_winding(delta, expected):
    loop = ScalarLoop.from_function(lambda k: ssh_offdiagonal(SSHParams(delta), k), 256)
    assert scalar_winding(loop) == expected


@pytest.mark.parametrize("delta, expected", [(0.5, -1), (-0.5, 1)])
def test_kitaev_ellipse_orientation(delta, expected):
    loop = ScalarLoop.from_function(lambda k: kitaev_offdiagonal(KitaevParams(1.0, delta), k), 256)
    assert scalar_winding(loop) == expected


def test_kitaev_ellipse_outside_origin():
    loop = ScalarLoop.from_function(lambda k: kitaev_offdiagonal(KitaevParams(3.0, 0.5), k), 256)
    assert scalar_winding(loop) == 0


def test_exponents_add():
    loop = ScalarLoop.from_function(lambda k: _exp(2)(k) * _exp(3)(k), 256)
    assert scalar_winding(loop) == 5


def test_involution_of_zero_winding_loop():
    loop = ScalarLoop.from_function(lambda k: 2.0 + np.exp(-1j * k), 64)
    assert scalar_winding(loop) == 0


def test_vanishing_loop_is_rejected():
    with pytest.raises(DomainError):
        scalar_winding(ScalarLoop.from_function(lambda k: 1.0 + np.exp(1j * k), 64))


def test_open_loop_is_rejected():
    grid = momentum_grid(64)
    with pytest.raises(DomainError):
        scalar_winding(ScalarLoop(grid=grid, values=np.exp(0.5j * grid)))


def test_aliasing_without_sampler():
    grid = momentum_grid(64)
    with pytest.raises(AliasingError):
        scalar_winding(ScalarLoop(grid=grid, values=np.exp(32j * grid)))


def test_aliasing_guard_refines_the_grid():
    assert scalar_winding(ScalarLoop.from_function(_exp(32), 64)) == 32


def test_aliasing_guard_gives_up_after_three_doublings():
    def alternating(ks):
        return np.exp(1j * np.pi * np.arange(len(ks)))

    grid = momentum_grid(64)
    with pytest.raises(AliasingError):
        scalar_winding(ScalarLoop(grid=grid, values=alternating(grid), sampler=alternating))


def test_grid_doubling_is_stable():
    f = random_fourier_loop(np.random.default_rng(7), winding=2)
    assert scalar_winding(ScalarLoop.from_function(f, 128)) == 2
    assert scalar_winding(ScalarLoop.from_function(f, 256)) == 2


@pytest.mark.parametrize(
    "U, expected",
    [
        (lambda k: np.diag([np.exp(1j * k), np.exp(-1j * k)]), 0),
        (lambda k: np.diag([np.exp(1j * k), 1.0]), 1),
        (lambda k: np.diag([np.exp(2j * k), np.exp(1j * k), 1.0]), 3),
    ],
)
def test_diagonal_unitary_loops(U, expected):
    assert unitary_winding(UnitaryLoop.from_function(U, 64)) == expected


def test_non_unitary_loop_is_rejected():
    with pytest.raises(DomainError):
        unitary_winding(UnitaryLoop.from_function(lambda k: 2.0 * np.eye(2), 16))


@pytest.mark.parametrize("seed", range(5))
def test_unitary_winding_is_additive(seed):
    rng = np.random.default_rng(seed)
    U = _random_unitary_loop(rng, 3, 1)
    V = _random_unitary_loop(rng, 3, -2)
    assert unitary_winding(UnitaryLoop.from_function(U, 256)) == 1
    assert unitary_winding(UnitaryLoop.from_function(V, 256)) == -2
    assert unitary_winding(UnitaryLoop.from_function(lambda k: U(k) @ V(k), 256)) == -1


def test_transport_loop_winds_like_the_trace(ssh_small_pipeline):
    tr = ssh_small_pipeline.transport
    assert unitary_winding(det_winding_loop(tr)) == round(tr.berry_trace)


@pytest.mark.parametrize("seed", [0, 1])
def test_properties_suite(seed):
    report = winding_properties_suite(seed)
    assert report.passed, report.failures
    assert report.pairs == 100
