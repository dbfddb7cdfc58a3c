"""Symmetric Bloch frames, Berry phases and gauge changes."""

from dataclasses import replace

import numpy as np
import pytest

from bands.chains import SSHParams, ssh_model
from bands.model import SymmetryDescriptor, SymmetryKind, fiber, momentum_grid
from bands.spectral import EigenSystem, eigensystem, projection_family
from core.config import defaults
from core.errors import GaugeError, ModelInvalidError, ResolutionError
from topology.frame import (
    BlochFrame,
    BlochGauge,
    apply_gauge,
    berry_connection_rows,
    berry_phase,
    block_gauge,
    frame_residuals,
    identity_gauge,
    initial_basis,
    initial_symmetric_basis,
    random_symmetric_gauge,
)


def _hand_frame(grid_size):
    """Eigenvectors (1, -+e^{-ik}) / sqrt 2 of the delta = 0 SSH chain, both winding once."""
    model = ssh_model(SSHParams(0.0))
    ks = momentum_grid(grid_size)
    phase = np.exp(-1j * ks)
    vectors = np.array([[[1.0, 1.0], [-p, p]] for p in phase], dtype=complex) / np.sqrt(2.0)
    return BlochFrame(
        grid=ks, vectors=vectors, m=1, family=projection_family(model, grid_size), symmetric=SymmetryKind.CHIRAL
    )


def _scalar(w):
    return lambda k: np.array([[np.exp(1j * w * k)]])


def _one(k):
    return np.eye(1)


# -- initial basis ------------------------------------------------------------


def test_initial_symmetric_basis_of_pauli_x():
    model = ssh_model(SSHParams(0.0))
    basis = initial_symmetric_basis(eigensystem(fiber(model, 0.0)), model.symmetry)
    np.testing.assert_allclose(basis[:, 0], np.array([1, -1]) / np.sqrt(2), atol=1e-14)
    np.testing.assert_allclose(basis[:, 1], np.array([1, 1]) / np.sqrt(2), atol=1e-14)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)
    H0 = fiber(model, 0.0).H
    assert np.real(basis[:, 1].conj() @ H0 @ basis[:, 1]) == pytest.approx(1.0)


def test_initial_basis_orders_occupied_first():
    es = eigensystem(fiber(ssh_model(SSHParams(0.5)), 0.0))
    basis = initial_basis(es)
    H0 = fiber(ssh_model(SSHParams(0.5)), 0.0).H
    energies = np.real(np.einsum("ij,ij->j", basis.conj(), H0 @ basis))
    assert energies[0] < 0.0 < energies[1]


def test_initial_symmetric_basis_needs_half_filling():
    es = EigenSystem(k=0.0, eigenvalues=np.array([-2.0, -1.0]), eigenvectors=np.eye(2, dtype=complex))
    with pytest.raises(ModelInvalidError) as info:
        initial_symmetric_basis(es, ssh_model(SSHParams(0.5)).symmetry)
    assert info.value.code == "symmetry_violation"


def test_initial_symmetric_basis_rejects_a_wrong_symmetry():
    es = eigensystem(fiber(ssh_model(SSHParams(0.5)), 0.0))
    with pytest.raises(ModelInvalidError):
        initial_symmetric_basis(es, SymmetryDescriptor(SymmetryKind.CHIRAL, np.eye(2)))


# -- frames -------------------------------------------------------------------


def test_ssh_frame_residuals(ssh_pipeline, ssh_half):
    residuals = frame_residuals(ssh_pipeline.frame, ssh_half.symmetry)
    assert residuals["orthonormality"] <= 1e-8
    assert residuals["span"] <= 1e-8
    assert residuals["periodicity"] <= 1e-8
    assert residuals["symmetry"] <= 1e-8


def test_kitaev_frame_is_particle_hole_symmetric(kitaev_pipeline, kitaev_reference):
    assert frame_residuals(kitaev_pipeline.frame, kitaev_reference.symmetry)["symmetry"] <= 1e-8
    assert kitaev_pipeline.frame.symmetric is SymmetryKind.PARTICLE_HOLE


def test_all_bands_phase_matches_the_trace(ssh_pipeline, kitaev_pipeline):
    for pipeline in (ssh_pipeline, kitaev_pipeline):
        phase = berry_phase(pipeline.frame, "all")
        assert phase.value == pytest.approx(pipeline.transport.berry_trace, abs=1e-6)


def test_occupied_and_all_bands_phases_coincide(ssh_pipeline, kitaev_pipeline):
    for pipeline in (ssh_pipeline, kitaev_pipeline):
        occupied = berry_phase(pipeline.frame, "occupied")
        all_bands = berry_phase(pipeline.frame, "all")
        assert occupied.value == pytest.approx(all_bands.value, abs=1e-6)


def test_hand_built_frame_phases():
    frame = _hand_frame(64)
    assert frame_residuals(frame, ssh_model(SSHParams(0.0)).symmetry)["symmetry"] <= 1e-14
    occupied = berry_phase(frame, "occupied")
    assert occupied.integer == -1
    assert occupied.value == pytest.approx(-1.0, abs=1e-4)
    assert berry_phase(frame, "all").integer == -1


def test_transport_frame_at_delta_zero_is_odd():
    from topology.invariant import invariant_pipeline

    frame = invariant_pipeline(ssh_model(SSHParams(0.0)), 256).frame
    assert berry_phase(frame, "occupied").integer % 2 == 1


def test_constant_frame_has_zero_phase():
    frame = _hand_frame(32)
    constant = replace(frame, vectors=np.broadcast_to(frame.vectors[0], frame.vectors.shape).copy())
    assert berry_phase(constant, "all").value == 0.0


def test_coarse_frame_fails_rounding():
    strict = replace(defaults(), rounding_tol=1e-12)
    with pytest.raises(ResolutionError):
        berry_phase(_hand_frame(16), "occupied", strict)


def test_unknown_band_selection():
    with pytest.raises(ValueError):
        berry_phase(_hand_frame(16), "empty")


def test_connection_rows():
    rows = berry_connection_rows(_hand_frame(32))
    assert len(rows) == 32
    assert rows[0][0] == 0.0
    assert rows[5][1] == pytest.approx(-0.5, abs=1e-4)


# -- gauges -------------------------------------------------------------------


def test_identity_gauge_changes_nothing(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    gauge = identity_gauge(frame)
    assert gauge.winding == 0
    moved = apply_gauge(frame, gauge)
    np.testing.assert_allclose(moved.vectors, frame.vectors, atol=1e-12)
    assert moved.symmetric is frame.symmetric


def test_occupied_scalar_gauge(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    gauge = block_gauge(frame, _scalar(1), _one)
    assert gauge.winding == 1
    moved = apply_gauge(frame, gauge)
    assert moved.symmetric is None
    assert berry_phase(moved, "all").integer - berry_phase(frame, "all").integer == 1
    assert berry_phase(moved, "occupied").integer - berry_phase(frame, "occupied").integer == 2


def test_symmetric_gauge_with_winding_two(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    gauge = block_gauge(frame, _scalar(1), _scalar(1), symmetric=True)
    assert gauge.winding == 2
    moved = apply_gauge(frame, gauge)
    assert berry_phase(moved, "all").integer - berry_phase(frame, "all").integer == 2
    assert berry_phase(moved, "occupied").integer - berry_phase(frame, "occupied").integer == 2


def test_double_twist_on_occupied_block(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    gauge = block_gauge(frame, _scalar(2), _one)
    assert gauge.winding == 2
    moved = apply_gauge(frame, gauge)
    assert berry_phase(moved, "all").integer - berry_phase(frame, "all").integer == 2


def test_gauge_shifts_add(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    first = block_gauge(frame, _scalar(1), _scalar(-2))
    moved = apply_gauge(frame, first)
    second = block_gauge(moved, _scalar(3), _one)
    twice = apply_gauge(moved, second)
    shift = berry_phase(twice, "all").integer - berry_phase(frame, "all").integer
    assert shift == first.winding + second.winding == 2


def test_gauge_mixing_the_blocks_is_rejected(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    swap = np.array([[0, 1], [1, 0]])
    G = np.array([F @ swap @ F.conj().T for F in frame.vectors])
    with pytest.raises(GaugeError):
        apply_gauge(frame, BlochGauge(grid=frame.grid, G=G, winding=0))


def test_gauge_on_another_grid_is_rejected(ssh_small_pipeline):
    frame = ssh_small_pipeline.frame
    with pytest.raises(GaugeError):
        apply_gauge(frame, identity_gauge(_hand_frame(64)))


def test_random_gauge_with_unit_twist(kitaev_small_pipeline, kitaev_reference):
    gauge = random_symmetric_gauge(kitaev_small_pipeline.frame, kitaev_reference.symmetry, seed=3, winding=1)
    assert gauge.winding == 2
    assert gauge.symmetric


def test_random_gauge_without_generator_is_identity(ssh_small_pipeline, ssh_half):
    gauge = random_symmetric_gauge(ssh_small_pipeline.frame, ssh_half.symmetry, seed=0, amplitude=0.0, winding=0)
    assert gauge.winding == 0
    np.testing.assert_allclose(gauge.G, np.broadcast_to(np.eye(2), gauge.G.shape), atol=1e-12)


def test_random_gauges_have_even_winding(kitaev_small_pipeline, kitaev_reference):
    frame = kitaev_small_pipeline.frame
    for seed in range(20):
        gauge = random_symmetric_gauge(frame, kitaev_reference.symmetry, seed)
        assert gauge.winding % 2 == 0


def test_random_gauge_keeps_the_frame_symmetric(kitaev_small_pipeline, kitaev_reference):
    frame = kitaev_small_pipeline.frame
    gauge = random_symmetric_gauge(frame, kitaev_reference.symmetry, seed=5, winding=-1)
    moved = apply_gauge(frame, gauge)
    assert frame_residuals(moved, kitaev_reference.symmetry)["symmetry"] <= 1e-8
    assert berry_phase(moved, "occupied").integer % 2 == berry_phase(frame, "occupied").integer % 2
