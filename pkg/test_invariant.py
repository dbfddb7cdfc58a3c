"""End-to-end invariant, pathway agreement, gauge robustness, sweeps and homotopies."""

from dataclasses import replace

import numpy as np
import pytest
from joblib import parallel_backend

from bands.chains import KitaevParams, SSHParams, kitaev_model, ssh_invariant_oracle, ssh_model
from bands.model import SymmetryDescriptor, SymmetryKind, with_symmetry
from core.config import defaults
from core.errors import ConvergenceError, ModelInvalidError, PathError
from topology.invariant import (
    HomotopyPath,
    check_homotopy,
    compute_invariant,
    gauge_robustness,
    sweep,
)


def test_ssh_reference(ssh_pipeline):
    report = ssh_pipeline.report
    assert report.z2 == 1
    assert report.berry_integer % 2 == 1
    assert report.symmetry == "chiral"
    assert report.grid_size >= 2048
    assert report.residuals["berry_rounding"] < 1e-4


def test_kitaev_reference(kitaev_pipeline):
    report = kitaev_pipeline.report
    assert report.z2 == 1
    assert report.symmetry == "particle_hole"
    assert report.gap.g > 0.5


@pytest.mark.parametrize(
    "model, expected",
    [
        (ssh_model(SSHParams(2.0)), 0),
        (ssh_model(SSHParams(-0.5)), 1),
        (kitaev_model(KitaevParams(3.0, 0.5)), 0),
        (kitaev_model(KitaevParams(-1.0, -0.5)), 1),
    ],
)
def test_invariant_values(model, expected):
    assert compute_invariant(model, 256).z2 == expected


@pytest.mark.parametrize("delta", [-1.9, -1.5, -0.99, -0.5, 0.0, 0.5, 0.99, 1.5, 1.9])
def test_ssh_phase_diagram(delta):
    p = SSHParams(delta)
    assert compute_invariant(ssh_model(p), 1024).z2 == ssh_invariant_oracle(p)


def test_pathways_agree(ssh_pipeline, kitaev_pipeline):
    for pipeline in (ssh_pipeline, kitaev_pipeline):
        agreement = pipeline.report.pathway_agreement
        assert set(agreement) == {"occupied_berry", "all_bands_berry", "transport", "winding_oracle"}
        assert len({value % 2 for value in agreement.values()}) == 1
        assert agreement["transport"] == agreement["winding_oracle"]


def test_residuals_are_small(kitaev_pipeline):
    residuals = kitaev_pipeline.report.residuals
    for name in ("unitarity", "projection_symmetry", "transport_symmetry", "frame_symmetry"):
        assert residuals[name] <= 1e-8, name
    assert residuals["berry_corollary"] <= 1e-6
    assert kitaev_pipeline.report.residual_max <= 1e-4


@pytest.mark.parametrize("grid", [512, 1024, 2048])
def test_grid_robustness(kitaev_reference, grid):
    assert compute_invariant(kitaev_reference, grid).z2 == 1


def test_kitaev_under_either_symmetry():
    chiral = kitaev_model(KitaevParams(1.0, 0.5), symmetry="chiral")
    assert compute_invariant(chiral, 256).z2 == 1


def test_missing_symmetry_is_invalid(ssh_half):
    with pytest.raises(ModelInvalidError):
        compute_invariant(with_symmetry(ssh_half, None), 256)


def test_broken_symmetry_is_invalid(ssh_half):
    broken = with_symmetry(ssh_half, SymmetryDescriptor(SymmetryKind.CHIRAL, np.eye(2)))
    with pytest.raises(ModelInvalidError) as info:
        compute_invariant(broken, 256)
    assert info.value.code == "symmetry_violation"


def test_near_gapless_point_refines_the_grid():
    report = compute_invariant(ssh_model(SSHParams(0.95)), 256)
    assert report.z2 == 1
    assert report.grid_size > 256


def test_refinement_is_bounded():
    stingy = replace(defaults(), refinement_levels=0, intertwining_limit=1e-14)
    with pytest.raises(ConvergenceError) as info:
        compute_invariant(ssh_model(SSHParams(0.5)), 256, stingy)
    assert info.value.exit_code == 2


# -- gauges -------------------------------------------------------------------


@pytest.mark.parametrize("model_fixture", ["ssh_half", "kitaev_reference"])
def test_gauge_robustness(request, model_fixture):
    report = gauge_robustness(request.getfixturevalue(model_fixture), 256)
    assert report.passed, report.failures
    assert len(report.windings) == 20
    assert all(w % 2 == 0 for w in report.windings)
    assert report.shifts == report.windings


# -- sweeps -------------------------------------------------------------------


def test_sweep_keeps_input_order():
    points = [((("delta", d),), ssh_model(SSHParams(d))) for d in (1.5, 0.5, -0.5, -1.5)]
    with parallel_backend("threading", n_jobs=2):
        rows = sweep(points, 256, jobs=2)
    assert [row.params for row in rows] == [p for p, _ in points]
    assert [row.z2 for row in rows] == [0, 1, 1, 0]
    assert all(row.gap == pytest.approx(0.5) for row in rows)


def test_sweep_is_deterministic():
    points = [((("mu", mu), ("delta", 0.5)), kitaev_model(KitaevParams(mu, 0.5))) for mu in (-2.5, 0.0, 2.5)]
    first = sweep(points, 256, jobs=1)
    with parallel_backend("threading", n_jobs=2):
        second = sweep(points, 256, jobs=2)
    assert first == second


# -- homotopies ---------------------------------------------------------------


def test_ssh_path_is_constant():
    path = HomotopyPath.linear(lambda t: ssh_model(SSHParams(0.2 + 0.6 * t)), 10)
    report = check_homotopy(path, 256)
    assert report.constant
    assert report.z2[0] == 1
    assert report.samples[0] == 0.0 and report.samples[-1] == 1.0
    assert all(distance < 0.9 for distance in report.distances)
    assert report.transport_residual <= 1e-5


def test_kitaev_path_is_constant():
    path = HomotopyPath.linear(lambda t: kitaev_model(KitaevParams(1.5 * t, 0.5)), 10)
    report = check_homotopy(path, 256)
    assert report.constant and report.z2 == [1] * len(report.samples)


def test_constant_path():
    path = HomotopyPath.linear(lambda t: ssh_model(SSHParams(0.5)), 3)
    report = check_homotopy(path, 256)
    assert report.z2 == [1, 1, 1, 1]
    assert report.distances == [0.0, 0.0, 0.0]


def test_path_through_a_gap_closing():
    path = HomotopyPath.linear(lambda t: kitaev_model(KitaevParams(1.0 + 2.0 * t, 0.5)), 4)
    with pytest.raises(PathError) as info:
        check_homotopy(path, 256)
    assert info.value.sample == pytest.approx(0.5)
    assert "gap closure" in str(info.value)


def test_gap_closing_between_samples_is_reported():
    # mu = 2 at t = 7/9, never hit by bisection
    path = HomotopyPath.linear(lambda t: kitaev_model(KitaevParams(1.3 + 0.9 * t, 0.5)), 1)
    with pytest.raises(PathError) as info:
        check_homotopy(path, 256)
    assert 0.0 < info.value.sample <= 1.0
    assert "gap closure" in str(info.value)


def test_symmetry_must_stay_fixed():
    def factory(t):
        return kitaev_model(KitaevParams(1.0, 0.5), symmetry="chiral" if t > 0.5 else "particle_hole")

    with pytest.raises(PathError):
        check_homotopy(HomotopyPath.linear(factory, 2), 256)
