"""Settings overrides and the error hierarchy."""

import pytest

from core.config import Settings, defaults, override
from core.errors import (
    ChainError,
    ConvergenceError,
    DomainError,
    EigenSolverError,
    GapError,
    InternalConsistencyError,
    ModelInvalidError,
    NumericError,
    PathError,
    SizeError,
    UsageError,
)


def test_defaults_are_shared_and_frozen():
    assert defaults() is defaults()
    with pytest.raises(Exception):
        defaults().edge_tol = 1.0


def test_override_coerces_to_field_types():
    settings = override(defaults(), ["transport_grid=4096", "edge_tol=1e-8"])
    assert settings.transport_grid == 4096
    assert isinstance(settings.transport_grid, int)
    assert settings.edge_tol == pytest.approx(1e-8)
    assert defaults().transport_grid == 2048


@pytest.mark.parametrize("assignment", ["nope=1", "edge_tol", "transport_grid=abc"])
def test_override_rejects_bad_assignments(assignment):
    with pytest.raises(ValueError):
        override(Settings(), [assignment])


def test_exit_codes():
    assert ModelInvalidError("x", code="schema").exit_code == 1
    assert UsageError("x").exit_code == 1
    assert SizeError("x").exit_code == 1
    assert GapError("x").exit_code == 2
    assert ConvergenceError("x").exit_code == 2
    assert InternalConsistencyError("x").exit_code == 3


def test_error_payloads():
    gap = GapError("closed", k=3.14)
    assert gap.k == 3.14 and "k=3.14" in str(gap)
    assert EigenSolverError("stuck", sweeps=7).sweeps == 7
    assert PathError("broken", sample=0.5).sample == 0.5
    assert isinstance(DomainError("x"), GapError)
    assert issubclass(NumericError, ChainError)


def test_unknown_model_error_code_is_a_bug():
    with pytest.raises(ValueError):
        ModelInvalidError("x", code="bogus")
