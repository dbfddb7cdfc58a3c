"""Shared fixtures: the reference chains and their (expensive) pipelines."""

import pytest

from bands.chains import KitaevParams, SSHParams, kitaev_model, ssh_model
from topology.invariant import invariant_pipeline


@pytest.fixture(scope="session")
def ssh_half():
    return ssh_model(SSHParams(0.5))


@pytest.fixture(scope="session")
def kitaev_reference():
    return kitaev_model(KitaevParams(1.0, 0.5))


@pytest.fixture(scope="session")
def ssh_pipeline(ssh_half):
    return invariant_pipeline(ssh_half, 2048)


@pytest.fixture(scope="session")
def kitaev_pipeline(kitaev_reference):
    return invariant_pipeline(kitaev_reference, 2048)


@pytest.fixture(scope="session")
def ssh_small_pipeline(ssh_half):
    return invariant_pipeline(ssh_half, 256)


@pytest.fixture(scope="session")
def kitaev_small_pipeline(kitaev_reference):
    return invariant_pipeline(kitaev_reference, 256)
