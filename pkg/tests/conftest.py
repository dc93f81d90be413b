"""Shared fixtures. The tripod pipeline run is expensive enough (~1.5 s)
that read-only integration tests share one session-scoped result."""

import numpy as np
import pytest

from voxfab import default_config, run_pipeline
from voxfab.generator import tripod


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def tripod_result(cfg):
    result = run_pipeline(tripod(), cfg, design_id="tripod")
    assert result.ok, result.failure
    return result


@pytest.fixture()
def rng():
    return np.random.default_rng(7)
