"""Shared fixtures and hypothesis profiles for the BoATS toolkit tests."""

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from modules.model_core import Dataset, WeightVector, generate_responses  # noqa: E402

settings.register_profile('default', max_examples=50, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile('fast', max_examples=10, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get('HYPOTHESIS_PROFILE', 'default'))


def random_problem(m: int, d: int, seed: int, sigma: float = 0.0, k: int = None):
    """Gaussian design with a known β (k nonzeros, all when k is None)."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, d))
    beta = rng.uniform(1.0, 3.0, d) * rng.choice((-1.0, 1.0), d)
    if k is not None:
        beta[rng.choice(d, size=d - k, replace=False)] = 0.0
    y = generate_responses(beta, X, sigma, seed + 1)
    return Dataset(X, y), WeightVector(beta)


@pytest.fixture
def well_conditioned():
    return random_problem(50, 10, seed=7, sigma=0.5)


@pytest.fixture
def noiseless_sparse():
    return random_problem(200, 12, seed=11, sigma=0.0, k=4)


@pytest.fixture(autouse=True)
def _isolated_log(tmp_path, monkeypatch):
    """Keep log files of CLI runs out of the working tree."""
    monkeypatch.chdir(tmp_path)
