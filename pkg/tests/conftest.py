import os

import numpy as np
import pandas as pd
import pytest

from linkdcm.defaults import DEFAULT_DESIGN_COLUMNS, DEFAULT_LEVEL_COLUMN
from linkdcm.estimator import FittedModel, null_log_likelihood
from linkdcm.ingest import ModelFrame
from linkdcm.models import GeneratorSpec, MnlParams
from linkdcm.synthgen import generate, uniform_spec

MODERATE_MNL = dict(
    asc_low=0.5,
    asc_medium=0.2,
    beta_medium=[1.0, -1.0, 0.5, 0.3, 0.8, 0.0],
    beta_high=[1.5, -0.5, 1.0, 0.2, 0.0, 1.0]
)

def moderate_mnl_spec(n_links=40, n_steps=26, seed=0, **kwargs):
    return GeneratorSpec(n_links=n_links, n_steps=n_steps, seed=seed, kind='MNL', truth=MnlParams(**MODERATE_MNL), **kwargs)

def make_frame(X, y):
    """Build a model frame from a design matrix whose last two columns are lag dummies."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    data = pd.DataFrame({
        'scenario': np.ones(n, dtype=np.int64),
        'link_number': np.arange(1, n + 1, dtype=np.int64),
        'time': np.ones(n, dtype=np.int64)
    })
    for j, name in enumerate(DEFAULT_DESIGN_COLUMNS):
        data[name] = X[:, j]
    data['prev_medium'] = data['prev_medium'].astype(np.int64)
    data['prev_high'] = data['prev_high'].astype(np.int64)
    data[DEFAULT_LEVEL_COLUMN] = np.asarray(y, dtype=np.int64)
    return ModelFrame(data)

def random_design(rng, n):
    X = np.zeros((n, len(DEFAULT_DESIGN_COLUMNS)))
    X[:, :4] = rng.random((n, 4))
    lag = rng.integers(0, 3, n)
    X[:, 4] = lag == 1
    X[:, 5] = lag == 2
    return X

def fitted_from(kind, theta, n_obs=100):
    """Wrap known parameters as a fitted model with identity covariances."""
    theta = np.asarray(theta, dtype=float)
    eye = np.eye(theta.size)
    return FittedModel(kind, theta, eye, eye, null_log_likelihood(n_obs), n_obs)

def write_table(table, path):
    table.to_labeled().to_csv(path, index=False, lineterminator='\n')
    return str(path)

@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

@pytest.fixture
def random_frame(rng):
    X = random_design(rng, 200)
    y = rng.integers(1, 4, 200)
    return make_frame(X, y)

@pytest.fixture(scope='session')
def small_panel():
    return generate(uniform_spec(n_links=8, n_steps=6, seed=4), return_frame=True)

@pytest.fixture(scope='session')
def moderate_panel():
    spec = moderate_mnl_spec(n_links=40, n_steps=26, seed=7)
    table, levels, frame = generate(spec, return_frame=True)
    return spec, table, levels, frame

@pytest.fixture(scope='session')
def moderate_csv(tmp_path_factory, moderate_panel):
    spec, table, levels, frame = moderate_panel
    path = os.path.join(str(tmp_path_factory.mktemp('input')), 'links.csv')
    return write_table(table, path)
