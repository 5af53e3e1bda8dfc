import json
import math

import numpy as np
import pandas as pd
import pytest

from numpy.testing import assert_array_equal

from linkdcm.handlers import ConfigError
from linkdcm.ingest import load_csv
from linkdcm.models import OptimOptions
from linkdcm.tools import five_number_summary, from_jsonable, get_md_doc, get_rng, to_jsonable

def test_get_rng_streams_are_reproducible():
    a = get_rng(42, 'split').random(5)
    b = get_rng(42, 'split').random(5)
    assert_array_equal(a, b)
    assert isinstance(get_rng(42).bit_generator, np.random.Philox)

def test_get_rng_streams_are_independent_of_creation_order():
    first = [get_rng(7, 'synth', 1, link).random(3) for link in (1, 2, 3)]
    second = [get_rng(7, 'synth', 1, link).random(3) for link in (3, 2, 1)][::-1]
    for a, b in zip(first, second):
        assert_array_equal(a, b)
    assert not np.array_equal(get_rng(7, 'split').random(3), get_rng(7, 'kmeans').random(3))
    assert not np.array_equal(get_rng(7, 'split').random(3), get_rng(8, 'split').random(3))

@pytest.mark.parametrize('seed', [-1, 1.5, True])
def test_get_rng_rejects_bad_seeds(seed):
    with pytest.raises(ConfigError):
        get_rng(seed)

def test_to_jsonable_converts_numbers():
    payload = {
        1: np.int64(3),
        'array': np.array([[1.0, np.nan], [np.inf, -np.inf]]),
        'flag': np.bool_(True),
        'options': OptimOptions(max_iter=3),
        'frame': pd.DataFrame({'a': [1]}),
        'tuple': (np.float64(0.25), 'x')
    }
    out = to_jsonable(payload)
    assert out['1'] == 3
    assert out['array'] == [[1.0, None], ['inf', '-inf']]
    assert out['flag'] is True
    assert out['options']['max_iter'] == 3
    assert out['frame'] == {'a': {'0': 1}}
    assert out['tuple'] == [0.25, 'x']
    json.dumps(out, allow_nan=False)

def test_from_jsonable():
    assert math.isnan(from_jsonable(None))
    assert from_jsonable('inf') == math.inf
    assert from_jsonable('-inf') == -math.inf
    assert from_jsonable(0.5) == 0.5

def test_five_number_summary():
    summary = five_number_summary([5.0, 1.0, np.nan, 3.0, 2.0, 4.0])
    assert summary == {'min': 1.0, 'q1': 2.0, 'median': 3.0, 'q3': 4.0, 'max': 5.0}
    assert all(math.isnan(v) for v in five_number_summary([np.nan]).values())

def test_get_md_doc():
    doc = get_md_doc(load_csv, parameters=True)
    assert doc
    assert 'Parameters' in doc
    assert 'path' in doc
