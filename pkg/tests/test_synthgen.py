import logging

import numpy as np
import pytest

from numpy.testing import assert_allclose, assert_array_equal
from pandas.testing import assert_frame_equal

from linkdcm.discretizer import assign_levels, kmeans_1d
from linkdcm.estimator import probability_matrix
from linkdcm.handlers import ConfigError
from linkdcm.ingest import build_lagged, load_csv, minmax_apply
from linkdcm.models import GeneratorSpec, MnlParams
from linkdcm.synthgen import (
    bayes_accuracy, generate, generator_scaler, is_degenerate, mnl_reference_spec, ol_reference_spec, uniform_spec)

from conftest import write_table

def test_generate_is_deterministic():
    spec = mnl_reference_spec(n_links=6, n_steps=9, seed=21)
    table_a, levels_a = generate(spec)
    table_b, levels_b = generate(spec)
    assert_frame_equal(table_a.data, table_b.data)
    assert_array_equal(levels_a.level, levels_b.level)

def test_links_keep_their_stream():
    short, short_levels = generate(uniform_spec(n_links=5, n_steps=10, seed=3))
    long, long_levels = generate(uniform_spec(n_links=8, n_steps=10, seed=3))
    assert_frame_equal(short.data, long.data.iloc[:50].reset_index(drop=True))
    assert_array_equal(short_levels.level, long_levels.level[:50])

def test_uniform_truth_gives_equal_shares():
    table, levels = generate(uniform_spec(n_links=200, n_steps=51, seed=8))
    shares = np.bincount(levels.level, minlength=4)[1:] / levels.level.size
    assert_allclose(shares, 1.0 / 3.0, atol=0.02)

def test_saturated_truth_is_degenerate(caplog):
    spec = GeneratorSpec(n_links=10, n_steps=10, seed=1, truth=MnlParams(asc_low=50.0), initial_level_law=[1.0, 0.0, 0.0])
    with caplog.at_level(logging.WARNING, logger='linkdcm.synthgen'):
        table, levels = generate(spec)
    assert is_degenerate(levels)
    assert_array_equal(levels.level, 1)
    assert 'Degenerate panel' in caplog.text

def test_frame_matches_rebuilt_lags(moderate_panel):
    spec, table, levels, frame = moderate_panel
    rebuilt = build_lagged(minmax_apply(table, generator_scaler(spec)), levels)
    assert len(rebuilt) == len(frame) == 40 * 25
    assert_frame_equal(rebuilt.keys, frame.keys, check_dtype=False)
    assert_allclose(rebuilt.X, frame.X, atol=1e-12)
    assert_array_equal(rebuilt.y, frame.y)
    assert not rebuilt.out_of_range.any()

def test_generated_table_passes_ingest(tmp_path, small_panel):
    table = small_panel[0]
    loaded = load_csv(write_table(table, tmp_path / 'links.csv'))
    assert len(loaded) == 48
    assert_allclose(loaded.column('ghg_er'), table.column('ghg_er'))
    assert_array_equal(loaded.column('number_of_lanes'), table.column('number_of_lanes'))

def test_kmeans_recovers_generated_levels(moderate_panel):
    spec, table, levels, frame = moderate_panel
    assert not is_degenerate(levels)
    recovered = assign_levels(kmeans_1d(table.column('ghg_er'), seed=0))
    assert_array_equal(recovered.level, levels.level)

def test_uniform_bayes_accuracy():
    spec = uniform_spec(n_links=100, n_steps=31, seed=9)
    table, levels = generate(spec)
    assert bayes_accuracy(spec, table, levels) == pytest.approx(1.0 / 3.0, abs=0.03)

def test_bayes_accuracy_on_selected_keys(moderate_panel):
    spec, table, levels, frame = moderate_panel
    keys = frame.keys.iloc[:100]
    predicted = np.argmax(probability_matrix('MNL', spec.truth.to_vector(), frame.X[:100]), axis=1) + 1
    assert bayes_accuracy(spec, table, levels, keys=keys) == pytest.approx(np.mean(predicted == frame.y[:100]))

@pytest.mark.parametrize('make_spec', [mnl_reference_spec, ol_reference_spec])
def test_mean_probabilities_match_shares(make_spec):
    spec = make_spec(n_links=100, n_steps=51, seed=17)
    table, levels, frame = generate(spec, return_frame=True)
    mean = probability_matrix(spec.kind, spec.truth.to_vector(), frame.X).mean(axis=0)
    shares = np.bincount(frame.y, minlength=4)[1:] / len(frame)
    assert_allclose(mean, shares, atol=0.03)

def test_truth_must_match_kind():
    with pytest.raises(ConfigError):
        generate({'kind': 'OL', 'truth': MnlParams()})
    with pytest.raises(ConfigError):
        generate({'initial_level_law': [0.5, 0.5, 0.5]})
