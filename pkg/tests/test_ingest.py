import logging

import numpy as np
import pandas as pd
import pytest

from numpy.testing import assert_allclose, assert_array_equal

from linkdcm.defaults import DEFAULT_DESIGN_COLUMNS, DEFAULT_KEY_COLUMNS, DEFAULT_LEVEL_COLUMN
from linkdcm.handlers import DataError, EvaluationError, IntegrityError, ParseError, SchemaError
from linkdcm.ingest import (
    Table, build_lagged, correlations, load_csv, minmax_apply, minmax_fit, read_frame_csv, split, table_summary,
    write_frame_csv)

from conftest import write_table

def test_load_csv_reads_generated_table(tmp_path, small_panel):
    table, levels, frame = small_panel
    loaded = load_csv(write_table(table, tmp_path / 'links.csv'))
    assert len(loaded) == len(table)
    pd.testing.assert_frame_equal(loaded.data, table.data, check_dtype=False)
    assert loaded.records[0].number_of_lanes >= 1

def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(str(tmp_path / 'missing.csv'))

def test_load_csv_missing_column(tmp_path, small_panel):
    table = small_panel[0]
    path = tmp_path / 'links.csv'
    table.to_labeled().drop(columns='GHG ER g/sec').to_csv(path, index=False)
    with pytest.raises(SchemaError) as info:
        load_csv(str(path))
    assert info.value.context['column'] == 'GHG ER g/sec'

def test_load_csv_reports_bad_cell(tmp_path, small_panel):
    table = small_panel[0]
    data = table.to_labeled().astype(object)
    data.loc[2, 'Link Speed'] = 'fast'
    path = tmp_path / 'links.csv'
    data.to_csv(path, index=False)
    with pytest.raises(ParseError) as info:
        load_csv(str(path))
    assert info.value.context['row'] == 3
    assert info.value.context['column'] == 'Link Speed'
    assert info.value.context['value'] == 'fast'

def test_load_csv_rejects_fractional_lanes(tmp_path, small_panel):
    table = small_panel[0]
    data = table.to_labeled().astype(object)
    data.loc[0, 'Number of Lanes'] = 2.5
    path = tmp_path / 'links.csv'
    data.to_csv(path, index=False)
    with pytest.raises(ParseError) as info:
        load_csv(str(path))
    assert info.value.context['row'] == 1

def test_load_csv_rejects_negative_values(tmp_path, small_panel):
    table = small_panel[0]
    data = table.to_labeled()
    data.loc[1, 'Delay on Link'] = -1.0
    path = tmp_path / 'links.csv'
    data.to_csv(path, index=False)
    with pytest.raises(IntegrityError) as info:
        load_csv(str(path))
    assert info.value.context == {'row': 2, 'column': 'Delay on Link'}

def test_load_csv_rejects_duplicate_keys(tmp_path, small_panel):
    table = small_panel[0]
    labeled = table.to_labeled()
    data = pd.concat([labeled, labeled.iloc[[0]]], ignore_index=True)
    path = tmp_path / 'links.csv'
    data.to_csv(path, index=False)
    with pytest.raises(IntegrityError) as info:
        load_csv(str(path))
    assert info.value.context['row'] == len(labeled) + 1
    assert info.value.context['key'] == {'scenario': 1, 'link_number': 1, 'time': 0}

def test_minmax_scales_and_flags(caplog):
    table = Table(pd.DataFrame({'x': [2.0, 4.0, 10.0], 'c': [3.0, 3.0, 3.0]}))
    scaler = minmax_fit(table, ['x', 'c'])
    assert scaler.columns['x'].min == 2.0 and scaler.columns['x'].max == 10.0
    assert scaler.columns['c'].constant
    scaled = minmax_apply(table, scaler)
    assert_allclose(scaled.column('x'), [0.0, 0.25, 1.0])
    assert_array_equal(scaled.column('c'), [0.0, 0.0, 0.0])
    assert not scaled.column('out_of_range').any()

    # Values outside the fitted range are kept and flagged
    other = Table(pd.DataFrame({'x': [0.0, 6.0, 12.0], 'c': [3.0, 3.0, 3.0]}))
    with caplog.at_level(logging.WARNING, logger='linkdcm.ingest'):
        scaled = minmax_apply(other, scaler)
    assert_allclose(scaled.column('x'), [-0.25, 0.5, 1.25])
    assert_array_equal(scaled.column('out_of_range'), [True, False, True])
    assert '2 rows' in caplog.text

def test_minmax_fit_empty_table():
    with pytest.raises(DataError):
        minmax_fit(Table(pd.DataFrame({'x': []})), ['x'])

def _hand_table():
    keys = [(1, 2, 1), (1, 1, 2), (1, 2, 0), (1, 1, 0), (1, 1, 1)]
    data = pd.DataFrame(keys, columns=DEFAULT_KEY_COLUMNS)
    data['link_speed'] = 10.0 * data['link_number'] + data['time']
    data['link_density_per_lane'] = 0.5
    data['free_flow_speed'] = 0.25
    data['number_of_lanes'] = 1.0
    return Table(data), [3, 2, 1, 3, 1]

def test_build_lagged_uses_previous_level_of_same_link():
    table, levels = _hand_table()
    frame = build_lagged(table, levels)
    assert frame.columns == DEFAULT_KEY_COLUMNS + DEFAULT_DESIGN_COLUMNS + [DEFAULT_LEVEL_COLUMN]
    assert frame.keys.values.tolist() == [[1, 1, 1], [1, 1, 2], [1, 2, 1]]
    assert_array_equal(frame.column('link_speed'), [11.0, 12.0, 21.0])
    assert_array_equal(frame.column('prev_medium'), [0, 0, 0])
    assert_array_equal(frame.column('prev_high'), [1, 0, 0])
    assert_array_equal(frame.y, [1, 2, 3])

def test_build_lagged_single_timestep_groups(caplog):
    table, levels = _hand_table()
    data = table.data
    data.loc[len(data)] = [1, 3, 0, 30.0, 0.5, 0.25, 1.0]
    with caplog.at_level(logging.WARNING, logger='linkdcm.ingest'):
        frame = build_lagged(Table(data), levels + [2])
    assert len(frame) == 3
    assert 'single timestep' in caplog.text

def test_build_lagged_checks_levels():
    table, levels = _hand_table()
    with pytest.raises(DataError):
        build_lagged(table, levels[:-1])
    with pytest.raises(EvaluationError):
        build_lagged(table, [1, 2, 3, 4, 1])

def test_split_is_disjoint_and_deterministic():
    table = Table(pd.DataFrame({'x': np.arange(100)}))
    train, test = split(table, 50, 20, seed=3)
    again_train, again_test = split(table, 50, 20, seed=3)
    other_train, other_test = split(table, 50, 20, seed=4)
    assert len(train) == 50 and len(test) == 20
    assert not set(train.column('x')) & set(test.column('x'))
    assert_array_equal(np.diff(train.column('x')) > 0, True)
    assert_array_equal(train.column('x'), again_train.column('x'))
    assert_array_equal(test.column('x'), again_test.column('x'))
    assert train.column('x').tolist() != other_train.column('x').tolist()

def test_split_counts_exceed_rows():
    table = Table(pd.DataFrame({'x': np.arange(10)}))
    with pytest.raises(DataError) as info:
        split(table, 8, 3, seed=1)
    assert info.value.context['n_rows'] == 10

def test_correlations_sorted_by_magnitude(small_panel):
    table = small_panel[0]
    data = table.data
    data['ghg_er'] = 2.0 * data['link_speed'] + 1.0
    data['delay_on_link'] = 0.0
    out = correlations(table.with_data(data))
    assert out['column'].iloc[0] == 'link_speed'
    assert out['correlation'].iloc[0] == pytest.approx(1.0)
    assert out['column'].iloc[-1] == 'delay_on_link'
    assert np.isnan(out['correlation'].iloc[-1])
    magnitudes = out['correlation'].abs().to_numpy()[:-1]
    assert (np.diff(magnitudes) <= 1e-12).all()

def test_table_summary(small_panel):
    table = small_panel[0]
    summary = table_summary(table)
    assert summary['n_rows'] == 48
    assert summary['n_groups'] == 8
    assert summary['n_scenarios'] == 1
    assert summary['columns']['number_of_lanes']['min'] >= 1

def test_frame_csv_round_trip(tmp_path, small_panel):
    frame = small_panel[2]
    path = str(tmp_path / 'frame.csv')
    write_frame_csv(frame, path)
    loaded = read_frame_csv(path)
    assert_array_equal(loaded.y, frame.y)
    assert_allclose(loaded.X, frame.X)

@pytest.mark.parametrize('column, value, message', [
    ('time', 2.7, 'integer'),
    ('chosen_level', 1.5, 'integer'),
    ('prev_high', 0.5, 'integer'),
    ('prev_medium', 2, '0 or 1')
])
def test_read_frame_csv_rejects_non_integer_cells(tmp_path, small_panel, column, value, message):
    data = small_panel[2].data.astype({column: float})
    data.loc[1, column] = value
    path = tmp_path / 'frame.csv'
    data.to_csv(path, index=False)
    with pytest.raises(ParseError, match=message) as info:
        read_frame_csv(str(path))
    assert info.value.context['row'] == 2
    assert info.value.context['column'] == column
