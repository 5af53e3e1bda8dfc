import json
import logging
import os

import pandas as pd
import pytest

from linkdcm.cli import PRESETS, get_parser, load_fitted, main
from linkdcm.estimator import MnlModel
from linkdcm.handlers import DataError

@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    monkeypatch.delenv('LINKDCM_SEED', raising=False)
    monkeypatch.delenv('LINKDCM_OUT_DIR', raising=False)
    monkeypatch.chdir(tmp_path)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler) is logging.StreamHandler:
            root.removeHandler(handler)

def _last_record(capsys):
    lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
    return json.loads(lines[-1])

@pytest.fixture(scope='module')
def workflow(tmp_path_factory):
    """Run the stage subcommands one after the other on a small uniform panel."""
    folder = str(tmp_path_factory.mktemp('cli'))
    join = lambda name: os.path.join(folder, name)
    common = ['--out-dir', folder, '--seed', '1', '--log-level', 'WARNING']
    statuses = {}
    steps = [
        ('synth', ['--preset', 'uniform', '--n-links', '30', '--n-steps', '21']),
        ('ingest', ['--input', join('synth_table.csv')]),
        ('discretize', ['--input', join('synth_table.csv')]),
        ('frame', ['--input', join('synth_table.csv'), '--levels', join('levels.csv')]),
        ('split', ['--input', join('frame.csv'), '--n-train', '400', '--n-test', '150']),
        ('fit-mnl', ['--input', join('train_frame.csv')]),
        ('fit-ol', ['--input', join('train_frame.csv')]),
        ('predict', ['--input', join('test_frame.csv'), '--fitted', join('mnl_model.json')]),
        ('evaluate', ['--input', join('test_frame.csv'), '--fitted', join('mnl_model.json')]),
        ('elasticity', ['--input', join('test_frame.csv'), '--fitted', join('ol_model.json'), '--alternative', '3']),
        ('iia', ['--input', join('train_frame.csv'), '--fitted', join('mnl_model.json')])
    ]
    for command, options in steps:
        statuses[command] = main([command] + options + common)
    for handler in list(logging.getLogger().handlers):
        if type(handler) is logging.StreamHandler:
            logging.getLogger().removeHandler(handler)
    return folder, statuses

def test_stage_commands_succeed(workflow):
    folder, statuses = workflow
    assert statuses == {command: 0 for command in statuses}
    for name in [
        'synth_table.csv', 'synth_levels.csv', 'truth.json', 'ingest.json', 'correlations.csv', 'levels.csv',
        'clustering.json', 'frame.csv', 'train_frame.csv', 'test_frame.csv', 'scaler.json', 'split.json',
        'mnl_model.json', 'ol_model.json', 'predictions_mnl.csv', 'confusion_mnl.csv', 'metrics_mnl.json',
        'elasticity_ol.csv', 'elasticity_ol_summary.csv', 'elasticity_ol_summary.json', 'iia.json']:
        assert os.path.isfile(os.path.join(folder, name)), name

def test_stage_command_outputs(workflow):
    folder, statuses = workflow
    truth = json.load(open(os.path.join(folder, 'truth.json'), encoding='utf-8'))
    assert truth['kind'] == 'MNL'
    assert set(truth['parameters'].values()) == {0.0}
    assert truth['generator']['n_links'] == 30
    synth_levels = pd.read_csv(os.path.join(folder, 'synth_levels.csv'))
    levels = pd.read_csv(os.path.join(folder, 'levels.csv'))
    assert levels['level'].tolist() == synth_levels['level'].tolist()
    assert len(pd.read_csv(os.path.join(folder, 'frame.csv'))) == 30 * 20
    assert len(pd.read_csv(os.path.join(folder, 'predictions_mnl.csv'))) == 150
    metrics = json.load(open(os.path.join(folder, 'metrics_mnl.json'), encoding='utf-8'))
    assert metrics['n_test'] == 150
    assert metrics['n_train'] == 400
    summary = json.load(open(os.path.join(folder, 'elasticity_ol_summary.json'), encoding='utf-8'))
    assert len(summary['reports']) == 4
    assert {r['alternative'] for r in summary['reports']} == {3}
    iia = json.load(open(os.path.join(folder, 'iia.json'), encoding='utf-8'))
    assert [t['dropped_alternative'] for t in iia['tests']] == [2, 3]

def test_load_fitted(workflow, tmp_path):
    folder, statuses = workflow
    model = load_fitted(os.path.join(folder, 'mnl_model.json'))
    assert isinstance(model, MnlModel)
    assert model.instance.kind == 'MNL'
    with pytest.raises(DataError):
        load_fitted(str(tmp_path / 'missing.json'))

def test_iia_rejects_ordered_logit(workflow, capsys):
    folder, statuses = workflow
    status = main([
        'iia', '--input', os.path.join(folder, 'train_frame.csv'), '--fitted', os.path.join(folder, 'ol_model.json'),
        '--out-dir', os.path.join(folder, 'iia_ol')])
    assert status == 1
    record = _last_record(capsys)
    assert record['error'] == 'EvaluationError'
    assert record['kind'] == 'OL'

def test_missing_input_prints_error_record(tmp_path, capsys):
    status = main(['ingest', '--input', str(tmp_path / 'missing.csv'), '--out-dir', str(tmp_path / 'out')])
    assert status == 1
    record = _last_record(capsys)
    assert record['error'] == 'StageError'
    assert record['stage'] == 'ingest'
    assert record['cause'] == 'DataError'

def test_missing_option_prints_error_record(tmp_path, capsys):
    assert main(['frame', '--input', str(tmp_path / 'missing.csv'), '--out-dir', str(tmp_path / 'out')]) == 1
    assert _last_record(capsys)['error'] == 'DataError'
    assert main(['predict', '--out-dir', str(tmp_path / 'out')]) == 1
    assert _last_record(capsys) == {'error': 'ConfigError', 'message': 'Missing required option --fitted', 'field': '--fitted'}

def test_pipeline_failure_prints_record_without_version(tmp_path, capsys):
    out_dir = tmp_path / 'out'
    status = main(['pipeline', '--input', str(tmp_path / 'missing.csv'), '--out-dir', str(out_dir), '--seed', '3'])
    assert status == 1
    record = _last_record(capsys)
    assert 'spec_version' not in record
    assert record['stage'] == 'ingest'
    assert os.listdir(out_dir) == ['error.json']

@pytest.mark.parametrize('argv', [
    [],
    ['fit-mnl', '--bogus'],
    ['split', '--n-train', 'many'],
    ['synth', '--preset', 'probit'],
    ['elasticity', '--alternative', '4']
])
def test_usage_errors_exit_with_two(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2

def test_parser_lists_every_subcommand():
    parser = get_parser()
    choices = parser._subparsers._group_actions[0].choices
    assert sorted(choices) == sorted([
        'ingest', 'discretize', 'frame', 'split', 'fit-mnl', 'fit-ol', 'predict', 'evaluate', 'elasticity', 'iia',
        'synth', 'pipeline'])
    assert sorted(PRESETS) == ['mnl', 'ol', 'uniform']

def test_frame_rejects_duplicate_level_keys(workflow, tmp_path, capsys):
    folder, statuses = workflow
    levels = pd.read_csv(os.path.join(folder, 'levels.csv'))
    path = str(tmp_path / 'levels.csv')
    pd.concat([levels, levels.iloc[[0]]], ignore_index=True).to_csv(path, index=False)
    status = main([
        'frame', '--input', os.path.join(folder, 'synth_table.csv'), '--levels', path,
        '--out-dir', str(tmp_path / 'out')])
    assert status == 1
    record = _last_record(capsys)
    assert record['error'] == 'IntegrityError'
    assert record['row'] == len(levels) + 1

@pytest.mark.parametrize('command', ['synth', 'ingest'])
def test_config_must_be_an_object(tmp_path, capsys, command):
    path = tmp_path / 'config.json'
    path.write_text('[1, 2]', encoding='utf-8')
    assert main([command, '--config', str(path), '--out-dir', str(tmp_path / 'out')]) == 1
    record = _last_record(capsys)
    assert record['error'] == 'ConfigError'
    assert record['path'] == str(path)

def test_fitted_model_must_be_an_object(tmp_path, capsys):
    path = tmp_path / 'mnl_model.json'
    path.write_text('[]', encoding='utf-8')
    assert main(['predict', '--fitted', str(path), '--out-dir', str(tmp_path / 'out')]) == 1
    assert _last_record(capsys)['error'] == 'ConfigError'

def test_models_folder_holds_named_fits(workflow, tmp_path, capsys):
    folder, statuses = workflow
    models = str(tmp_path / 'models')
    out = str(tmp_path / 'out')
    train = os.path.join(folder, 'train_frame.csv')
    test = os.path.join(folder, 'test_frame.csv')
    common = ['--models-folder', models, '--out-dir', out, '--log-level', 'WARNING']

    assert main(['fit-mnl', '--input', train, '--name', 'links'] + common) == 0
    assert os.path.isfile(os.path.join(models, 'links', 'links_base.json'))
    assert os.path.isfile(os.path.join(models, 'links', 'links_model.json'))
    assert json.load(open(os.path.join(out, 'mnl_model.json'), encoding='utf-8'))['kind'] == 'MNL'

    assert main(['predict', '--input', test, '--name', 'links'] + common) == 0
    predictions = pd.read_csv(os.path.join(out, 'predictions_mnl.csv'))
    expected = pd.read_csv(os.path.join(folder, 'predictions_mnl.csv'))
    assert len(predictions) == 150
    pd.testing.assert_frame_equal(predictions, expected, atol=1e-6)

    # Second fit refits the same instance
    assert main(['fit-mnl', '--input', train, '--name', 'links'] + common) == 0
    assert main(['fit-ol', '--input', train] + common) == 0
    assert sorted(os.listdir(models)) == ['links', 'ol']

    assert main(['fit-ol', '--input', train, '--name', 'links'] + common) == 1
    record = _last_record(capsys)
    assert record['error'] == 'ConfigError'
    assert record['model'] == 'MnlModel'
    assert main(['evaluate', '--input', test, '--name', 'missing'] + common) == 1
    assert _last_record(capsys)['error'] == 'ModelNotFoundError'
    assert main(['evaluate', '--input', test] + common) == 1
    assert _last_record(capsys)['field'] == '--name'
