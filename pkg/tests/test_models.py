import json
import os

import numpy as np
import pytest

from numpy.testing import assert_allclose, assert_array_equal

from linkdcm.core import load_config
from linkdcm.defaults import DEFAULT_MNL_LABELS, DEFAULT_OL_REPORT_LABELS, DEFAULT_REFERENCE_MNL
from linkdcm.handlers import ConfigError, DataError
from linkdcm.models import (
    AttributeLaw, GeneratorSpec, MnlParams, Model, OlParams, OptimOptions, PipelineConfig, parse_model)

def test_mnl_params_vector_order():
    params = MnlParams(**DEFAULT_REFERENCE_MNL)
    vector = params.to_vector()
    assert vector.shape == (14,)
    assert vector[:3].tolist() == [22.0, 11.8, 13.7]
    assert vector[8] == 11.7
    assert MnlParams.from_vector(vector) == params
    labels = params.to_labels()
    assert list(labels) == DEFAULT_MNL_LABELS
    assert labels['Beta_High_FreeSpeed'] == 18.6
    assert labels['Beta_High_PrevHighGHG'] == 0.74
    assert MnlParams.from_labels(labels) == params

def test_mnl_params_reject_bad_shapes():
    with pytest.raises(ConfigError):
        MnlParams.from_vector(np.zeros(13))
    with pytest.raises(ConfigError) as info:
        MnlParams.from_labels({'ASC_Low': 1.0})
    assert info.value.context['field'] == 'ASC_Medium'
    with pytest.raises(ConfigError) as info:
        parse_model(MnlParams, {'beta_medium': [1.0, 2.0]})
    assert info.value.context['field'] == 'beta_medium'
    with pytest.raises(ConfigError):
        parse_model(MnlParams, {'beta_low': [0.0] * 6})

def test_ol_params_labels_use_thresholds():
    params = OlParams.from_thresholds([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], -0.5, 1.5)
    labels = params.to_labels()
    assert list(labels) == DEFAULT_OL_REPORT_LABELS
    assert labels['Mu_Low_Medium'] == -0.5
    assert labels['Mu_Medium_High'] == pytest.approx(1.5)
    again = OlParams.from_labels(labels)
    assert_allclose(again.to_vector(), params.to_vector())
    assert OlParams.from_vector(params.to_vector()) == params
    with pytest.raises(ConfigError):
        OlParams.from_vector(np.zeros(9))

def test_generator_spec_reads_truth_by_kind():
    spec = parse_model(GeneratorSpec, {'kind': 'OL', 'truth': {'eta': [1.0] * 6, 'mu1': 0.0, 'delta': 1.0}, 'n_links': 3})
    assert isinstance(spec.truth, OlParams)
    assert spec.truth.mu2 == pytest.approx(np.e)
    spec = parse_model(GeneratorSpec, {'truth': {'asc_low': 2.0}})
    assert isinstance(spec.truth, MnlParams)
    assert spec.kind == 'MNL'
    assert spec.attribute_laws['number_of_lanes'].static

def test_generator_spec_validation():
    with pytest.raises(ConfigError):
        parse_model(GeneratorSpec, {'raw_ranges': {'link_speed': (5.0, 5.0)}})
    with pytest.raises(ConfigError):
        parse_model(GeneratorSpec, {'n_links': 0})
    laws = {k: AttributeLaw() for k in ['link_speed', 'link_density_per_lane', 'free_flow_speed']}
    with pytest.raises(ConfigError):
        parse_model(GeneratorSpec, {'attribute_laws': laws})
    with pytest.raises(ConfigError):
        parse_model(AttributeLaw, {'persistence': 1.0})

def test_pipeline_config_defaults():
    config = PipelineConfig()
    assert config.n_train == 5000
    assert config.n_test == 1000
    assert config.k == 3
    assert config.model == 'both'
    assert config.seed is None
    assert config.optim == OptimOptions()
    assert config.optim.max_iter == 500

@pytest.mark.parametrize('data, field', [
    ({'k': 4}, 'k'),
    ({'model': 'probit'}, 'model'),
    ({'n_train': 0}, 'n_train'),
    ({'seed': -1}, 'seed'),
    ({'optim': {'grad_tol': 0.0}}, 'optim.grad_tol')
])
def test_pipeline_config_errors_name_the_field(data, field):
    with pytest.raises(ConfigError) as info:
        parse_model(PipelineConfig, data)
    assert info.value.context['field'] == field

def test_load_config_file_and_overrides(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'n_train': 700, 'n_test': 300, 'model': 'ol', 'seed': 5}))
    config = load_config(str(path), {'model': 'mnl', 'seed': None})
    assert config.n_train == 700
    assert config.model == 'mnl'
    assert config.seed == 5

def test_load_config_errors(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{"n_train": 700,')
    with pytest.raises(ConfigError) as info:
        load_config(str(path))
    assert info.value.context['line'] == 1
    path.write_text('[1, 2]')
    with pytest.raises(ConfigError):
        load_config(str(path))
    with pytest.raises(DataError):
        load_config(str(tmp_path / 'missing.json'))

def test_model_template_persistence(tmp_path):
    model = Model(file_path=str(tmp_path / 'blank'), settings={'a': 1})
    assert model.file == os.path.join(str(tmp_path), 'blank.json')
    assert not model.can_load()
    model.instance = {'b': [1, 2]}
    model.save()
    assert model.can_load()
    model.instance = None
    model.load()
    assert model.instance == {'b': [1, 2]}
    assert not model.needs_load()
    model.delete()
    assert not model.can_load()
    assert model.instance is None
    assert model.settings == {'a': 1}
    assert model.input(None) is None
    assert model.output(None) is None
