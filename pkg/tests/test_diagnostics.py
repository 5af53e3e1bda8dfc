import logging

import numpy as np
import pytest

from numpy.testing import assert_allclose, assert_array_equal

from linkdcm.defaults import DEFAULT_REFERENCE_MNL, DEFAULT_REFERENCE_OL
from linkdcm.diagnostics import (
    ElasticityReport, confusion_matrix, direct_elasticity, hausman_iia, hausman_statistic, majority_baseline,
    predict_levels, rank_attributes)
from linkdcm.estimator import fit
from linkdcm.handlers import EstimationError, EvaluationError, SchemaError
from linkdcm.models import MnlParams, OlParams
from linkdcm.synthgen import generate, mnl_reference_spec

from conftest import fitted_from, moderate_mnl_spec

@pytest.fixture(scope='module')
def reference_frame():
    table, levels, frame = generate(mnl_reference_spec(n_links=40, n_steps=26, seed=2), return_frame=True)
    return frame

def test_confusion_matrix_counts():
    cm = confusion_matrix([1, 1, 1], [1, 2, 3])
    assert cm.counts.tolist() == [[1, 0, 0], [1, 0, 0], [1, 0, 0]]
    assert cm.overall_accuracy == pytest.approx(1.0 / 3.0)
    assert_allclose(cm.per_class_recall, [1.0, 0.0, 0.0])
    assert cm.per_class_precision[0] == pytest.approx(1.0 / 3.0)
    assert np.isnan(cm.per_class_precision[1:]).all()

def test_confusion_matrix_shares_and_frame():
    cm = confusion_matrix([1, 2, 3, 3, 2], [1, 2, 3, 2, 2])
    assert cm.counts.tolist() == [[1, 0, 0], [0, 2, 1], [0, 0, 1]]
    assert cm.overall_accuracy == pytest.approx(0.8)
    assert_allclose(cm.shares[1], [0.0, 2.0 / 3.0, 1.0 / 3.0])
    assert cm.to_frame().columns.tolist() == ['actual', 'predicted_1', 'predicted_2', 'predicted_3']
    assert cm.to_dict()['n'] == 5

def test_confusion_matrix_rejects_bad_input():
    with pytest.raises(EvaluationError):
        confusion_matrix([1, 2], [1, 2, 3])
    with pytest.raises(EvaluationError) as info:
        confusion_matrix([1, 0, 2], [1, 2, 3])
    assert info.value.context['position'] == 1

def test_majority_baseline():
    assert majority_baseline([1, 1, 2, 3]) == 0.5
    assert majority_baseline([3]) == 1.0

def test_predict_levels_ties_go_to_lower_level(random_frame):
    predicted = predict_levels(fitted_from('MNL', np.zeros(14), len(random_frame)), random_frame)
    assert_array_equal(predicted, 1)

def test_predict_levels_argmax(reference_frame):
    model = fitted_from('MNL', MnlParams(**DEFAULT_REFERENCE_MNL).to_vector())
    probabilities = model.predict_proba(reference_frame)
    assert_array_equal(predict_levels(model, reference_frame), probabilities.argmax(axis=1) + 1)

def test_mnl_elasticity_matches_finite_differences(reference_frame):
    assert len(reference_frame) == 1000
    model = fitted_from('MNL', MnlParams(**DEFAULT_REFERENCE_MNL).to_vector())
    for alternative in (2, 3):
        for attribute in ['link_speed', 'link_density_per_lane', 'free_flow_speed', 'number_of_lanes']:
            report = direct_elasticity(model, reference_frame, alternative, attribute)
            assert_allclose(report.fd_values, report.values, rtol=1e-5, atol=1e-9)

def test_mnl_elasticity_formula(reference_frame):
    model = fitted_from('MNL', MnlParams(**DEFAULT_REFERENCE_MNL).to_vector())
    report = direct_elasticity(model, reference_frame, 3, 'free_flow_speed')
    p3 = model.predict_proba(reference_frame)[:, 2]
    x = reference_frame.column('free_flow_speed')
    assert report.coefficient == 18.6
    assert_allclose(report.values, (1 - p3) * x * 18.6)
    assert report.summary['min'] <= report.summary['median'] <= report.summary['max']
    assert report.to_dict()['n'] == 1000

def test_mnl_low_level_has_no_coefficients(reference_frame, caplog):
    model = fitted_from('MNL', MnlParams(**DEFAULT_REFERENCE_MNL).to_vector())
    with caplog.at_level(logging.WARNING, logger='linkdcm.diagnostics'):
        report = direct_elasticity(model, reference_frame, 1, 'link_speed')
    assert report.coefficient == 0.0
    assert_array_equal(report.values, 0.0)
    assert 'no attribute coefficients' in caplog.text

def test_ol_elasticity_sign_by_level(reference_frame):
    params = OlParams.from_thresholds(DEFAULT_REFERENCE_OL['eta'], DEFAULT_REFERENCE_OL['mu1'], DEFAULT_REFERENCE_OL['mu2'])
    model = fitted_from('OL', params.to_vector())
    high = direct_elasticity(model, reference_frame, 3, 'link_speed')
    assert high.coefficient == 11.1
    assert_allclose(high.fd_values, high.values, rtol=1e-5, atol=1e-9)
    low = direct_elasticity(model, reference_frame, 1, 'link_speed')
    assert_allclose(low.fd_values, -low.values, rtol=1e-5, atol=1e-9)

def test_elasticity_rejects_bad_arguments(reference_frame):
    model = fitted_from('MNL', np.zeros(14))
    with pytest.raises(SchemaError):
        direct_elasticity(model, reference_frame, 3, 'ghg_er')
    with pytest.raises(EvaluationError):
        direct_elasticity(model, reference_frame, 4, 'link_speed')

def test_rank_attributes():
    reports = [
        ElasticityReport('MNL', 'a', 3, [0.1, -0.2, 0.3], [0.1, -0.2, 0.3], 1.0),
        ElasticityReport('MNL', 'b', 3, [-2.0, 1.0, 3.0], [-2.0, 1.0, 3.0], 1.0),
        ElasticityReport('MNL', 'c', 3, [0.5, 0.5, 0.5], [0.5, 0.5, 0.5], 1.0)
    ]
    ranking = rank_attributes(reports)
    assert [a for a, _ in ranking] == ['b', 'c', 'a']
    assert ranking[0][1] == 2.0

def test_hausman_statistic_known_value():
    statistic, dof, p_value = hausman_statistic([1.0, 2.0], [0.0, 0.0], np.diag([2.0, 3.0]), np.eye(2))
    assert statistic == pytest.approx(3.0)
    assert dof == 2
    assert p_value == pytest.approx(np.exp(-1.5))

def test_hausman_statistic_degenerate_difference():
    result = hausman_statistic([1.0, 2.0], [0.0, 0.0], np.eye(2), np.eye(2))
    assert not result.positive_definite
    assert result.dof == 0
    assert result.p_value == 1.0

def test_hausman_iia_rejects_bad_requests(random_frame):
    with pytest.raises(EvaluationError):
        hausman_iia(fitted_from('OL', np.zeros(8)), random_frame, 3)
    with pytest.raises(EvaluationError):
        hausman_iia(fitted_from('MNL', np.zeros(14)), random_frame, 1)

def test_hausman_iia_result(moderate_panel):
    frame = moderate_panel[3]
    full = fit('MNL', frame)
    result = hausman_iia(full, frame, 3)
    assert result.dof <= 7
    assert result.labels == [
        'ASC_Medium', 'Beta_Medium_LinkSpeed', 'Beta_Medium_Density', 'Beta_Medium_FreeSpeed',
        'Beta_Medium_NumLanes', 'Beta_Medium_PrevMedGHG', 'Beta_Medium_PrevHighGHG']
    assert result.n_restricted == int((frame.y != 3).sum())
    assert result.statistic >= 0.0
    assert 0.0 <= result.p_value <= 1.0
    assert result.to_dict()['test'] == 'Hausman-McFadden'

@pytest.mark.slow
def test_hausman_iia_size_under_true_mnl():
    rejections = 0
    tests = 0
    for seed in range(100):
        spec = moderate_mnl_spec(n_links=40, n_steps=51, seed=1000 + seed)
        table, levels, frame = generate(spec, return_frame=True)
        full = fit('MNL', frame)
        try:
            result = hausman_iia(full, frame, 3)
        except EstimationError:
            continue
        tests += 1
        rejections += result.p_value < 0.05
    assert tests >= 90
    assert 0.01 <= rejections / tests <= 0.12
