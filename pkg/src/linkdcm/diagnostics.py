import logging

import numpy as np
import pandas as pd

from scipy.special import log_expit, logsumexp
from scipy.stats import chi2

from . import mnl, ordered_logit
from .defaults import *
from .estimator import MnlObjective, covariance_pair, maximize
from .handlers import *
from .models import OptimOptions, parse_model
from .tools import five_number_summary

logger = logging.getLogger(__name__)

class ConfusionMatrix:
    """
    Counts of actual (rows) against predicted (columns) levels.

    Attributes
    ----------
    counts : :class:`numpy:numpy.ndarray`
        ``(3, 3)`` integer counts.
    overall_accuracy : float
        ``trace / sum``.
    per_class_recall : :class:`numpy:numpy.ndarray`
        Diagonal over row sums, ``NaN`` for levels that never occur.
    per_class_precision : :class:`numpy:numpy.ndarray`
        Diagonal over column sums, ``NaN`` for levels never predicted.
    shares : :class:`numpy:numpy.ndarray`
        Row-normalized counts.
    """
    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=np.int64)
        total = int(self.counts.sum())
        diagonal = np.diag(self.counts).astype(float)
        rows = self.counts.sum(axis=1).astype(float)
        columns = self.counts.sum(axis=0).astype(float)
        with np.errstate(divide='ignore', invalid='ignore'):
            self.overall_accuracy = float(diagonal.sum() / total) if total else float('nan')
            self.per_class_recall = np.where(rows > 0, diagonal / rows, np.nan)
            self.per_class_precision = np.where(columns > 0, diagonal / columns, np.nan)
            self.shares = np.where(rows[:, None] > 0, self.counts / rows[:, None], np.nan)

    @property
    def n(self):
        return int(self.counts.sum())

    def to_frame(self):
        """
        Get the counts as a dataframe.

        Returns
        -------
        :class:`pandas:pandas.DataFrame`
            Column ``actual`` then one column per predicted level.
        """
        out = pd.DataFrame(self.counts, columns=[f'predicted_{k}' for k in DEFAULT_LEVELS])
        out.insert(0, 'actual', list(DEFAULT_LEVELS))
        return out

    def to_dict(self):
        out = {
            'counts': self.counts.tolist(),
            'n': self.n,
            'overall_accuracy': self.overall_accuracy,
            'per_class_recall': self.per_class_recall.tolist(),
            'per_class_precision': self.per_class_precision.tolist(),
            'shares': self.shares.tolist()
        }
        return out

class ElasticityReport:
    """
    Direct elasticities of one attribute on one level's probability.

    Attributes
    ----------
    kind : str
        Model kind.
    attribute : str
        Attribute name.
    alternative : int
        Target level.
    values : :class:`numpy:numpy.ndarray`
        Per-row elasticities ``(1 - P) x beta``.
    fd_values : :class:`numpy:numpy.ndarray`
        Per-row finite-difference point elasticities of the same probability.
    coefficient : float
        Coefficient used as ``beta``.
    summary : dict
        Five-number summary of ``values``.
    fd_summary : dict
        Five-number summary of ``fd_values``.
    """
    def __init__(self, kind, attribute, alternative, values, fd_values, coefficient):
        self.kind = kind
        self.attribute = attribute
        self.alternative = int(alternative)
        self.values = np.asarray(values, dtype=float)
        self.fd_values = np.asarray(fd_values, dtype=float)
        self.coefficient = float(coefficient)
        self.summary = five_number_summary(self.values)
        self.fd_summary = five_number_summary(self.fd_values)

    @property
    def median_abs(self):
        """Median absolute elasticity."""
        return float(np.median(np.abs(self.values))) if self.values.size else float('nan')

    def to_dict(self):
        out = {
            'kind': self.kind,
            'attribute': self.attribute,
            'alternative': self.alternative,
            'coefficient': self.coefficient,
            'n': int(self.values.size),
            'summary': self.summary,
            'fd_summary': self.fd_summary,
            'median_abs': self.median_abs
        }
        return out

class IiaResult:
    """
    Result of :func:`hausman_iia`. Unpacks as ``(statistic, dof, p_value)``.

    Attributes
    ----------
    statistic : float
        Hausman statistic.
    dof : int
        Degrees of freedom.
    p_value : float
        Chi-square tail probability.
    positive_definite : bool
        Whether the covariance difference was positive definite; a generalized inverse was used otherwise.
    dropped_alternative : int
        Level removed from the choice set.
    n_restricted : int
        Rows in the restricted sample.
    labels : list(str)
        Compared parameters.
    """
    test = 'Hausman-McFadden'

    def __init__(self, statistic, dof, p_value, positive_definite, dropped_alternative=None, n_restricted=None, labels=None):
        self.statistic = float(statistic)
        self.dof = int(dof)
        self.p_value = float(p_value)
        self.positive_definite = bool(positive_definite)
        self.dropped_alternative = dropped_alternative
        self.n_restricted = n_restricted
        self.labels = list(labels or [])

    def __iter__(self):
        return iter((self.statistic, self.dof, self.p_value))

    def to_dict(self):
        out = {
            'test': self.test,
            'dropped_alternative': self.dropped_alternative,
            'statistic': self.statistic,
            'dof': self.dof,
            'p_value': self.p_value,
            'positive_definite': self.positive_definite,
            'n_restricted': self.n_restricted,
            'parameters': self.labels
        }
        return out

def predict_levels(model, frame):
    """
    Predict the most probable level of every row.

    Ties go to the lower level.

    Parameters
    ----------
    model : :class:`linkdcm.estimator.FittedModel`
        Fitted model. A warning is logged when it did not converge.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Frame to predict.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        Levels in ``{1, 2, 3}``.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.diagnostics import predict_levels
        from linkdcm.estimator import fit
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=20, seed=1), return_frame=True)
        fitted = fit('MNL', frame)
        print(predict_levels(fitted, frame)[:10], frame.y[:10])
    """
    if not model.converged:
        logger.warning('Predicting with a %s model that did not converge', model.kind)
    out = np.argmax(model.predict_proba(frame), axis=1) + 1
    return out

def confusion_matrix(predicted, actual):
    """
    Count actual against predicted levels.

    Parameters
    ----------
    predicted : array-like
        Predicted levels.
    actual : array-like
        Actual levels, same length.

    Returns
    -------
    :class:`ConfusionMatrix`
        Counts with accuracy, recall and precision.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.diagnostics import confusion_matrix

        cm = confusion_matrix([1, 1, 1], [1, 2, 3])
        print(cm.counts, cm.overall_accuracy)
    """
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    handler = EvaluationHandler()
    handler.handle_lengths(predicted, actual)
    handler.handle_levels(predicted, 'predicted')
    handler.handle_levels(actual, 'actual')
    counts = np.zeros((3, 3), dtype=np.int64)
    np.add.at(counts, (actual.astype(np.int64) - 1, predicted.astype(np.int64) - 1), 1)
    out = ConfusionMatrix(counts)
    return out

def majority_baseline(actual):
    """
    Get the accuracy of always predicting the most frequent level.

    Parameters
    ----------
    actual : array-like
        Actual levels.

    Returns
    -------
    float
        Share of the most frequent level.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.diagnostics import majority_baseline

        print(majority_baseline([1, 2, 2, 3, 2]))
    """
    actual = np.asarray(actual, dtype=np.int64)
    DataHandler().handle_not_empty(actual.size, 'levels')
    out = float(np.bincount(actual, minlength=4).max() / actual.size)
    return out

def direct_elasticity(model, frame, alternative=DEFAULT_ELASTICITY_ALTERNATIVE, attribute='link_speed', step=DEFAULT_ELASTICITY_STEP):
    """
    Get direct elasticities of one level's probability with respect to one attribute.

    Every row gets ``E = (1 - P(i)) x beta``. For MNL ``beta`` is the attribute's coefficient in level ``i``'s utility (0 for the low level, which has no coefficients); for OL it is the index coefficient ``eta``. A central finite-difference point elasticity is computed alongside: for MNL only level ``i``'s utility term ``beta x`` is perturbed, which reproduces ``E``; for OL the attribute itself is perturbed in the single index.

    Parameters
    ----------
    model : :class:`linkdcm.estimator.FittedModel`
        Fitted model.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Rows to evaluate.
    alternative : int
        Target level.
    attribute : str
        One of the six model attributes.
    step : float
        Relative perturbation of the attribute.

    Returns
    -------
    :class:`ElasticityReport`
        Per-row values and five-number summaries.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.diagnostics import direct_elasticity
        from linkdcm.estimator import fit
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=20, seed=1), return_frame=True)
        report = direct_elasticity(fit('MNL', frame), frame, 3, 'free_flow_speed')
        print(report.summary)
    """
    handler = EvaluationHandler()
    handler.handle_attribute(attribute)
    handler.handle_alternative(alternative)
    k = DEFAULT_DESIGN_COLUMNS.index(attribute)
    theta = model.estimates
    X = frame.X
    if model.kind == 'MNL':
        position = {1: None, 2: 2 + k, 3: 8 + k}[alternative]
        if position is None:
            logger.warning('The low level utility has no attribute coefficients, elasticities are 0')
        coefficient = 0.0 if position is None else float(theta[position])
    else:
        position = k
        coefficient = float(theta[k])
    probability = model.predict_proba(frame)[:, alternative - 1]
    values = (1.0 - probability) * X[:, k] * coefficient

    # (direct_elasticity_fd) Central difference of log P(i) in log x
    if model.kind == 'MNL':
        V = mnl.utility_matrix(theta, X)
        others = logsumexp(np.delete(V, alternative - 1, axis=1), axis=1)
        target = V[:, alternative - 1]
        shift = coefficient * X[:, k] * step
        fd_values = (log_expit(target + shift - others) - log_expit(target - shift - others)) / (2.0 * step)
    else:
        up = np.array(X)
        down = np.array(X)
        up[:, k] = X[:, k] * (1.0 + step)
        down[:, k] = X[:, k] * (1.0 - step)
        fd_values = (
            ordered_logit.log_probability_matrix(theta, up)[:, alternative - 1]
            - ordered_logit.log_probability_matrix(theta, down)[:, alternative - 1]) / (2.0 * step)
    out = ElasticityReport(model.kind, attribute, alternative, values, fd_values, coefficient)
    return out

def rank_attributes(reports):
    """
    Order attributes by median absolute elasticity.

    Parameters
    ----------
    reports : list(:class:`ElasticityReport`)
        Reports to rank.

    Returns
    -------
    list(tuple)
        ``(attribute, median_abs)`` pairs, largest first.
    """
    pairs = [(r.attribute, r.median_abs) for r in reports]
    out = sorted(pairs, key=lambda pair: -pair[1])
    return out

def hausman_statistic(theta_r, theta_f, cov_r, cov_f, rtol=DEFAULT_SINGULAR_RTOL):
    """
    Get the Hausman statistic of two estimates of the same parameters.

    Parameters
    ----------
    theta_r : array-like
        Efficient-under-the-alternative (restricted) estimates.
    theta_f : array-like
        Full-model estimates.
    cov_r : array-like
        Covariance of ``theta_r``.
    cov_f : array-like
        Covariance of ``theta_f``.
    rtol : float
        Relative eigenvalue tolerance of the covariance difference.

    Returns
    -------
    :class:`IiaResult`
        Statistic over the positive eigenspace of ``cov_r - cov_f``; ``positive_definite`` is false when some eigenvalues were dropped.

    Example
    -------
    .. jupyter-execute::

        import numpy as np
        from linkdcm.diagnostics import hausman_statistic

        result = hausman_statistic([1.2, 0.4], [1.0, 0.5], np.diag([0.05, 0.04]), np.diag([0.01, 0.02]))
        print(result.statistic, result.dof, result.p_value)
    """
    d = np.asarray(theta_r, dtype=float) - np.asarray(theta_f, dtype=float)
    difference = np.asarray(cov_r, dtype=float) - np.asarray(cov_f, dtype=float)
    difference = (difference + difference.T) / 2.0
    values, vectors = np.linalg.eigh(difference)
    cutoff = rtol * max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    positive = values > cutoff
    positive_definite = bool(positive.all())
    if not positive_definite:
        logger.warning('Hausman covariance difference is not positive definite, using %d of %d directions', int(positive.sum()), d.size)
    projected = vectors[:, positive].T @ d
    statistic = float(np.sum(projected ** 2 / values[positive]))
    dof = int(positive.sum())
    p_value = float(chi2.sf(statistic, dof)) if dof > 0 else 1.0
    out = IiaResult(statistic, dof, p_value, positive_definite)
    return out

def hausman_iia(full, frame, dropped_alternative, options=None):
    """
    Test independence of irrelevant alternatives by dropping one level.

    The MNL is refitted on the rows that did not choose the dropped level, with that level unavailable. Dropping level 2 compares ``(ASC_Low, Beta_High_*)``; dropping level 3 fixes ``ASC_Low`` at 0 and compares ``ASC_Medium - ASC_Low`` and ``Beta_Medium_*``. Classical covariances are used for both fits.

    Parameters
    ----------
    full : :class:`linkdcm.estimator.FittedModel`
        MNL fitted on ``frame``.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Estimation frame of ``full``.
    dropped_alternative : int
        Level to drop, 2 or 3.
    options : :class:`linkdcm.models.OptimOptions` or dict or None
        Optimizer options of the restricted fit.

    Returns
    -------
    :class:`IiaResult`
        Hausman-McFadden statistic, degrees of freedom and p-value.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.diagnostics import hausman_iia
        from linkdcm.estimator import fit
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=40, seed=2), return_frame=True)
        full = fit('MNL', frame)
        for dropped in (2, 3):
            result = hausman_iia(full, frame, dropped)
            print(dropped, result.statistic, result.dof, result.p_value)
    """
    handler = EvaluationHandler()
    handler.handle_kind(full.kind, ('MNL',))
    if dropped_alternative == 1:
        raise EvaluationError('The low level is the base alternative and cannot be dropped', alternative=1)
    handler.handle_alternative(dropped_alternative, (2, 3))

    # (hausman_iia_contrast) Compared parameters and their full-model values
    n_params = len(DEFAULT_MNL_LABELS)
    contrast = np.zeros((7, n_params))
    if dropped_alternative == 2:
        free = np.array([0] + list(range(8, 14)))
        contrast[np.arange(7), free] = 1.0
    else:
        free = np.array([1] + list(range(2, 8)))
        contrast[0, 0] = -1.0
        contrast[np.arange(7), free] = 1.0
    theta_f = contrast @ full.estimates
    cov_f = contrast @ full.classical_covariance @ contrast.T

    # (hausman_iia_restricted) Refit on the restricted choice set
    keep = np.flatnonzero(frame.y != dropped_alternative)
    restricted = frame.take(keep)
    available = np.array([k != dropped_alternative for k in DEFAULT_LEVELS])
    model = MnlObjective(restricted, available=available, free=free)
    options = parse_model(OptimOptions, options).model_copy(update={'init': theta_f.tolist()})
    result = maximize(model, options)
    if not result.converged:
        raise EstimationError(f'Restricted fit without level {dropped_alternative} did not converge', dropped_alternative=dropped_alternative)
    cov_r = covariance_pair(model, result.x[free])[1]

    out = hausman_statistic(result.x[free], theta_f, cov_r, cov_f)
    out.dropped_alternative = int(dropped_alternative)
    out.n_restricted = len(restricted)
    out.labels = [DEFAULT_MNL_LABELS[i] for i in free]
    logger.info('IIA without level %d: statistic=%.4f, dof=%d, p=%.4f', dropped_alternative, out.statistic, out.dof, out.p_value)
    return out
