"""
Dynamic proportional-odds ordered logit with ``P(Y <= j) = logistic(mu_j - U)`` and ``U = eta . x``.

The 8 estimation parameters are ``(eta, mu1, delta)`` with ``mu2 = mu1 + exp(delta)``.
"""
import numpy as np

from scipy.special import expit, log_expit

from .defaults import *
from .handlers import *
from .models import OlParams, ProbabilityVector

N_PARAMS = len(DEFAULT_OL_LABELS)

def _theta(params):
    out = params.to_vector() if isinstance(params, OlParams) else np.asarray(params, dtype=float).ravel()
    if out.size != N_PARAMS:
        raise ConfigError(f'Expected {N_PARAMS} OL parameters, got {out.size}')
    return out

def log1mexp(d):
    """
    Get ``log(1 - exp(-d))`` for ``d > 0`` without cancellation.

    Parameters
    ----------
    d : array-like
        Positive values.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``log(1 - exp(-d))``.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.ordered_logit import log1mexp

        print(log1mexp([1e-12, 0.5, 40.0]))
    """
    d = np.asarray(d, dtype=float)
    out = np.where(d > np.log(2.0), np.log1p(-np.exp(-d)), np.log(-np.expm1(-np.minimum(d, np.log(2.0)))))
    return out

def log_class_prob_matrix(U, mu1, gap):
    """
    Get log class probabilities of every index value.

    Parameters
    ----------
    U : array-like
        Index values.
    mu1 : float
        Low/medium threshold.
    gap : float
        Positive distance ``mu2 - mu1``.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 3)`` log probabilities.
    """
    U = np.atleast_1d(np.asarray(U, dtype=float))
    b = mu1 - U
    a = b + gap
    out = np.empty((U.size, 3))
    out[:, 0] = log_expit(b)
    out[:, 1] = log_expit(a) + log_expit(-b) + log1mexp(gap)
    out[:, 2] = log_expit(-a)
    return out

def class_prob_matrix(U, mu1, gap):
    """Get class probabilities of every index value, see :func:`log_class_prob_matrix`."""
    out = np.exp(log_class_prob_matrix(U, mu1, gap))
    return out

def index(theta, X):
    """Get the index ``U = X @ eta`` of every row."""
    theta = _theta(theta)
    out = np.atleast_2d(np.asarray(X, dtype=float)) @ theta[:6]
    return out

def log_probability_matrix(theta, X):
    """Get ``(n, 3)`` log class probabilities for parameters ``(eta, mu1, delta)``."""
    theta = _theta(theta)
    out = log_class_prob_matrix(index(theta, X), theta[6], np.exp(theta[7]))
    return out

def probability_matrix(theta, X):
    """Get ``(n, 3)`` class probabilities for parameters ``(eta, mu1, delta)``."""
    out = np.exp(log_probability_matrix(theta, X))
    return out

def ol_index(params, row):
    """
    Get the single index of one row.

    Parameters
    ----------
    params : :class:`linkdcm.models.OlParams`
        Parameters.
    row : dict or :class:`pandas:pandas.Series` or array-like
        Row with the six model attributes, by name or in attribute order.

    Returns
    -------
    float
        ``eta . x``.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.models import OlParams
        from linkdcm.ordered_logit import ol_index

        params = OlParams(eta=[1, 0, 0, 0, 0, 0])
        print(ol_index(params, [0.5, 0, 0, 0, 0, 0]))
    """
    if hasattr(row, 'keys') and not isinstance(row, np.ndarray):
        row = [row[k] for k in DEFAULT_DESIGN_COLUMNS]
    x = np.asarray(row, dtype=float).ravel()
    if x.size != len(DEFAULT_DESIGN_COLUMNS) or not np.isfinite(x).all():
        raise DataError(f'Expected {len(DEFAULT_DESIGN_COLUMNS)} finite attributes')
    out = float(x @ np.asarray(params.eta, dtype=float))
    return out

def ol_class_probs(U, mu1, mu2):
    """
    Get the class probabilities of one index value.

    Parameters
    ----------
    U : float
        Index value.
    mu1 : float
        Low/medium threshold.
    mu2 : float
        Medium/high threshold, strictly above ``mu1``.

    Returns
    -------
    :class:`linkdcm.models.ProbabilityVector`
        ``p1 = F1``, ``p2 = F2 - F1`` and ``p3 = 1 - F2`` with ``Fj = logistic(mu_j - U)``.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.ordered_logit import ol_class_probs

        print(ol_class_probs(1.0, 0.5, 2.0))
    """
    if not mu1 < mu2:
        raise DataError(f'Thresholds must be increasing, got ({mu1}, {mu2})', mu1=mu1, mu2=mu2)
    p = class_prob_matrix([U], mu1, mu2 - mu1)[0]
    out = ProbabilityVector(p1=p[0], p2=p[1], p3=p[2])
    return out

def row_log_likelihood(theta, X, y):
    """Get the log probability of the chosen level of every row."""
    y = np.asarray(y, dtype=np.int64)
    out = log_probability_matrix(theta, X)[np.arange(y.size), y - 1]
    return out

def _logistic_log_pdf(z):
    return log_expit(z) + log_expit(-z)

def row_scores(theta, X, y):
    """
    Get the score contribution of every row.

    Parameters
    ----------
    theta : array-like
        Parameters ``(eta, mu1, delta)``.
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.
    y : :class:`numpy:numpy.ndarray`
        Chosen levels.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 8)`` contributions, chained through ``mu2 = mu1 + exp(delta)``.
    """
    theta = _theta(theta)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=np.int64)
    gap = np.exp(theta[7])
    b = theta[6] - X @ theta[:6]
    a = b + gap

    d_index = np.zeros(y.size)
    d_mu1 = np.zeros(y.size)
    d_mu2 = np.zeros(y.size)

    low = y == 1
    d_index[low] = -expit(-b[low])
    d_mu1[low] = expit(-b[low])

    high = y == 3
    d_index[high] = expit(a[high])
    d_mu2[high] = -expit(a[high])

    # Middle level: ratios of logistic densities to p2, in log space
    middle = y == 2
    log_p2 = log_expit(a[middle]) + log_expit(-b[middle]) + log1mexp(gap)
    g_a = np.exp(_logistic_log_pdf(a[middle]) - log_p2)
    g_b = np.exp(_logistic_log_pdf(b[middle]) - log_p2)
    d_index[middle] = -(g_a - g_b)
    d_mu2[middle] = g_a
    d_mu1[middle] = -g_b

    out = np.empty((y.size, N_PARAMS))
    out[:, :6] = d_index[:, None] * X
    out[:, 6] = d_mu1 + d_mu2
    out[:, 7] = d_mu2 * gap
    return out

def hessian(theta, X, y, step=1e-6):
    """
    Get the Hessian of the log-likelihood by central differences of the analytic score.

    Parameters
    ----------
    theta : array-like
        Parameters ``(eta, mu1, delta)``.
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.
    y : :class:`numpy:numpy.ndarray`
        Chosen levels.
    step : float
        Relative step.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        Symmetric ``(8, 8)`` matrix.
    """
    theta = _theta(theta)
    out = np.empty((N_PARAMS, N_PARAMS))
    for i in range(N_PARAMS):
        h = step * max(1.0, abs(theta[i]))
        up = theta.copy()
        down = theta.copy()
        up[i] += h
        down[i] -= h
        out[:, i] = (row_scores(up, X, y).sum(axis=0) - row_scores(down, X, y).sum(axis=0)) / (2.0 * h)
    out = (out + out.T) / 2.0
    return out

def _frame_arrays(frame):
    DataHandler().handle_not_empty(len(frame), 'frame')
    return frame.X, frame.y

def ol_log_likelihood(params, frame):
    """
    Get the log-likelihood of a frame.

    Parameters
    ----------
    params : :class:`linkdcm.models.OlParams` or array-like
        Parameters.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Non-empty frame.

    Returns
    -------
    float
        Sum over rows of the log probability of the chosen level.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.models import OlParams
        from linkdcm.ordered_logit import ol_log_likelihood
        from linkdcm.synthgen import generate, ol_reference_spec

        spec = ol_reference_spec(n_links=5, n_steps=6)
        table, levels, frame = generate(spec, return_frame=True)
        print(ol_log_likelihood(spec.truth, frame))
        print(ol_log_likelihood(OlParams.from_thresholds([0] * 6, -1.0, 1.0), frame))
    """
    X, y = _frame_arrays(frame)
    out = float(np.sum(row_log_likelihood(params, X, y)))
    return out

def ol_score(params, frame):
    """
    Get the analytic gradient of :func:`ol_log_likelihood` with respect to ``(eta, mu1, delta)``.

    Parameters
    ----------
    params : :class:`linkdcm.models.OlParams` or array-like
        Parameters.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Non-empty frame.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        8 gradient components.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.ordered_logit import ol_score
        from linkdcm.synthgen import generate, ol_reference_spec

        spec = ol_reference_spec(n_links=5, n_steps=6)
        table, levels, frame = generate(spec, return_frame=True)
        print(ol_score(spec.truth, frame).round(3))
    """
    X, y = _frame_arrays(frame)
    out = row_scores(params, X, y).sum(axis=0)
    return out
