"""
Dynamic multinomial logit over the low, medium and high emission levels.

The 14 parameters are ordered as :data:`linkdcm.defaults.DEFAULT_MNL_LABELS`. Vectorized functions work on a
parameter vector ``theta``, a design matrix ``X`` of shape ``(n, 6)`` and levels ``y`` in ``{1, 2, 3}``; the
row-level functions take :class:`linkdcm.models.MnlParams`.
"""
import numpy as np

from .defaults import *
from .handlers import *
from .models import MnlParams, ProbabilityVector, UtilityVector

N_PARAMS = len(DEFAULT_MNL_LABELS)

def _theta(params):
    out = params.to_vector() if isinstance(params, MnlParams) else np.asarray(params, dtype=float).ravel()
    if out.size != N_PARAMS:
        raise ConfigError(f'Expected {N_PARAMS} MNL parameters, got {out.size}')
    return out

def _row_vector(row):
    if hasattr(row, 'keys') and not isinstance(row, np.ndarray):
        values = [row[k] for k in DEFAULT_DESIGN_COLUMNS]
    else:
        values = row
    out = np.asarray(values, dtype=float).ravel()
    if out.size != len(DEFAULT_DESIGN_COLUMNS):
        raise DataError(f'Expected {len(DEFAULT_DESIGN_COLUMNS)} attributes, got {out.size}')
    if not np.isfinite(out).all():
        raise DataError('Row attributes must be finite')
    return out

def alternative_design(X):
    """
    Get the alternative-specific design of every row.

    Parameters
    ----------
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 3, 14)`` array ``Z`` such that the utilities are ``Z @ theta``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    out = np.zeros((n, 3, N_PARAMS))
    out[:, 0, 0] = 1.0
    out[:, 1, 1] = 1.0
    out[:, 1, 2:8] = X
    out[:, 2, 8:14] = X
    return out

def utility_matrix(theta, X, available=None):
    """
    Get the systematic utilities of every row.

    Parameters
    ----------
    theta : array-like or :class:`linkdcm.models.MnlParams`
        Parameters.
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.
    available : array-like of bool or None
        Availability of the three levels; unavailable levels get ``-inf`` utility.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 3)`` utilities.
    """
    theta = _theta(theta)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty((X.shape[0], 3))
    out[:, 0] = theta[0]
    out[:, 1] = theta[1] + X @ theta[2:8]
    out[:, 2] = X @ theta[8:14]
    if available is not None:
        out[:, ~np.asarray(available, dtype=bool)] = -np.inf
    return out

def log_probability_matrix(V):
    """
    Get log choice probabilities with a max-shifted log-sum-exp.

    Parameters
    ----------
    V : :class:`numpy:numpy.ndarray`
        ``(n, 3)`` utilities; ``-inf`` marks an unavailable level.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 3)`` log probabilities.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    top = np.argmax(V, axis=1)
    rows = np.arange(V.shape[0])
    shifted = V - V[rows, top][:, None]
    others = np.exp(shifted)
    others[rows, top] = 0.0
    out = shifted - np.log1p(others.sum(axis=1))[:, None]
    return out

def probability_matrix(V):
    """
    Get choice probabilities of every row.

    Parameters
    ----------
    V : :class:`numpy:numpy.ndarray`
        ``(n, 3)`` utilities.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 3)`` probabilities, each row summing to 1.
    """
    out = np.exp(log_probability_matrix(V))
    return out

def utilities(params, row):
    """
    Get the systematic utilities of one row.

    Parameters
    ----------
    params : :class:`linkdcm.models.MnlParams`
        Parameters.
    row : dict or :class:`pandas:pandas.Series` or array-like
        Row with the six model attributes, by name or in attribute order.

    Returns
    -------
    :class:`linkdcm.models.UtilityVector`
        Low, medium and high utilities.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.mnl import utilities
        from linkdcm.models import MnlParams

        params = MnlParams(asc_low=22.0, asc_medium=11.8)
        print(utilities(params, [1, 1, 1, 1, 0, 0]))
    """
    v = utility_matrix(params, _row_vector(row)[None, :])[0]
    out = UtilityVector(v1=v[0], v2=v[1], v3=v[2])
    return out

def choice_probabilities(v):
    """
    Get the choice probabilities of one utility vector.

    Parameters
    ----------
    v : :class:`linkdcm.models.UtilityVector` or array-like
        Finite utilities.

    Returns
    -------
    :class:`linkdcm.models.ProbabilityVector`
        Softmax of the utilities.

    Example
    -------
    .. jupyter-execute::

        import math
        from linkdcm.mnl import choice_probabilities

        print(choice_probabilities([math.log(2), 0, 0]))
    """
    v = v.as_array() if isinstance(v, UtilityVector) else np.asarray(v, dtype=float).ravel()
    if v.size != 3 or not np.isfinite(v).all():
        raise DataError(f'Utilities must be 3 finite values, got {v.tolist()}')
    p = probability_matrix(v[None, :])[0]
    out = ProbabilityVector(p1=p[0], p2=p[1], p3=p[2])
    return out

def row_log_likelihood(theta, X, y, available=None):
    """Get the log probability of the chosen level of every row."""
    y = np.asarray(y, dtype=np.int64)
    logp = log_probability_matrix(utility_matrix(theta, X, available))
    out = logp[np.arange(y.size), y - 1]
    return out

def row_scores(theta, X, y, available=None):
    """
    Get the score contribution of every row.

    Parameters
    ----------
    theta : array-like
        Parameters.
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.
    y : :class:`numpy:numpy.ndarray`
        Chosen levels.
    available : array-like of bool or None
        Availability of the three levels.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(n, 14)`` contributions ``sum_j (1{y=j} - p_j) z_j``.
    """
    y = np.asarray(y, dtype=np.int64)
    Z = alternative_design(X)
    P = probability_matrix(utility_matrix(theta, X, available))
    residual = -P
    residual[np.arange(y.size), y - 1] += 1.0
    out = np.einsum('nj,nja->na', residual, Z)
    return out

def hessian(theta, X, available=None):
    """
    Get the analytic Hessian of the log-likelihood.

    Parameters
    ----------
    theta : array-like
        Parameters.
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.
    available : array-like of bool or None
        Availability of the three levels.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        ``(14, 14)`` negative semidefinite matrix ``-sum_n Z_n' (diag p_n - p_n p_n') Z_n``.
    """
    Z = alternative_design(X)
    P = probability_matrix(utility_matrix(theta, X, available))
    second = np.einsum('nj,nja,njb->ab', P, Z, Z)
    mean = np.einsum('nj,nja->na', P, Z)
    out = -(second - mean.T @ mean)
    out = (out + out.T) / 2.0
    return out

def _frame_arrays(frame):
    DataHandler().handle_not_empty(len(frame), 'frame')
    return frame.X, frame.y

def log_likelihood(params, frame, available=None):
    """
    Get the log-likelihood of a frame.

    Parameters
    ----------
    params : :class:`linkdcm.models.MnlParams` or array-like
        Parameters.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Non-empty frame.
    available : array-like of bool or None
        Availability of the three levels.

    Returns
    -------
    float
        Sum over rows of the log probability of the chosen level, always at most 0.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.mnl import log_likelihood
        from linkdcm.models import MnlParams
        from linkdcm.synthgen import generate, uniform_spec

        table, levels, frame = generate(uniform_spec(n_links=5, n_steps=4), return_frame=True)

        # Equal shares at zero parameters: -N log 3
        print(log_likelihood(MnlParams(), frame), len(frame))
    """
    X, y = _frame_arrays(frame)
    out = float(np.sum(row_log_likelihood(params, X, y, available)))
    return out

def score(params, frame, available=None):
    """
    Get the analytic gradient of :func:`log_likelihood`.

    Parameters
    ----------
    params : :class:`linkdcm.models.MnlParams` or array-like
        Parameters.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Non-empty frame.
    available : array-like of bool or None
        Availability of the three levels.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        14 gradient components in parameter order.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.defaults import DEFAULT_MNL_LABELS
        from linkdcm.mnl import score
        from linkdcm.models import MnlParams
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=5, n_steps=6), return_frame=True)
        print(dict(zip(DEFAULT_MNL_LABELS, score(MnlParams(), frame).round(3))))
    """
    X, y = _frame_arrays(frame)
    out = row_scores(params, X, y, available).sum(axis=0)
    return out
