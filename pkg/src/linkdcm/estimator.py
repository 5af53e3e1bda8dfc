import logging

import numpy as np
import pandas as pd

from scipy.optimize import minimize
from scipy.stats import norm

from . import mnl, ordered_logit
from .defaults import *
from .handlers import *
from .models import Model, MnlParams, OlParams, OptimOptions, parse_model
from .tools import from_jsonable, get_rng, to_jsonable

logger = logging.getLogger(__name__)

KINDS = ('MNL', 'OL')

class Objective:
    """
    Log-likelihood of a model bound to a frame, optionally with some parameters held fixed.

    Parameters
    ----------
    frame : :class:`linkdcm.ingest.ModelFrame`
        Non-empty estimation frame.
    free : array-like of int or None
        Positions of the estimated parameters; all when ``None``.
    fixed : array-like or None
        Full parameter vector supplying the values of the non-free positions; zeros when ``None``.

    Attributes
    ----------
    kind : str
        ``MNL`` or ``OL``.
    labels : list(str)
        Labels of the full parameter vector.
    required_levels : tuple(int)
        Levels that must occur in the frame.
    """
    kind = None
    labels = []
    required_levels = DEFAULT_LEVELS

    def __init__(self, frame, free=None, fixed=None):
        DataHandler().handle_not_empty(len(frame), 'frame')
        self.frame = frame
        self.X = frame.X
        self.y = frame.y
        n_params = len(self.labels)
        self.free = np.arange(n_params) if free is None else np.asarray(free, dtype=np.int64)
        self.fixed = np.zeros(n_params) if fixed is None else np.asarray(fixed, dtype=float).copy()

    @property
    def n(self):
        return len(self.y)

    @property
    def free_labels(self):
        return [self.labels[i] for i in self.free]

    def expand(self, theta):
        """Get the full parameter vector from the free parameters."""
        out = self.fixed.copy()
        out[self.free] = theta
        return out

    def loglik(self, theta):
        """Get the log-likelihood at the free parameters."""
        out = float(np.sum(self._row_loglik(self.expand(theta))))
        return out

    def row_scores(self, theta):
        """Get the ``(n, n_free)`` per-row score contributions."""
        out = self._row_scores(self.expand(theta))[:, self.free]
        return out

    def score(self, theta):
        """Get the gradient with respect to the free parameters."""
        out = self.row_scores(theta).sum(axis=0)
        return out

    def hessian(self, theta):
        """Get the Hessian with respect to the free parameters."""
        out = self._hessian(self.expand(theta))[np.ix_(self.free, self.free)]
        return out

class MnlObjective(Objective):
    """
    Multinomial logit objective, with an optional restricted choice set.

    Parameters
    ----------
    frame : :class:`linkdcm.ingest.ModelFrame`
        Non-empty estimation frame. Every chosen level must be available.
    available : array-like of bool or None
        Availability of the three levels; all available when ``None``.
    free : array-like of int or None
        Positions of the estimated parameters.
    fixed : array-like or None
        Values of the non-free positions.
    """
    kind = 'MNL'
    labels = DEFAULT_MNL_LABELS

    def __init__(self, frame, available=None, free=None, fixed=None):
        super().__init__(frame, free, fixed)
        self.available = None if available is None else np.asarray(available, dtype=bool)
        if self.available is not None:
            self.required_levels = tuple(k for k, a in zip(DEFAULT_LEVELS, self.available) if a)
            unavailable = ~np.isin(self.y, self.required_levels)
            if unavailable.any():
                raise DataError('Frame holds choices of unavailable levels', n_rows=int(unavailable.sum()))

    def _row_loglik(self, theta):
        return mnl.row_log_likelihood(theta, self.X, self.y, self.available)

    def _row_scores(self, theta):
        return mnl.row_scores(theta, self.X, self.y, self.available)

    def _hessian(self, theta):
        return mnl.hessian(theta, self.X, self.available)

class OlObjective(Objective):
    """Ordered logit objective over ``(eta, mu1, delta)``."""
    kind = 'OL'
    labels = DEFAULT_OL_LABELS

    def _row_loglik(self, theta):
        return ordered_logit.row_log_likelihood(theta, self.X, self.y)

    def _row_scores(self, theta):
        return ordered_logit.row_scores(theta, self.X, self.y)

    def _hessian(self, theta):
        return ordered_logit.hessian(theta, self.X, self.y)

def make_objective(kind, frame, **kwargs):
    """
    Get the objective of a model kind bound to a frame.

    Parameters
    ----------
    kind : str
        ``MNL`` or ``OL`` (case insensitive).
    frame : :class:`linkdcm.ingest.ModelFrame`
        Estimation frame.
    **kwargs
        Passed to the objective class.

    Returns
    -------
    :class:`Objective`
        Bound objective.
    """
    kind = str(kind).upper()
    if kind not in KINDS:
        raise ConfigError(f'Unknown model kind: {kind}', kind=kind)
    out = MnlObjective(frame, **kwargs) if kind == 'MNL' else OlObjective(frame, **kwargs)
    return out

def probability_matrix(kind, theta, X):
    """
    Get ``(n, 3)`` level probabilities of a model kind.

    Parameters
    ----------
    kind : str
        ``MNL`` or ``OL``.
    theta : array-like
        Estimation parameters.
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` attributes.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        Probabilities per row.
    """
    if kind == 'MNL':
        out = mnl.probability_matrix(mnl.utility_matrix(theta, X))
    else:
        out = ordered_logit.probability_matrix(theta, X)
    return out

class OptimResult:
    """
    Result of :func:`maximize`.

    Attributes
    ----------
    x : :class:`numpy:numpy.ndarray`
        Full parameter vector at the end of the search.
    ll : float
        Log-likelihood at ``x``.
    score : :class:`numpy:numpy.ndarray`
        Gradient of the free parameters at ``x``.
    iterations : int
        Quasi-Newton plus Newton polishing iterations.
    n_evaluations : int
        Objective evaluations.
    converged : bool
        Whether the score or step criterion was met.
    message : str
        Optimizer message.
    max_abs_score : float
        Largest absolute score component.
    separation : bool
        Whether some parameter exceeds the quasi-separation bound.
    n : int
        Number of rows.
    """
    def __init__(self, x, ll, score, iterations, n_evaluations, converged, message, separation, n):
        self.x = np.asarray(x, dtype=float)
        self.ll = float(ll)
        self.score = np.asarray(score, dtype=float)
        self.iterations = int(iterations)
        self.n_evaluations = int(n_evaluations)
        self.converged = bool(converged)
        self.message = str(message)
        self.max_abs_score = float(np.max(np.abs(self.score))) if self.score.size else 0.0
        self.separation = bool(separation)
        self.n = int(n)

def _newton_polish(objective, theta, tol, max_steps=20):
    steps = 0
    last_step = np.inf
    for _ in range(max_steps):
        gradient = objective.score(theta)
        if np.max(np.abs(gradient)) <= tol:
            break
        try:
            step = np.linalg.solve(-objective.hessian(theta), gradient)
        except np.linalg.LinAlgError:
            break
        current = objective.loglik(theta)
        t = 1.0
        while t > 1e-8:
            candidate = theta + t * step
            if objective.loglik(candidate) >= current:
                break
            t /= 2.0
        else:
            break
        last_step = float(np.max(np.abs(candidate - theta))) / max(1.0, float(np.max(np.abs(theta))))
        theta = candidate
        steps += 1
    return theta, steps, last_step

def maximize(model, options=None):
    """
    Maximize a log-likelihood with BFGS.

    The search minimizes ``-LL / max(1, N)`` with the analytic score, so the gradient tolerance applies per observation. When the quasi-Newton search stops short of the score tolerance, a few damped Newton steps are taken from its end point.

    Parameters
    ----------
    model : :class:`Objective`
        Frame-bound objective.
    options : :class:`linkdcm.models.OptimOptions` or dict or None
        Optimizer options. ``init`` may hold either the free or the full parameter vector.

    Returns
    -------
    :class:`OptimResult`
        ``converged`` is true when ``max|score| <= grad_tol * max(1, N)`` or the relative step fell below ``step_tol``.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.estimator import MnlObjective, maximize
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=20, seed=1), return_frame=True)
        result = maximize(MnlObjective(frame))
        print(result.converged, result.ll)
    """
    options = parse_model(OptimOptions, options)
    DataHandler().handle_levels_present(model.y, model.required_levels)
    scale = max(1, model.n)

    # (maximize_init) Starting point
    if options.init is None:
        x0 = np.zeros(model.free.size)
    else:
        init = np.asarray(options.init, dtype=float)
        if init.size == len(model.labels):
            x0 = init[model.free]
        elif init.size == model.free.size:
            x0 = init
        else:
            raise ConfigError(f'init has {init.size} values, expected {model.free.size}')

    # (maximize_search) Quasi-Newton search on the scaled objective
    def objective(theta):
        return -model.loglik(theta) / scale, -model.score(theta) / scale

    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        result = minimize(
            objective,
            x0,
            jac=True,
            method='BFGS',
            options={
                'maxiter': options.max_iter,
                'gtol': options.grad_tol,
                'norm': np.inf,
                'xrtol': options.step_tol
            })
    theta = result.x
    iterations = int(result.nit)

    # (maximize_polish) Newton steps when the score is still above tolerance
    tol = options.grad_tol * scale
    last_step = np.inf
    if np.max(np.abs(model.score(theta))) > tol and np.isfinite(model.loglik(theta)):
        theta, steps, last_step = _newton_polish(model, theta, tol)
        iterations += steps

    # (maximize_result) Convergence and separation checks on the final point
    gradient = model.score(theta)
    converged = bool(np.max(np.abs(gradient)) <= tol or last_step <= options.step_tol)
    full = model.expand(theta)
    separation = bool(np.any(np.abs(full) > DEFAULT_SEPARATION_BOUND))
    if separation:
        logger.warning('Quasi-separation: parameters beyond %s in %s fit', DEFAULT_SEPARATION_BOUND, model.kind)
    if not converged:
        logger.warning('%s fit did not converge: %s', model.kind, result.message)
    out = OptimResult(
        full,
        model.loglik(theta),
        gradient,
        iterations,
        result.nfev,
        converged,
        result.message,
        separation,
        model.n)
    return out

def covariance_pair(model, theta):
    """
    Get the robust and classical covariances at a parameter point.

    Parameters
    ----------
    model : :class:`Objective`
        Frame-bound objective.
    theta : array-like
        Free parameters.

    Returns
    -------
    tuple(:class:`numpy:numpy.ndarray`)
        Sandwich ``H^-1 B H^-1`` and classical ``H^-1``, with ``H`` the negative Hessian and ``B`` the sum of per-row score outer products.
    """
    information = -model.hessian(theta)
    information = (information + information.T) / 2.0
    values, vectors = np.linalg.eigh(information)
    largest = float(np.max(np.abs(values)))
    if not np.all(np.isfinite(values)) or values.min() <= DEFAULT_SINGULAR_RTOL * max(1.0, largest):
        direction = vectors[:, int(np.argmin(values))]
        weight = np.abs(direction)
        loading = [model.free_labels[i] for i in np.argsort(-weight, kind='stable') if weight[i] > 0.1 * weight.max()]
        raise SingularHessianError(
            f'Singular Hessian in {model.kind} fit, null direction loads on {loading}',
            direction=dict(zip(model.free_labels, direction.tolist())),
            loading=loading)
    classical = (vectors / values) @ vectors.T
    scores = model.row_scores(theta)
    robust = classical @ (scores.T @ scores) @ classical
    robust = (robust + robust.T) / 2.0
    classical = (classical + classical.T) / 2.0
    return robust, classical

def sandwich_covariance(params, frame, kind):
    """
    Get the Huber-White sandwich covariance of a fitted parameter vector.

    Parameters
    ----------
    params : array-like or :class:`linkdcm.models.MnlParams` or :class:`linkdcm.models.OlParams`
        Parameters at (or near) the optimum.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Estimation frame.
    kind : str
        ``MNL`` or ``OL``.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        Symmetric covariance matrix in estimation parameter order.
    """
    theta = params.to_vector() if hasattr(params, 'to_vector') else np.asarray(params, dtype=float)
    out = covariance_pair(make_objective(kind, frame), theta)[0]
    return out

def classical_covariance(params, frame, kind):
    """Get the inverse of the negative Hessian, see :func:`sandwich_covariance`."""
    theta = params.to_vector() if hasattr(params, 'to_vector') else np.asarray(params, dtype=float)
    out = covariance_pair(make_objective(kind, frame), theta)[1]
    return out

def wald_stats(params, covariance):
    """
    Get standard errors, z statistics and two-sided normal p-values.

    Parameters
    ----------
    params : array-like
        Parameter values.
    covariance : array-like
        Covariance matrix with a non-negative diagonal.

    Returns
    -------
    dict
        Arrays ``se``, ``t``, ``p`` and the boolean ``zero_se`` flags. A zero standard error gives a signed infinite ``t`` and ``p = 0``.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.estimator import wald_stats

        print(wald_stats([0.0, 2.0], [[1.0, 0.0], [0.0, 1.0]]))
    """
    params = np.asarray(params, dtype=float).ravel()
    variance = np.diag(np.asarray(covariance, dtype=float)).copy()
    if (variance < 0).any():
        raise EstimationError('Covariance has a negative diagonal', position=int(np.flatnonzero(variance < 0)[0]))
    se = np.sqrt(variance)
    zero = se == 0.0
    with np.errstate(divide='ignore', invalid='ignore'):
        t = params / se
    t[zero] = np.copysign(np.inf, params[zero])
    p = 2.0 * norm.sf(np.abs(t))
    p[zero] = 0.0
    if zero.any():
        logger.warning('%d parameters have zero standard error', int(zero.sum()))
    out = {'se': se, 't': t, 'p': p, 'zero_se': zero}
    return out

def null_log_likelihood(n):
    """Get the equal-shares log-likelihood ``-n ln 3``."""
    return -float(n) * float(np.log(3.0))

def ll_ratio(ll, ll_null, tol=1e-9):
    """
    Get the likelihood ratio index ``1 - ll / ll_null``.

    Parameters
    ----------
    ll : float
        Fitted log-likelihood.
    ll_null : float
        Negative null log-likelihood.
    tol : float
        Relative tolerance for ``ll`` below ``ll_null``.

    Returns
    -------
    float
        Index in [0, 1].
    """
    if not ll_null < 0:
        raise EstimationError(f'Null log-likelihood must be negative, got {ll_null}')
    if ll < ll_null - tol * abs(ll_null):
        raise EstimationError(f'Log-likelihood {ll} below null {ll_null}, optimization failed', ll=ll, ll_null=ll_null)
    out = min(max(1.0 - ll / ll_null, 0.0), 1.0)
    return out

class FittedModel:
    """
    Estimated model with robust and classical statistics.

    Parameters
    ----------
    kind : str
        ``MNL`` or ``OL``.
    estimates : array-like
        Estimation parameters (``delta`` rather than ``mu2`` for OL).
    covariance : array-like
        Robust covariance of the estimates.
    classical_covariance : array-like
        Classical covariance of the estimates.
    ll : float
        Log-likelihood.
    n_obs : int
        Number of estimation rows.
    converged : bool
        Convergence flag.
    iterations : int
        Optimizer iterations.
    message : str
        Optimizer message.
    max_abs_score : float
        Largest absolute score component at the estimates.
    separation : bool
        Quasi-separation flag.

    Attributes
    ----------
    ll_null : float
        Equal-shares null log-likelihood.
    ll_ratio : float
        ``1 - ll / ll_null``.
    stats : :class:`pandas:pandas.DataFrame`
        One row per reported parameter with columns ``value``, ``rb_std_err``, ``rb_t_test``, ``rb_p_value``, ``std_err``, ``t_test``, ``p_value``.
    """
    def __init__(
        self,
        kind,
        estimates,
        covariance,
        classical_covariance,
        ll,
        n_obs,
        converged=True,
        iterations=0,
        message='',
        max_abs_score=0.0,
        separation=False):
        self.kind = kind
        self.estimates = np.asarray(estimates, dtype=float)
        self.covariance = np.asarray(covariance, dtype=float)
        self.classical_covariance = np.asarray(classical_covariance, dtype=float)
        self.ll = float(ll)
        self.n_obs = int(n_obs)
        self.ll_null = null_log_likelihood(n_obs)
        self.ll_ratio = ll_ratio(self.ll, self.ll_null)
        self.converged = bool(converged)
        self.iterations = int(iterations)
        self.message = str(message)
        self.max_abs_score = float(max_abs_score)
        self.separation = bool(separation)
        self.stats = self._get_stats()

    @property
    def labels(self):
        """Labels of the estimation parameters."""
        return list(DEFAULT_MNL_LABELS if self.kind == 'MNL' else DEFAULT_OL_LABELS)

    @property
    def report_labels(self):
        """Labels of the reported parameters."""
        return list(DEFAULT_MNL_LABELS if self.kind == 'MNL' else DEFAULT_OL_REPORT_LABELS)

    @property
    def params(self):
        """:class:`linkdcm.models.MnlParams` or :class:`linkdcm.models.OlParams` of the estimates."""
        out = MnlParams.from_vector(self.estimates) if self.kind == 'MNL' else OlParams.from_vector(self.estimates)
        return out

    def _report_transform(self):
        values = self.estimates.copy()
        jacobian = np.eye(values.size)
        if self.kind == 'OL':
            gap = float(np.exp(self.estimates[7]))
            values[7] = self.estimates[6] + gap
            jacobian[7, 6] = 1.0
            jacobian[7, 7] = gap
        return values, jacobian

    def _get_stats(self):
        values, jacobian = self._report_transform()
        robust = wald_stats(values, jacobian @ self.covariance @ jacobian.T)
        classical = wald_stats(values, jacobian @ self.classical_covariance @ jacobian.T)
        out = pd.DataFrame({
            'value': values,
            'rb_std_err': robust['se'],
            'rb_t_test': robust['t'],
            'rb_p_value': robust['p'],
            'std_err': classical['se'],
            't_test': classical['t'],
            'p_value': classical['p']
        }, index=pd.Index(self.report_labels, name='parameter'))
        self.zero_se = bool(robust['zero_se'].any())
        return out

    def predict_proba(self, frame):
        """
        Get level probabilities of every frame row.

        Parameters
        ----------
        frame : :class:`linkdcm.ingest.ModelFrame`
            Frame to predict.

        Returns
        -------
        :class:`numpy:numpy.ndarray`
            ``(n, 3)`` probabilities.
        """
        out = probability_matrix(self.kind, self.estimates, frame.X)
        return out

    def to_dict(self):
        """
        Get the JSON payload of the fitted model.

        Returns
        -------
        dict
            ``parameters`` in reporting layout, raw ``estimates``, both covariance matrices, fit statistics and a ``convergence`` block.
        """
        parameters = {
            label: {k: float(v) for k, v in row.items()}
            for label, row in self.stats.iterrows()
        }
        out = {
            'spec_version': DEFAULT_SPEC_VERSION,
            'kind': self.kind,
            'parameters': parameters,
            'estimates': dict(zip(self.labels, self.estimates.tolist())),
            'covariance': {
                'labels': self.labels,
                'robust': self.covariance.tolist(),
                'classical': self.classical_covariance.tolist()
            },
            'll': self.ll,
            'll_null': self.ll_null,
            'll_ratio': self.ll_ratio,
            'n_obs': self.n_obs,
            'convergence': {
                'converged': self.converged,
                'iterations': self.iterations,
                'message': self.message,
                'max_abs_score': self.max_abs_score,
                'separation': self.separation,
                'zero_se': self.zero_se
            }
        }
        return out

    @classmethod
    def from_dict(cls, payload):
        """
        Rebuild a fitted model from :meth:`to_dict` output.

        Parameters
        ----------
        payload : dict
            Parsed JSON payload.

        Returns
        -------
        :class:`FittedModel`
            Fitted model.
        """
        kind = payload.get('kind')
        if kind not in KINDS:
            raise ConfigError(f'Unknown model kind: {kind}', kind=kind)
        labels = DEFAULT_MNL_LABELS if kind == 'MNL' else DEFAULT_OL_LABELS
        try:
            estimates = [from_jsonable(payload['estimates'][k]) for k in labels]
            covariance = [[from_jsonable(v) for v in row] for row in payload['covariance']['robust']]
            classical = [[from_jsonable(v) for v in row] for row in payload['covariance']['classical']]
            convergence = payload['convergence']
            out = cls(
                kind,
                estimates,
                covariance,
                classical,
                payload['ll'],
                payload['n_obs'],
                converged=convergence['converged'],
                iterations=convergence['iterations'],
                message=convergence['message'],
                max_abs_score=convergence['max_abs_score'],
                separation=convergence['separation'])
        except KeyError as error:
            raise ConfigError(f'Fitted model is missing {error}', field=str(error)) from error
        return out

def fit(kind, frame, options=None):
    """
    Fit a model by maximum likelihood and compute its statistics.

    Parameters
    ----------
    kind : str
        ``MNL`` or ``OL``.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Estimation frame holding all three levels.
    options : :class:`linkdcm.models.OptimOptions` or dict or None
        Optimizer options.

    Returns
    -------
    :class:`FittedModel`
        Estimates with robust (sandwich) and classical statistics.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.estimator import fit
        from linkdcm.synthgen import generate, ol_reference_spec

        table, levels, frame = generate(ol_reference_spec(n_links=20, seed=1), return_frame=True)
        print(fit('OL', frame).stats)
    """
    model = make_objective(kind, frame)
    result = maximize(model, options)
    robust, classical = covariance_pair(model, result.x[model.free])
    out = FittedModel(
        model.kind,
        result.x,
        robust,
        classical,
        result.ll,
        model.n,
        converged=result.converged,
        iterations=result.iterations,
        message=result.message,
        max_abs_score=result.max_abs_score,
        separation=result.separation)
    logger.info('Fitted %s on %d rows: ll=%.4f, converged=%s', out.kind, out.n_obs, out.ll, out.converged)
    return out

def bootstrap_se(kind, frame, fitted, n_boot=DEFAULT_BOOTSTRAP_REPLICATES, seed=DEFAULT_SEED, options=None):
    """
    Get nonparametric bootstrap standard errors of the estimates.

    Rows are resampled with replacement from the ``bootstrap`` stream and every replicate is refitted from the full-sample estimates. Replicates missing a level are skipped.

    Parameters
    ----------
    kind : str
        ``MNL`` or ``OL``.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Estimation frame.
    fitted : :class:`FittedModel`
        Full-sample fit.
    n_boot : int
        Number of replicates.
    seed : int
        Root seed.
    options : :class:`linkdcm.models.OptimOptions` or dict or None
        Optimizer options; ``init`` is replaced by the full-sample estimates.

    Returns
    -------
    :class:`numpy:numpy.ndarray`
        Standard deviation of the replicate estimates, in estimation parameter order.
    """
    options = parse_model(OptimOptions, options).model_copy(update={'init': fitted.estimates.tolist()})
    rng = get_rng(seed, 'bootstrap')
    n = len(frame)
    estimates = []
    for _ in range(n_boot):
        sample = frame.take(rng.integers(0, n, n))
        try:
            result = maximize(make_objective(kind, sample), options)
        except EstimationError:
            continue
        estimates.append(result.x)
    if len(estimates) < 2:
        raise EstimationError('Fewer than 2 usable bootstrap replicates')
    out = np.std(np.asarray(estimates), axis=0, ddof=1)
    return out

class ChoiceModel(Model):
    """
    Persisted discrete choice model.

    * ``input`` fits the model on a frame
    * ``output`` gives the level probabilities and the predicted level of every row
    * ``update`` refits on new data starting from the current estimates

    Parameters
    ----------
    *args, **kwargs
        Passed to :class:`linkdcm.models.Model`. ``settings['optim']`` holds default optimizer options.
    """
    kind = None

    def decode(self, payload):
        out = None if payload is None else FittedModel.from_dict(payload)
        return out

    def encode(self, instance):
        out = None if instance is None else to_jsonable(instance.to_dict())
        return out

    def input(self, data, options=None):
        """
        Fit the model.

        Parameters
        ----------
        data : :class:`linkdcm.ingest.ModelFrame`
            Estimation frame.
        options : :class:`linkdcm.models.OptimOptions` or dict or None
            Optimizer options, defaulting to ``settings['optim']``.
        """
        options = options if options is not None else self.settings.get('optim')
        self.instance = fit(self.kind, data, options)

    def output(self, data):
        """
        Predict level probabilities and levels.

        Parameters
        ----------
        data : :class:`linkdcm.ingest.ModelFrame`
            Frame to predict.

        Returns
        -------
        :class:`pandas:pandas.DataFrame`
            Row keys, ``p_low``, ``p_medium``, ``p_high`` and ``predicted_level`` (ties to the lower level).
        """
        probabilities = self.instance.predict_proba(data)
        out = data.keys
        for k in DEFAULT_LEVELS:
            out[f'p_{DEFAULT_LEVEL_NAMES[k]}'] = probabilities[:, k - 1]
        out['predicted_level'] = np.argmax(probabilities, axis=1) + 1
        return out

    def update(self, data, options=None):
        """
        Refit on new data starting from the current estimates.

        Parameters
        ----------
        data : :class:`linkdcm.ingest.ModelFrame`
            Estimation frame.
        options : :class:`linkdcm.models.OptimOptions` or dict or None
            Optimizer options; ``init`` is replaced by the current estimates.
        """
        options = options if options is not None else self.settings.get('optim')
        options = parse_model(OptimOptions, options).model_copy(update={'init': self.instance.estimates.tolist()})
        self.instance = fit(self.kind, data, options)

class MnlModel(ChoiceModel):
    """
    Persisted dynamic multinomial logit.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.estimator import MnlModel
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=20, seed=1), return_frame=True)
        with tempfile.TemporaryDirectory() as folder:
            model = MnlModel(file_path=f'{folder}/mnl_model')
            model.input(frame)
            model.save()
            print(model.output(frame).head())
    """
    kind = 'MNL'

class OlModel(ChoiceModel):
    """Persisted dynamic ordered logit."""
    kind = 'OL'
