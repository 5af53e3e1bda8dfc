import logging

import numpy as np
import pandas as pd

from .defaults import *
from .discretizer import LevelSeries
from .estimator import probability_matrix
from .handlers import *
from .ingest import ModelFrame, ObservationTable, build_lagged, minmax_apply
from .models import ColumnRange, GeneratorSpec, MnlParams, OlParams, ScalerParams, parse_model
from .tools import get_rng

logger = logging.getLogger(__name__)

def mnl_reference_spec(n_links=DEFAULT_SYNTH_N_LINKS, n_steps=DEFAULT_SYNTH_N_STEPS, seed=0, **kwargs):
    """
    Get a generator spec with the reference MNL magnitudes as truth.

    The single lagged coefficient of each level sits on its own-level dummy; the cross dummies are 0.

    Parameters
    ----------
    n_links : int
        Number of links.
    n_steps : int
        Timesteps per link.
    seed : int
        Root seed.
    **kwargs
        Other :class:`linkdcm.models.GeneratorSpec` fields.

    Returns
    -------
    :class:`linkdcm.models.GeneratorSpec`
        Generator spec.
    """
    out = GeneratorSpec(n_links=n_links, n_steps=n_steps, seed=seed, kind='MNL', truth=MnlParams(**DEFAULT_REFERENCE_MNL), **kwargs)
    return out

def ol_reference_spec(n_links=DEFAULT_SYNTH_N_LINKS, n_steps=DEFAULT_SYNTH_N_STEPS, seed=0, **kwargs):
    """
    Get a generator spec with the reference OL magnitudes as truth, thresholds in increasing order (1.5, 10.1).

    Parameters
    ----------
    n_links : int
        Number of links.
    n_steps : int
        Timesteps per link.
    seed : int
        Root seed.
    **kwargs
        Other :class:`linkdcm.models.GeneratorSpec` fields.

    Returns
    -------
    :class:`linkdcm.models.GeneratorSpec`
        Generator spec.
    """
    truth = OlParams.from_thresholds(DEFAULT_REFERENCE_OL['eta'], DEFAULT_REFERENCE_OL['mu1'], DEFAULT_REFERENCE_OL['mu2'])
    out = GeneratorSpec(n_links=n_links, n_steps=n_steps, seed=seed, kind='OL', truth=truth, **kwargs)
    return out

def uniform_spec(n_links=DEFAULT_SYNTH_N_LINKS, n_steps=DEFAULT_SYNTH_N_STEPS, seed=0, **kwargs):
    """Get a generator spec with all-zero MNL truth (equal level probabilities)."""
    out = GeneratorSpec(n_links=n_links, n_steps=n_steps, seed=seed, kind='MNL', truth=MnlParams(), **kwargs)
    return out

def generator_scaler(spec):
    """
    Get the scaler that maps the raw attribute columns of a generated table back to [0, 1].

    Parameters
    ----------
    spec : :class:`linkdcm.models.GeneratorSpec`
        Generator spec.

    Returns
    -------
    :class:`linkdcm.models.ScalerParams`
        Raw ranges of the four attributes.
    """
    columns = {k: ColumnRange(min=spec.raw_ranges[k][0], max=spec.raw_ranges[k][1]) for k in DEFAULT_ATTRIBUTES}
    out = ScalerParams(columns=columns)
    return out

def _draw_law(law, rng, size):
    if law.kind == 'beta':
        return rng.beta(law.a, law.b, size)
    u = rng.random(size)
    if law.kind == 'discrete':
        return np.minimum(np.floor(u * law.levels), law.levels - 1) / (law.levels - 1)
    return u

def _link_draws(spec, link):
    rng = get_rng(spec.seed, 'synth', spec.scenario, link)
    n_steps = spec.n_steps
    x = np.empty((n_steps, len(DEFAULT_ATTRIBUTES)))
    for j, name in enumerate(DEFAULT_ATTRIBUTES):
        law = spec.attribute_laws[name]
        fresh = _draw_law(law, rng, n_steps)
        stay = rng.random(n_steps) < law.persistence
        column = fresh.copy()
        if law.static:
            column[:] = fresh[0]
        else:
            for t in range(1, n_steps):
                if stay[t]:
                    column[t] = column[t - 1]
        x[:, j] = column
    choice = rng.random(n_steps)
    emission = rng.random(n_steps)
    return x, choice, emission

def _sample(probabilities, u):
    cumulative = np.cumsum(probabilities, axis=-1)
    out = 1 + np.sum(u[..., None] >= cumulative[..., :-1], axis=-1)
    return out

def generate(spec, return_frame=False):
    """
    Generate a synthetic link panel with known ground truth.

    Every link draws its attributes on [0, 1] and its uniforms from its own ``('synth', scenario, link)`` stream. The first level of a link follows ``initial_level_law``; each later level is drawn from the true model probabilities given the attributes and the previous level. Raw columns map the attributes onto ``raw_ranges``; each level maps to a narrow band of emission rates and the remaining columns are derived from speed, density and lanes.

    Parameters
    ----------
    spec : :class:`linkdcm.models.GeneratorSpec` or dict
        Generator spec.
    return_frame : bool
        Whether to also return the generator's own estimation frame (scaled attributes, lag dummies, first steps dropped).

    Returns
    -------
    tuple
        ``(table, levels)`` or ``(table, levels, frame)`` with :class:`linkdcm.ingest.ObservationTable`, :class:`linkdcm.discretizer.LevelSeries` and :class:`linkdcm.ingest.ModelFrame`.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels = generate(mnl_reference_spec(n_links=5, n_steps=4, seed=3))
        print(table.to_labeled().head())
        print(levels.level[:8])
    """
    spec = parse_model(GeneratorSpec, spec)
    n_links, n_steps = spec.n_links, spec.n_steps
    theta = spec.truth.to_vector()

    # (generate_draws) Per-link streams
    draws = [_link_draws(spec, link) for link in range(1, n_links + 1)]
    x = np.stack([d[0] for d in draws])
    choice = np.stack([d[1] for d in draws])
    emission = np.stack([d[2] for d in draws])

    # (generate_levels) Markov dynamics across links
    level = np.empty((n_links, n_steps), dtype=np.int64)
    lagged = np.zeros((n_links, n_steps, 2))
    level[:, 0] = _sample(np.asarray(spec.initial_level_law)[None, :], choice[:, 0])
    for t in range(1, n_steps):
        lagged[:, t, 0] = level[:, t - 1] == 2
        lagged[:, t, 1] = level[:, t - 1] == 3
        design = np.concatenate([x[:, t, :], lagged[:, t, :]], axis=1)
        level[:, t] = _sample(probability_matrix(spec.kind, theta, design), choice[:, t])

    # (generate_raw) Raw columns
    raw = {}
    for j, name in enumerate(DEFAULT_ATTRIBUTES):
        low, high = spec.raw_ranges[name]
        raw[name] = low + x[:, :, j].ravel() * (high - low)
    lanes = np.rint(raw['number_of_lanes']).astype(np.int64)
    lanes = np.maximum(lanes, 1)
    speed = raw['link_speed']
    density = raw['link_density_per_lane']
    free_speed = raw['free_flow_speed']
    flow = speed * density
    with np.errstate(divide='ignore'):
        delay = np.where(
            speed > 0,
            np.maximum(DEFAULT_SYNTH_LINK_LENGTH_KM / np.where(speed > 0, speed, 1.0) - DEFAULT_SYNTH_LINK_LENGTH_KM / np.maximum(free_speed, 1e-9), 0.0) * 3600.0,
            0.0)
    flat_level = level.ravel()
    centers = np.array([DEFAULT_SYNTH_EMISSION_BANDS[k][0] for k in flat_level])
    widths = np.array([DEFAULT_SYNTH_EMISSION_BANDS[k][1] for k in flat_level])
    data = pd.DataFrame({
        'scenario': np.full(n_links * n_steps, spec.scenario, dtype=np.int64),
        'link_number': np.repeat(np.arange(1, n_links + 1, dtype=np.int64), n_steps),
        'time': np.tile(np.arange(n_steps, dtype=np.int64), n_links),
        'free_flow_speed': free_speed,
        'number_of_lanes': lanes,
        'link_speed': speed,
        'link_total_density': density * lanes,
        'link_density_per_lane': density,
        'link_total_flow': flow * lanes,
        'link_flow_per_lane': flow,
        'delay_on_link': delay,
        'in_links_density_per_lane': density,
        'in_links_total_flow': flow * lanes,
        'in_links_flow_per_lane': flow,
        'flow_over_capacity': flow / DEFAULT_SYNTH_LANE_CAPACITY,
        'ghg_er': centers + widths * (emission.ravel() - 0.5)
    })
    table = ObservationTable(data)
    thresholds = [
        (DEFAULT_SYNTH_EMISSION_BANDS[1][0] + DEFAULT_SYNTH_EMISSION_BANDS[2][0]) / 2.0,
        (DEFAULT_SYNTH_EMISSION_BANDS[2][0] + DEFAULT_SYNTH_EMISSION_BANDS[3][0]) / 2.0
    ]
    centroids = [DEFAULT_SYNTH_EMISSION_BANDS[k][0] for k in DEFAULT_LEVELS]
    levels = LevelSeries(flat_level, thresholds, centroids)

    realized = np.unique(flat_level)
    if realized.size == 1:
        logger.warning('Degenerate panel: every level is %d', int(realized[0]))
    logger.info('Generated %d links x %d steps (%s truth)', n_links, n_steps, spec.kind)
    if not return_frame:
        return table, levels

    # (generate_frame) Generator's own estimation frame
    frame = pd.DataFrame({
        'scenario': data['scenario'],
        'link_number': data['link_number'],
        'time': data['time']
    })
    for j, name in enumerate(DEFAULT_ATTRIBUTES):
        frame[name] = x[:, :, j].ravel()
    frame['prev_medium'] = lagged[:, :, 0].ravel().astype(np.int64)
    frame['prev_high'] = lagged[:, :, 1].ravel().astype(np.int64)
    frame[DEFAULT_LEVEL_COLUMN] = flat_level
    frame = ModelFrame(frame[data['time'].to_numpy() > 0])
    return table, levels, frame

def is_degenerate(levels):
    """Whether a generated panel realized a single level."""
    return np.unique(np.asarray(getattr(levels, 'level', levels))).size == 1

def bayes_accuracy(spec, table, levels, keys=None):
    """
    Get the accuracy of the argmax classifier under the true parameters.

    Parameters
    ----------
    spec : :class:`linkdcm.models.GeneratorSpec`
        Spec the panel was generated with.
    table : :class:`linkdcm.ingest.ObservationTable`
        Generated table.
    levels : :class:`linkdcm.discretizer.LevelSeries`
        Generated levels.
    keys : :class:`pandas:pandas.DataFrame` or None
        ``(scenario, link_number, time)`` rows to evaluate; all lagged rows when ``None``.

    Returns
    -------
    float
        Share of rows whose realized level is the most probable level under the truth.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.synthgen import bayes_accuracy, generate, uniform_spec

        spec = uniform_spec(n_links=20, n_steps=20)
        table, levels = generate(spec)
        print(bayes_accuracy(spec, table, levels))
    """
    spec = parse_model(GeneratorSpec, spec)
    frame = build_lagged(minmax_apply(table, generator_scaler(spec)), levels)
    if keys is not None:
        selected = frame.keys.merge(keys[DEFAULT_KEY_COLUMNS].drop_duplicates(), on=DEFAULT_KEY_COLUMNS, how='left', indicator=True)
        frame = frame.take(np.flatnonzero((selected['_merge'] == 'both').to_numpy()))
    DataHandler().handle_not_empty(len(frame), 'frame')
    predicted = np.argmax(probability_matrix(spec.kind, spec.truth.to_vector(), frame.X), axis=1) + 1
    out = float(np.mean(predicted == frame.y))
    return out
