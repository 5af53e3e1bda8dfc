import json
import logging
import os

import numpy as np
import pandas as pd

from .defaults import *
from .diagnostics import confusion_matrix, direct_elasticity, hausman_iia, majority_baseline, rank_attributes
from .discretizer import assign_levels, kmeans_1d, level_summary
from .env import *
from .estimator import MnlModel, OlModel
from .handlers import *
from .ingest import build_lagged, correlations, load_csv, minmax_apply, minmax_fit, split, table_summary
from .managers import *
from .models import PipelineConfig, parse_model

STAGES = ['ingest', 'discretize', 'frame', 'split', 'scale', 'fit', 'evaluate', 'elasticity', 'iia']
MODEL_CLASSES = {'MNL': MnlModel, 'OL': OlModel}

def read_json_object(path):
    """
    Read a JSON file holding one object.

    Parameters
    ----------
    path : str
        Path to the JSON file.

    Returns
    -------
    dict
        Parsed object.
    """
    DataHandler().handle_file(path)
    try:
        with open(path, 'r', encoding='utf-8') as file:
            out = json.load(file)
    except json.JSONDecodeError as error:
        raise ConfigError(f'Invalid JSON in {path}: {error.msg}', line=error.lineno) from error
    if not isinstance(out, dict):
        raise ConfigError(f'Configuration in {path} must be a JSON object', path=str(path))
    return out

def load_config(path=None, overrides={}):
    """
    Load a pipeline configuration.

    Parameters
    ----------
    path : str or None
        JSON file with :class:`linkdcm.models.PipelineConfig` fields.
    overrides : dict
        Values that win over the file, such as command line flags. ``None`` values are ignored.

    Returns
    -------
    :class:`linkdcm.models.PipelineConfig`
        Validated configuration.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.core import load_config

        config = load_config(overrides={'seed': 7, 'model': 'mnl'})
        print(config)
    """
    data = read_json_object(path) if path else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    out = parse_model(PipelineConfig, data)
    return out

def elasticity_tables(reports, frame):
    """
    Get the per-row and summary tables of a set of elasticity reports.

    Parameters
    ----------
    reports : list(:class:`linkdcm.diagnostics.ElasticityReport`)
        Reports of one model and one level, computed on ``frame``.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Rows the reports were computed on.

    Returns
    -------
    tuple(:class:`pandas:pandas.DataFrame`)
        Per-row table (keys, then ``<attribute>`` and ``<attribute>_fd`` columns) and summary table (one row per attribute, largest median absolute elasticity first).
    """
    detail = frame.keys
    for report in reports:
        detail[report.attribute] = report.values
        detail[f'{report.attribute}_fd'] = report.fd_values
    ranks = {attribute: i + 1 for i, (attribute, _) in enumerate(rank_attributes(reports))}
    rows = []
    for report in sorted(reports, key=lambda r: ranks[r.attribute]):
        rows.append({
            'attribute': report.attribute,
            'alternative': report.alternative,
            'coefficient': report.coefficient,
            **report.summary,
            'median_abs': report.median_abs,
            'rank': ranks[report.attribute]
        })
    summary = pd.DataFrame(rows, columns=['attribute', 'alternative', 'coefficient', 'min', 'q1', 'median', 'q3', 'max', 'median_abs', 'rank'])
    return detail, summary

def evaluation_metrics(fitted, frame, predicted):
    """
    Get the evaluation metrics of a fitted model on a test frame.

    Parameters
    ----------
    fitted : :class:`linkdcm.estimator.FittedModel`
        Fitted model.
    frame : :class:`linkdcm.ingest.ModelFrame`
        Test frame.
    predicted : array-like
        Predicted levels of ``frame``.

    Returns
    -------
    tuple
        :class:`linkdcm.diagnostics.ConfusionMatrix` and a metrics dict with ``accuracy``, ``majority_baseline``, the training ``ll``, ``ll_null`` and ``ll_ratio``, the row counts and the convergence flag.
    """
    cm = confusion_matrix(predicted, frame.y)
    metrics = {
        'kind': fitted.kind,
        'accuracy': cm.overall_accuracy,
        'majority_baseline': majority_baseline(frame.y),
        'll': fitted.ll,
        'll_null': fitted.ll_null,
        'll_ratio': fitted.ll_ratio,
        'n_train': fitted.n_obs,
        'n_test': len(frame),
        'converged': fitted.converged,
        'confusion': cm.to_dict()
    }
    return cm, metrics

class LinkDcmPipeline:
    """
    End-to-end emission level pipeline writing a deterministic report bundle.

    Stages run in order: ``ingest``, ``discretize``, ``frame``, ``split``, ``scale``, ``fit``, ``evaluate``, ``elasticity``, ``iia``. Any error raised inside a stage is re-raised as :class:`linkdcm.handlers.StageError` naming the stage; :meth:`run` then removes the partial outputs and writes ``error.json``.

    Parameters
    ----------
    config : :class:`linkdcm.models.PipelineConfig` or dict or None
        Run configuration.
    load_env : bool
        Whether to load the ``.env`` file of ``env`` and use its variables for settings the config leaves unset.
    env : :class:`linkdcm.env.LinkDcmDotEnv` or None
        Environment variables. If ``None``, a default object is created.

        By default, the related settings are read from the environment variables below:

        .. jupyter-execute::
            :hide-code:

            from linkdcm.defaults import DEFAULT_DOTENV_KWARGS
            defaults = {k:v for k, v in DEFAULT_DOTENV_KWARGS.items() if k not in ['env_file', 'key_path']}
            print('<setting> = <environment variable>\\n')
            for k, v in defaults.items():
                print(k + ' = ' + v)

    Attributes
    ----------
    config : :class:`linkdcm.models.PipelineConfig`
        Configuration with ``seed`` and ``out_dir`` resolved.
    kinds : list(str)
        Model kinds to fit.
    bundle : :class:`linkdcm.managers.BundleManager`
        Writer of the report bundle.
    results : dict
        Intermediate results of the stages run so far.
    logger : :class:`logging.Logger`
        Pipeline logger.

    Example
    -------
    .. jupyter-execute::

        import os
        import tempfile
        from linkdcm.core import LinkDcmPipeline
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels = generate(mnl_reference_spec(n_links=40, n_steps=26, seed=3))
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, 'links.csv')
            table.to_labeled().to_csv(path, index=False)
            pipeline = LinkDcmPipeline({'input': path, 'n_train': 700, 'n_test': 300, 'out_dir': folder})
            status = pipeline.run()
            print(status, sorted(pipeline.bundle.files))
    """
    def __init__(self, config=None, load_env=True, env=None):
        self.logger = logging.getLogger(__name__)
        config = parse_model(PipelineConfig, config)

        # (LinkDcmPipeline_env) Resolve unset settings from env vars, then defaults
        env = env if env else LinkDcmDotEnv()
        seed, out_dir = config.seed, config.out_dir
        if load_env:
            if env.exists():
                env.load()
            if seed is None:
                seed = env.get('seed', None)
            if out_dir is None:
                out_dir = env.get('out_dir', None)
        seed = DEFAULT_SEED if seed in (None, '') else seed
        try:
            seed = int(seed)
        except (TypeError, ValueError) as error:
            raise ConfigError(f'Seed must be a non-negative integer, got {seed!r}', seed=repr(seed)) from error
        DataHandler().handle_seed(seed)
        out_dir = out_dir or DEFAULT_OUT_DIR

        # (LinkDcmPipeline_attr) Set attributes
        self.config = config.model_copy(update={'seed': seed, 'out_dir': out_dir})
        self.kinds = ['MNL', 'OL'] if config.model == 'both' else [config.model.upper()]
        self.bundle = BundleManager(out_dir)
        self.results = {}

    def config_echo(self):
        """
        Get the configuration written to the manifest.

        Returns
        -------
        dict
            Configuration without ``out_dir`` and with the input reduced to its file name, so the bundle does not depend on where it is written.
        """
        out = self.config.model_dump(exclude={'out_dir'})
        out['input'] = os.path.basename(out['input']) if out['input'] else None
        return out

    def run(self):
        """
        Run every stage and write the manifest.

        Returns
        -------
        int
            Exit status: 0 on success, 1 when a stage failed (``error.json`` written).
        """
        try:
            for stage in STAGES:
                self.run_stage(stage)
            self.bundle.manifest(self.config_echo())
        except StageError as error:
            self.bundle.fail(error)
            return 1
        self.logger.info('Report bundle written to %s', self.bundle.folder)
        return 0

    def run_stage(self, stage):
        """
        Run one stage, wrapping its errors as :class:`linkdcm.handlers.StageError`.

        Parameters
        ----------
        stage : str
            One of :data:`STAGES`.
        """
        self.logger.info('Stage %s started', stage)
        try:
            getattr(self, f'_{stage}')()
        except StageError:
            raise
        except Exception as error:
            self.logger.error('Stage %s failed: %s', stage, error)
            raise StageError(stage, error) from error
        self.logger.info('Stage %s finished', stage)

    def _ingest(self):
        if not self.config.input:
            raise ConfigError('No input table given', field='input')
        table = load_csv(self.config.input)
        self.results['table'] = table
        self.bundle.write_json('ingest', table_summary(table))
        self.bundle.write_csv('correlations', correlations(table))

    def _discretize(self):
        table = self.results['table']
        options = self.config.kmeans
        values = table.column(DEFAULT_TARGET_COLUMN)
        clustering = kmeans_1d(
            values,
            k=self.config.k,
            seed=self.config.seed,
            restarts=options.restarts,
            tol=options.tol,
            max_iter=options.max_iter,
            exact_limit=options.exact_limit)
        levels = assign_levels(clustering)
        self.results['levels'] = levels
        rows = table.keys
        rows[DEFAULT_TARGET_COLUMN] = values
        rows['level'] = levels.level
        self.bundle.write_csv('levels', rows)
        payload = {
            **clustering.to_dict(),
            'levels': levels.to_dict(),
            'summary': level_summary(values, levels).to_dict(orient='records')
        }
        self.bundle.write_json('clustering', payload)

    def _frame(self):
        self.results['frame'] = build_lagged(self.results['table'], self.results['levels'])

    def _split(self):
        frame = self.results['frame']
        train, test = split(frame, self.config.n_train, self.config.n_test, self.config.seed)
        self.results['train_raw'], self.results['test_raw'] = train, test
        self.bundle.write_json('split', {
            'n_rows': len(frame),
            'n_train': len(train),
            'n_test': len(test),
            'seed': self.config.seed
        })

    def _scale(self):
        scaler = minmax_fit(self.results['train_raw'])
        self.results['scaler'] = scaler
        self.results['train'] = minmax_apply(self.results['train_raw'], scaler)
        self.results['test'] = minmax_apply(self.results['test_raw'], scaler)
        self.bundle.write_json('scaler', scaler)
        self.bundle.write_csv('train_frame', self.results['train'])
        self.bundle.write_csv('test_frame', self.results['test'])

    def _fit(self):
        self.results['models'] = {}
        for kind in self.kinds:
            model = MODEL_CLASSES[kind](
                file_path=self.bundle.path('model', kind)[:-len('.json')],
                settings={'optim': self.config.optim})
            model.input(self.results['train'])
            model.save()
            self.bundle.add(model.file)
            self.results['models'][kind] = model

    def _evaluate(self):
        test = self.results['test']
        metrics = {}
        for kind, model in self.results['models'].items():
            predictions = model.output(test)
            self.bundle.write_csv('predictions', predictions, kind)
            cm, metrics[kind] = evaluation_metrics(model.instance, test, predictions['predicted_level'].to_numpy())
            self.bundle.write_csv('confusion', cm.to_frame(), kind)
        self.results['metrics'] = metrics
        self.bundle.write_json('metrics', {'models': metrics})

    def _elasticity(self):
        test = self.results['test']
        for kind, model in self.results['models'].items():
            reports = [direct_elasticity(model.instance, test, self.config.alternative, attribute) for attribute in DEFAULT_ATTRIBUTES]
            detail, summary = elasticity_tables(reports, test)
            self.bundle.write_csv('elasticity', detail, kind)
            self.bundle.write_csv('elasticity_summary', summary, kind)

    def _iia(self):
        if 'MNL' not in self.results['models']:
            return
        fitted = self.results['models']['MNL'].instance
        tests = []
        for dropped in self.config.dropped:
            try:
                tests.append(hausman_iia(fitted, self.results['train'], dropped, self.config.optim).to_dict())
            except EstimationError as error:
                self.logger.warning('IIA test without level %d failed: %s', dropped, error.message)
                tests.append({'dropped_alternative': dropped, 'error': error.to_record()})
        self.bundle.write_json('iia', {'tests': tests})

def run_pipeline(config=None, load_env=True, env=None):
    """
    Run the end-to-end pipeline.

    Parameters
    ----------
    config : :class:`linkdcm.models.PipelineConfig` or dict or None
        Run configuration.
    load_env : bool
        Whether to use environment variables for unset settings.
    env : :class:`linkdcm.env.LinkDcmDotEnv` or None
        Environment variables.

    Returns
    -------
    tuple
        Exit status (0 success, 1 failure) and the bundle as a dict of file name to path.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.core import run_pipeline

        with tempfile.TemporaryDirectory() as folder:
            status, bundle = run_pipeline({'input': f'{folder}/missing.csv', 'out_dir': folder})
            print(status, list(bundle))
    """
    pipeline = LinkDcmPipeline(config, load_env=load_env, env=env)
    status = pipeline.run()
    out = (status, dict(pipeline.bundle.files))
    return out
