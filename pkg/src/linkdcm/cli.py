import argparse
import json
import logging
import os
import shutil
import sys

import pandas as pd

from .core import (
    MODEL_CLASSES, LinkDcmPipeline, elasticity_tables, evaluation_metrics, load_config, read_json_object, run_pipeline)
from .defaults import *
from .diagnostics import direct_elasticity, rank_attributes
from .estimator import FittedModel
from .handlers import *
from .ingest import build_lagged, load_csv, read_frame_csv
from .managers import ModelsManager
from .models import GeneratorSpec, parse_model
from .synthgen import generate, is_degenerate, mnl_reference_spec, ol_reference_spec, uniform_spec
from .tools import get_md_doc, to_jsonable

logger = logging.getLogger(__name__)

PRESETS = {'mnl': mnl_reference_spec, 'ol': ol_reference_spec, 'uniform': uniform_spec}

def _require(value, flag):
    if not value:
        raise ConfigError(f'Missing required option {flag}', field=flag)
    return value

def _pipeline(args, use_config=True, **overrides):
    config = load_config(args.config if use_config else None, {
        'input': args.input,
        'seed': args.seed,
        'out_dir': args.out_dir,
        **overrides
    })
    out = LinkDcmPipeline(config)
    return out

def load_fitted(path):
    """
    Load a fitted model JSON into a persisted model object.

    Parameters
    ----------
    path : str
        Path of a ``<kind>_model.json`` file.

    Returns
    -------
    :class:`linkdcm.estimator.ChoiceModel`
        :class:`linkdcm.estimator.MnlModel` or :class:`linkdcm.estimator.OlModel` holding the fit.
    """
    fitted = FittedModel.from_dict(read_json_object(path))
    out = MODEL_CLASSES[fitted.kind](file_path=os.path.splitext(path)[0])
    out.instance = fitted
    return out

def ingest(args):
    """
    Validate an observation table and summarize it.

    Writes ``ingest.json`` (row and group counts, column ranges) and ``correlations.csv`` (correlation of every column with the emission rate).
    """
    pipeline = _pipeline(args)
    pipeline.run_stage('ingest')

def discretize(args):
    """
    Cluster the emission rate of an observation table into low, medium and high levels.

    Writes ``levels.csv`` (row keys, emission rate and level) and ``clustering.json`` (centroids, thresholds, inertia and per-level summary).
    """
    pipeline = _pipeline(args)
    pipeline.results['table'] = load_csv(_require(pipeline.config.input, '--input'))
    pipeline.run_stage('discretize')

def frame(args):
    """
    Build the estimation frame of an observation table from its levels.

    Writes ``frame.csv``: row keys, raw attributes, lagged level dummies and the chosen level. The first timestep of every link is dropped.
    """
    pipeline = _pipeline(args)
    table = load_csv(_require(pipeline.config.input, '--input'))
    path = _require(args.levels, '--levels')
    handler = DataHandler()
    handler.handle_file(path)
    levels = pd.read_csv(path, encoding='utf-8')
    handler.handle_columns(levels.columns, DEFAULT_KEY_COLUMNS + ['level'])
    handler.handle_duplicates(levels, DEFAULT_KEY_COLUMNS)
    aligned = table.keys.merge(levels[DEFAULT_KEY_COLUMNS + ['level']], on=DEFAULT_KEY_COLUMNS, how='left', validate='one_to_one')
    missing = aligned['level'].isna().to_numpy()
    if missing.any():
        row = int(missing.argmax())
        raise DataError(f'No level for table row {row + 1}', row=row + 1)
    frame = build_lagged(table, aligned['level'].to_numpy(dtype='int64'))
    pipeline.bundle.write_csv('frame', frame)

def split(args):
    """
    Split an estimation frame into training and test rows and scale both with the training ranges.

    Writes ``train_frame.csv``, ``test_frame.csv``, ``scaler.json`` and ``split.json``.
    """
    pipeline = _pipeline(args, n_train=args.n_train, n_test=args.n_test)
    pipeline.results['frame'] = read_frame_csv(_require(pipeline.config.input, '--input'))
    pipeline.run_stage('split')
    pipeline.run_stage('scale')

def _models_manager(args):
    out = ModelsManager(list(MODEL_CLASSES.values()), folder=args.models_folder)
    return out

def _load_model(args):
    if args.fitted or not args.models_folder:
        return load_fitted(_require(args.fitted, '--fitted'))
    out = _models_manager(args).read(_require(args.name, '--name'))
    return out

def _fit(args, kind):
    pipeline = _pipeline(args)
    pipeline.kinds = [kind]
    train = read_frame_csv(_require(pipeline.config.input, '--input'))
    if not args.models_folder:
        pipeline.results['train'] = train
        pipeline.run_stage('fit')
        return

    # Fit through the named instance, then copy its save file into the output folder
    manager = _models_manager(args)
    name = args.name or kind.lower()
    model = MODEL_CLASSES[kind].__name__
    if name not in manager.instances:
        manager.create(name, model, {'settings': {'optim': pipeline.config.optim.model_dump()}})
    elif type(manager.instances[name]).__name__ != model:
        found = type(manager.instances[name]).__name__
        raise ConfigError(f'Model instance {name} is a {found}, not a {model}', name=name, model=found)
    if manager.instances[name].can_load():
        manager.update(name, train)
    else:
        manager.input(name, train)
    path = pipeline.bundle.path('model', kind)
    shutil.copyfile(manager.instances[name].file, path)
    pipeline.bundle.add(path)

def fit_mnl(args):
    """
    Fit the dynamic multinomial logit on a scaled estimation frame.

    Writes ``mnl_model.json`` with robust and classical statistics per parameter, the log-likelihoods and the convergence flags.

    With ``--models-folder`` the fit goes through the named instance in that folder. The instance is created on first use and refitted from its current estimates afterwards.
    """
    _fit(args, 'MNL')

def fit_ol(args):
    """
    Fit the dynamic ordered logit on a scaled estimation frame.

    Writes ``ol_model.json`` with robust and classical statistics per parameter, the log-likelihoods and the convergence flags.

    Takes ``--models-folder`` and ``--name`` like ``fit-mnl``.
    """
    _fit(args, 'OL')

def predict(args):
    """
    Predict level probabilities and levels with a fitted model.

    Writes ``predictions_<kind>.csv``.

    The model is read from ``--fitted``, or from the instance ``--name`` in ``--models-folder``.
    """
    pipeline = _pipeline(args)
    model = _load_model(args)
    data = read_frame_csv(_require(pipeline.config.input, '--input'))
    pipeline.bundle.write_csv('predictions', model.output(data), model.kind)

def evaluate(args):
    """
    Evaluate a fitted model on a scaled test frame.

    Writes ``confusion_<kind>.csv`` and ``metrics_<kind>.json`` (accuracy, majority baseline, log-likelihoods, recall and precision).
    """
    pipeline = _pipeline(args)
    model = _load_model(args)
    data = read_frame_csv(_require(pipeline.config.input, '--input'))
    predictions = model.output(data)
    cm, metrics = evaluation_metrics(model.instance, data, predictions['predicted_level'].to_numpy())
    pipeline.bundle.write_csv('confusion', cm.to_frame(), model.kind)
    pipeline.bundle.write_json('model_metrics', metrics, model.kind)

def elasticity(args):
    """
    Compute direct elasticities of one level's probability with a fitted model.

    Writes ``elasticity_<kind>.csv`` (per row) and ``elasticity_<kind>_summary.csv`` / ``.json`` (five-number summaries and attribute ranking).
    """
    pipeline = _pipeline(args, alternative=args.alternative)
    model = _load_model(args)
    data = read_frame_csv(_require(pipeline.config.input, '--input'))
    attributes = args.attribute or DEFAULT_ATTRIBUTES
    reports = [direct_elasticity(model.instance, data, pipeline.config.alternative, attribute) for attribute in attributes]
    detail, summary = elasticity_tables(reports, data)
    pipeline.bundle.write_csv('elasticity', detail, model.kind)
    pipeline.bundle.write_csv('elasticity_summary', summary, model.kind)
    pipeline.bundle.write_json('elasticity_summary_json', {
        'reports': [r.to_dict() for r in reports],
        'ranking': [{'attribute': a, 'median_abs': m} for a, m in rank_attributes(reports)]
    }, model.kind)

def iia(args):
    """
    Run Hausman-McFadden tests of independence of irrelevant alternatives on a fitted multinomial logit.

    Writes ``iia.json`` with one test per dropped level.
    """
    pipeline = _pipeline(args, dropped=args.dropped)
    model = _load_model(args)
    EvaluationHandler().handle_kind(model.kind, ('MNL',))
    pipeline.results['models'] = {'MNL': model}
    pipeline.results['train'] = read_frame_csv(_require(pipeline.config.input, '--input'))
    pipeline.run_stage('iia')

def synth(args):
    """
    Generate a synthetic observation table with known ground truth.

    The generator spec comes from ``--config`` or a ``--preset``. Writes ``synth_table.csv`` (input table header), ``synth_levels.csv`` and ``truth.json``.
    """
    pipeline = _pipeline(args, use_config=False)
    if args.config:
        data = read_json_object(args.config)
        data.setdefault('seed', pipeline.config.seed)
    else:
        data = PRESETS[args.preset](seed=pipeline.config.seed).model_dump()
    for key in ['n_links', 'n_steps', 'seed']:
        if getattr(args, key, None) is not None:
            data[key] = getattr(args, key)
    spec = parse_model(GeneratorSpec, data)
    table, levels = generate(spec)
    rows = table.keys
    rows['level'] = levels.level
    pipeline.bundle.write_csv('synth_table', table.to_labeled())
    pipeline.bundle.write_csv('synth_levels', rows)
    pipeline.bundle.write_json('truth', {
        'kind': spec.kind,
        'parameters': spec.truth.to_labels(),
        'thresholds': levels.thresholds,
        'degenerate': is_degenerate(levels),
        'generator': spec.model_dump(exclude={'truth'})
    })

def pipeline(args):
    """
    Run the full pipeline and write the report bundle.

    Stages: ingest, discretize, frame, split, scale, fit, evaluate, elasticity and iia. A failed stage removes the partial outputs and writes ``error.json``.
    """
    config = load_config(args.config, {
        'input': args.input,
        'seed': args.seed,
        'out_dir': args.out_dir,
        'n_train': args.n_train,
        'n_test': args.n_test,
        'model': args.model,
        'alternative': args.alternative,
        'dropped': args.dropped
    })
    status, bundle = run_pipeline(config)
    if status:
        with open(bundle[DEFAULT_BUNDLE_FILES['error']], 'r', encoding='utf-8') as file:
            record = json.load(file)
        record.pop('spec_version', None)
        print(json.dumps(record), file=sys.stderr)
    return status

COMMANDS = {
    'ingest': ingest,
    'discretize': discretize,
    'frame': frame,
    'split': split,
    'fit_mnl': fit_mnl,
    'fit_ol': fit_ol,
    'predict': predict,
    'evaluate': evaluate,
    'elasticity': elasticity,
    'iia': iia,
    'synth': synth,
    'pipeline': pipeline
}

def _add_options(name, parser):
    if name in ('split', 'pipeline'):
        parser.add_argument('--n-train', type=int, default=None, help='Training rows.')
        parser.add_argument('--n-test', type=int, default=None, help='Test rows.')
    if name == 'frame':
        parser.add_argument('--levels', help='Levels CSV written by the discretize subcommand.')
    if name in ('predict', 'evaluate', 'elasticity', 'iia'):
        parser.add_argument('--fitted', help='Fitted model JSON.')
    if name in ('fit_mnl', 'fit_ol', 'predict', 'evaluate', 'elasticity', 'iia'):
        parser.add_argument('--models-folder', help='Folder of named model instances.')
        parser.add_argument('--name', help='Model instance name in --models-folder. Defaults to the model kind when fitting.')
    if name in ('elasticity', 'pipeline'):
        parser.add_argument('--alternative', type=int, choices=DEFAULT_LEVELS, default=None, help='Target level.')
    if name == 'elasticity':
        parser.add_argument('--attribute', action='append', choices=DEFAULT_DESIGN_COLUMNS, help='Attribute, repeatable. All four measured attributes by default.')
    if name in ('iia', 'pipeline'):
        parser.add_argument('--dropped', action='append', type=int, choices=(2, 3), help='Level to drop, repeatable.')
    if name == 'pipeline':
        parser.add_argument('--model', choices=('mnl', 'ol', 'both'), default=None, help='Models to fit.')
    if name == 'synth':
        parser.add_argument('--preset', choices=sorted(PRESETS), default='mnl', help='Ground truth preset when no --config is given.')
        parser.add_argument('--n-links', type=int, default=None, help='Number of links.')
        parser.add_argument('--n-steps', type=int, default=None, help='Timesteps per link.')

def get_parser(settings=DEFAULT_CLI_SETTINGS):
    """
    Get the command line parser.

    Parameters
    ----------
    settings : dict
        Subcommand settings keyed by subcommand name (``_`` for ``-``). A subcommand is added only when its ``_enable`` key is true.

    Returns
    -------
    :class:`argparse.ArgumentParser`
        Parser with one subparser per enabled subcommand.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--input', help='Input CSV.')
    common.add_argument('--out-dir', help='Output folder.')
    common.add_argument('--seed', type=int, default=None, help='Root seed.')
    common.add_argument('--config', help='JSON configuration file.')
    common.add_argument('--log-level', default='INFO', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'), help='Logging level.')

    out = argparse.ArgumentParser(prog='linkdcm', description='Dynamic discrete choice models of link emission levels.')
    subparsers = out.add_subparsers(dest='command', required=True)
    for name, command in COMMANDS.items():
        if not settings.get(name, {}).get('_enable', False):
            continue
        help_text = get_md_doc(command)
        parser = subparsers.add_parser(
            name.replace('_', '-'),
            parents=[common],
            help=help_text.split('\n')[0],
            description=help_text)
        _add_options(name, parser)
        parser.set_defaults(handle=command)
    return out

def main(argv=None):
    """
    Run the command line interface.

    Parameters
    ----------
    argv : list(str) or None
        Arguments without the program name; ``sys.argv[1:]`` when ``None``.

    Returns
    -------
    int
        Exit status: 0 on success, 1 on a domain error (record printed as one JSON line on stderr). Usage errors exit with 2.
    """
    args = get_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s', force=True)
    try:
        out = args.handle(args) or 0
    except LinkDcmError as error:
        logger.error(error.message)
        print(json.dumps(to_jsonable(error.to_record())), file=sys.stderr)
        return 1
    return out
