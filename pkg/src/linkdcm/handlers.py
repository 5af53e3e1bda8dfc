import os

import numpy as np

from .defaults import *

class LinkDcmError(Exception):
    """
    Base error for all domain failures.

    Parameters
    ----------
    message : str
        Human readable description of the failure.
    **context
        Extra machine readable fields (``column``, ``row``, ``stage``, ...) copied into :meth:`to_record`.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.handlers import SchemaError

        error = SchemaError('Missing column', column='GHG ER g/sec')
        print(error.to_record())
    """
    def __init__(self, message, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_record(self):
        """
        Get the error as a JSON ready dictionary.

        Returns
        -------
        dict
            Dictionary with keys ``error`` (class name), ``message`` and any context fields.
        """
        out = {'error': type(self).__name__, 'message': self.message}
        out.update(self.context)
        return out

class SchemaError(LinkDcmError):
    """Missing column or unknown attribute."""

class ParseError(LinkDcmError):
    """Non-numeric or non-integral cell, with 1-based data row and column."""

class IntegrityError(LinkDcmError):
    """Duplicate keys or violated record invariants."""

class DataError(LinkDcmError):
    """Empty input, bad split counts or misaligned levels."""

class ClusteringError(LinkDcmError):
    """Too few distinct values or an unsupported number of clusters."""

class EstimationError(LinkDcmError):
    """Missing levels in the estimation data or a failed fit."""

class SingularHessianError(EstimationError):
    """The negative Hessian cannot be inverted."""

class EvaluationError(LinkDcmError):
    """Invalid predictions, levels or alternatives."""

class ConfigError(LinkDcmError):
    """Invalid configuration."""

class ModelNotFoundError(LinkDcmError):
    """Unknown model class or model instance."""

class ModelExistsError(LinkDcmError):
    """Model instance name already taken."""

class ModelNotFittedError(LinkDcmError):
    """Model instance has no estimates yet."""

class StageError(LinkDcmError):
    """
    Error raised inside a pipeline stage.

    Parameters
    ----------
    stage : str
        Name of the failing stage.
    cause : Exception
        Original error. Its context fields are merged into the record when it is a :class:`LinkDcmError`.
    """
    def __init__(self, stage, cause):
        context = dict(cause.context) if isinstance(cause, LinkDcmError) else {}
        context['stage'] = stage
        context['cause'] = type(cause).__name__
        message = cause.message if isinstance(cause, LinkDcmError) else str(cause)
        super().__init__(f'{stage}: {message}', **context)
        self.cause = cause

class DataHandler:
    """
    Class to handle data validation for ingestion, lagging and splitting.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.handlers import DataHandler

        handler = DataHandler()

        # Should not raise exceptions
        handler.handle_split(10, 5, 2)
        handler.handle_columns(['a', 'b'], ['a'])
    """

    def handle_file(self, path):
        """
        Handle a missing input file.

        Parameters
        ----------
        path : str
            Path to the file.
        """
        if not os.path.isfile(path):
            raise DataError(f'File not found: {path}', path=str(path))

    def handle_columns(self, columns, required):
        """
        Handle missing columns.

        Parameters
        ----------
        columns : list(str)
            Columns that are present.
        required : list(str)
            Columns that must be present. The first missing one is named in the error.
        """
        present = set(columns)
        for column in required:
            if column not in present:
                raise SchemaError(f'Missing column: {column}', column=column)

    def handle_parsed(self, raw, parsed, column):
        """
        Handle cells that could not be parsed into finite numbers.

        Parameters
        ----------
        raw : :class:`pandas:pandas.Series`
            Raw string cells.
        parsed : :class:`pandas:pandas.Series`
            Numeric cells, ``NaN`` where parsing failed.
        column : str
            Header label of the column, reported in the error.
        """
        values = parsed.to_numpy(dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(
                f'Cannot parse value {raw.iloc[row]!r} in column {column!r} at row {row + 1}',
                row=row + 1,
                column=column,
                value=str(raw.iloc[row]))

    def handle_integers(self, parsed, column):
        """
        Handle non-integral values in an integer column.

        Parameters
        ----------
        parsed : :class:`pandas:pandas.Series`
            Numeric cells.
        column : str
            Header label of the column, reported in the error.
        """
        values = parsed.to_numpy(dtype=float)
        bad = values != np.floor(values)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(
                f'Expected an integer in column {column!r} at row {row + 1}',
                row=row + 1,
                column=column,
                value=repr(float(values[row])))

    def handle_binary(self, parsed, column):
        """
        Handle values other than 0 and 1 in a dummy column.

        Parameters
        ----------
        parsed : :class:`pandas:pandas.Series`
            Numeric cells.
        column : str
            Name of the column, reported in the error.
        """
        values = parsed.to_numpy(dtype=float)
        bad = (values != 0.0) & (values != 1.0)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(
                f'Expected 0 or 1 in column {column!r} at row {row + 1}',
                row=row + 1,
                column=column,
                value=repr(float(values[row])))

    def handle_records(self, data, labels, tol=DEFAULT_SCALE_TOL):
        """
        Handle violated record invariants.

        Reals must be non-negative, lanes at least 1 and per-lane quantities no larger than their totals.

        Parameters
        ----------
        data : :class:`pandas:pandas.DataFrame`
            Parsed table with snake case columns.
        labels : dict(str)
            Map of snake case column to header label, used in error messages.
        tol : float
            Relative tolerance for the per-lane versus total comparison.
        """
        for column in data.columns:
            values = data[column].to_numpy(dtype=float)
            bad = values < 0
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise IntegrityError(
                    f'Negative value in column {labels[column]!r} at row {row + 1}',
                    row=row + 1,
                    column=labels[column])
        lanes = data['number_of_lanes'].to_numpy()
        bad = lanes < 1
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise IntegrityError(
                f'Number of lanes below 1 at row {row + 1}',
                row=row + 1,
                column=labels['number_of_lanes'])
        for per_lane, total in DEFAULT_PER_LANE_PAIRS:
            a = data[per_lane].to_numpy(dtype=float)
            b = data[total].to_numpy(dtype=float)
            bad = a > b * (1.0 + tol) + tol
            if bad.any():
                row = int(np.flatnonzero(bad)[0])
                raise IntegrityError(
                    f'{labels[per_lane]!r} exceeds {labels[total]!r} at row {row + 1}',
                    row=row + 1,
                    column=labels[per_lane])

    def handle_duplicates(self, data, keys):
        """
        Handle duplicate key rows.

        Parameters
        ----------
        data : :class:`pandas:pandas.DataFrame`
            Table to check.
        keys : list(str)
            Columns that must be unique together.
        """
        duplicated = data.duplicated(subset=keys, keep='first').to_numpy()
        if duplicated.any():
            row = int(np.flatnonzero(duplicated)[0])
            key = {k: int(data[k].iloc[row]) for k in keys}
            raise IntegrityError(f'Duplicate key {key} at row {row + 1}', row=row + 1, key=key)

    def handle_not_empty(self, n, what='table'):
        """
        Handle empty inputs.

        Parameters
        ----------
        n : int
            Number of rows.
        what : str
            Name of the input for the error message.
        """
        if n < 1:
            raise DataError(f'Empty {what}')

    def handle_split(self, n_rows, n_train, n_test):
        """
        Handle invalid split counts.

        Parameters
        ----------
        n_rows : int
            Number of rows available.
        n_train : int
            Requested training rows.
        n_test : int
            Requested test rows.
        """
        if n_train < 0 or n_test < 0:
            raise DataError('Split counts must be non-negative', n_train=n_train, n_test=n_test)
        if n_train + n_test > n_rows:
            raise DataError(
                f'Split counts {n_train} + {n_test} exceed {n_rows} rows',
                n_train=n_train,
                n_test=n_test,
                n_rows=n_rows)

    def handle_aligned(self, n_rows, n_levels):
        """
        Handle levels that are not aligned with the table rows.

        Parameters
        ----------
        n_rows : int
            Number of table rows.
        n_levels : int
            Number of levels.
        """
        if n_rows != n_levels:
            raise DataError(f'{n_levels} levels for {n_rows} rows', n_rows=n_rows, n_levels=n_levels)

    def handle_levels_present(self, levels, required=DEFAULT_LEVELS):
        """
        Handle levels that never occur in estimation data.

        Parameters
        ----------
        levels : :class:`numpy:numpy.ndarray`
            Observed levels.
        required : tuple(int)
            Levels that must occur at least once.
        """
        observed = set(np.unique(levels).tolist())
        missing = [int(level) for level in required if level not in observed]
        if missing:
            raise EstimationError(f'Levels {missing} missing from estimation data', missing=missing)

    def handle_seed(self, seed):
        """
        Handle invalid seeds.

        Parameters
        ----------
        seed : int
            Root seed, must be a non-negative integer.
        """
        if isinstance(seed, bool) or int(seed) != seed or seed < 0:
            raise ConfigError(f'Seed must be a non-negative integer, got {seed!r}', seed=repr(seed))

class ModelsHandler:
    """
    Class to handle model instance operations.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.estimator import MnlModel
        from linkdcm.managers import ModelsManager
        from linkdcm.handlers import ModelsHandler

        with tempfile.TemporaryDirectory() as folder_path:

            # Create handler and manager
            handler = ModelsHandler()
            models_manager = ModelsManager([MnlModel], folder=folder_path, handler=handler)

            # Check if model and instance name available
            # Should not raise exceptions
            handler.handle_create('mnl', 'MnlModel', models_manager.instances, models_manager.models)

            # Create and check instance
            models_manager.create('mnl', 'MnlModel')
            handler.handle_read('mnl', models_manager.instances)
    """

    def handle_create(self, name, model, instances, models):
        """
        Handle model creation operation.

        Parameters
        ----------
        name : str
            Name of the model instance.
        model : str
            Name of the model class to create.
        instances : dict(:class:`linkdcm.models.Model`)
            Dictionary of model instances.
        models : dict(:class:`linkdcm.models.Model`)
            Dictionary of available model classes keyed by class name.
        """
        if model not in models:
            raise ModelNotFoundError(f'Model not found: {model}', model=model)
        self.handle_write(name, instances)

    def handle_input(self, name, instances):
        """
        Handle model input operation.

        Parameters
        ----------
        name : str
            Name of the model instance.
        instances : dict(:class:`linkdcm.models.Model`)
            Dictionary of model instances.
        """
        self.handle_read(name, instances)
        if not instances[name].metadata['can_input']:
            raise ConfigError(f'Model instance does not accept inputs: {name}', name=name)

    def handle_output(self, name, instances):
        """
        Handle model output operation.

        Parameters
        ----------
        name : str
            Name of the model instance.
        instances : dict(:class:`linkdcm.models.Model`)
            Dictionary of model instances.
        """
        self.handle_read(name, instances)
        instance = instances[name]
        if not instance.metadata['can_output']:
            raise ConfigError(f'Model instance does not produce outputs: {name}', name=name)
        if instance.instance is None and not instance.can_load():
            raise ModelNotFittedError(f'Model instance is not fitted: {name}', name=name)

    def handle_read(self, name, instances):
        """
        Handle model read operation.

        Parameters
        ----------
        name : str
            Name of the model instance.
        instances : dict(:class:`linkdcm.models.Model`)
            Dictionary of model instances.
        """
        if name not in instances:
            raise ModelNotFoundError(f'Model instance not found: {name}', name=name)

    def handle_update(self, name, instances):
        """
        Handle model update operation.

        Parameters
        ----------
        name : str
            Name of the model instance.
        instances : dict(:class:`linkdcm.models.Model`)
            Dictionary of model instances.
        """
        self.handle_read(name, instances)
        instance = instances[name]
        if not instance.metadata['can_update']:
            raise ConfigError(f'Model instance does not allow updates: {name}', name=name)
        if instance.instance is None and not instance.can_load():
            raise ModelNotFittedError(f'Model instance is not fitted: {name}', name=name)

    def handle_write(self, name, instances):
        """
        Handle model write operation.

        Parameters
        ----------
        name : str
            Name of the model instance.
        instances : dict(:class:`linkdcm.models.Model`)
            Dictionary of model instances.
        """
        if name in instances:
            raise ModelExistsError(f'Model instance already exists: {name}', name=name)

class EvaluationHandler:
    """
    Class to handle prediction, elasticity and IIA checks.
    """

    def handle_lengths(self, predicted, actual):
        """
        Handle predicted and actual levels of different lengths.

        Parameters
        ----------
        predicted : :class:`numpy:numpy.ndarray`
            Predicted levels.
        actual : :class:`numpy:numpy.ndarray`
            Actual levels.
        """
        if len(predicted) != len(actual):
            raise EvaluationError(
                f'Length mismatch: {len(predicted)} predicted, {len(actual)} actual',
                n_predicted=len(predicted),
                n_actual=len(actual))

    def handle_levels(self, levels, what='levels'):
        """
        Handle values outside of the level set.

        Parameters
        ----------
        levels : :class:`numpy:numpy.ndarray`
            Levels to check.
        what : str
            Name of the input for the error message.
        """
        levels = np.asarray(levels)
        bad = ~np.isin(levels, DEFAULT_LEVELS)
        if bad.any():
            index = int(np.flatnonzero(bad)[0])
            raise EvaluationError(
                f'Invalid level {levels[index]!r} in {what} at position {index}',
                position=index)

    def handle_alternative(self, alternative, allowed=DEFAULT_LEVELS):
        """
        Handle invalid alternatives.

        Parameters
        ----------
        alternative : int
            Requested alternative.
        allowed : tuple(int)
            Alternatives accepted by the operation.
        """
        if alternative not in allowed:
            raise EvaluationError(
                f'Alternative {alternative!r} not in {list(allowed)}',
                alternative=alternative)

    def handle_attribute(self, attribute):
        """
        Handle attributes that are not model attributes.

        Parameters
        ----------
        attribute : str
            Attribute name.
        """
        if attribute not in DEFAULT_DESIGN_COLUMNS:
            raise SchemaError(f'Unknown attribute: {attribute}', column=attribute)

    def handle_kind(self, kind, allowed):
        """
        Handle fitted models of the wrong kind.

        Parameters
        ----------
        kind : str
            Kind of the fitted model.
        allowed : tuple(str)
            Kinds accepted by the operation.
        """
        if kind not in allowed:
            raise EvaluationError(f'Model kind {kind!r} not supported, expected one of {list(allowed)}', kind=kind)
