import logging

import numpy as np
import pandas as pd

from .defaults import *
from .handlers import *
from .models import ColumnRange, LinkRecord, ScalerParams
from .tools import get_rng

logger = logging.getLogger(__name__)

class Table:
    """
    Immutable wrapper around a :class:`pandas:pandas.DataFrame` of rows.

    Parameters
    ----------
    data : :class:`pandas:pandas.DataFrame`
        Rows of the table. The frame is copied and re-indexed from 0.

    Attributes
    ----------
    column_index : dict(int)
        Map of column name to position.
    """
    def __init__(self, data):
        self._data = data.reset_index(drop=True).copy()
        self.column_index = {name: i for i, name in enumerate(self._data.columns)}

    def __len__(self):
        return len(self._data)

    @property
    def columns(self):
        """List of column names."""
        return list(self._data.columns)

    @property
    def data(self):
        """Copy of the underlying dataframe."""
        return self._data.copy()

    @property
    def keys(self):
        """Dataframe of the ``(scenario, link_number, time)`` keys of every row."""
        return self._data[DEFAULT_KEY_COLUMNS].copy()

    def column(self, name):
        """
        Get one column as a read-only array.

        Parameters
        ----------
        name : str
            Column name.

        Returns
        -------
        :class:`numpy:numpy.ndarray`
            Values of the column.
        """
        DataHandler().handle_columns(self.columns, [name])
        out = self._data[name].to_numpy().copy()
        out.flags.writeable = False
        return out

    def take(self, indices):
        """
        Get the rows at the given positions, in the given order.

        Parameters
        ----------
        indices : array-like of int
            Row positions.

        Returns
        -------
        Table
            New table of the same class.
        """
        out = type(self)(self._data.iloc[np.asarray(indices, dtype=np.int64)])
        return out

    def with_data(self, data):
        """Get a new table of the same class holding ``data``."""
        return type(self)(data)

class ObservationTable(Table):
    """
    Validated per-link per-timestep observations with the columns of :data:`linkdcm.defaults.DEFAULT_CSV_COLUMNS`.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.synthgen import generate, uniform_spec

        table, levels = generate(uniform_spec(n_links=2, n_steps=3))
        print(len(table), table.records[0])
    """

    @property
    def records(self):
        """List of :class:`linkdcm.models.LinkRecord` for every row."""
        columns = list(DEFAULT_CSV_COLUMNS.values())
        out = [LinkRecord(**row) for row in self._data[columns].to_dict(orient='records')]
        return out

    def to_labeled(self):
        """
        Get the table with the input CSV header labels.

        Returns
        -------
        :class:`pandas:pandas.DataFrame`
            Input columns in header order, renamed to their labels.
        """
        labels = {v: k for k, v in DEFAULT_CSV_COLUMNS.items()}
        out = self._data[list(labels)].rename(columns=labels)
        return out

class ModelFrame(Table):
    """
    Estimation rows: scaled attributes, lagged level dummies, the chosen level and the row keys.

    Attributes
    ----------
    X : :class:`numpy:numpy.ndarray`
        ``(n, 6)`` design matrix in the order of :data:`linkdcm.defaults.DEFAULT_DESIGN_COLUMNS`.
    y : :class:`numpy:numpy.ndarray`
        Chosen levels in ``{1, 2, 3}``.
    """
    def __init__(self, data):
        super().__init__(data)
        DataHandler().handle_columns(self.columns, DEFAULT_KEY_COLUMNS + DEFAULT_DESIGN_COLUMNS + [DEFAULT_LEVEL_COLUMN])
        self.X = self._data[DEFAULT_DESIGN_COLUMNS].to_numpy(dtype=float)
        self.y = self._data[DEFAULT_LEVEL_COLUMN].to_numpy(dtype=np.int64)
        self.X.flags.writeable = False
        self.y.flags.writeable = False
        both = (self._data['prev_medium'].to_numpy() == 1) & (self._data['prev_high'].to_numpy() == 1)
        if both.any():
            raise DataError('prev_medium and prev_high both set', row=int(np.flatnonzero(both)[0]) + 1)

    @property
    def out_of_range(self):
        """Boolean array flagging rows with scaled attributes outside [0, 1]."""
        if DEFAULT_OUT_OF_RANGE_COLUMN in self.column_index:
            return self._data[DEFAULT_OUT_OF_RANGE_COLUMN].to_numpy(dtype=bool)
        return np.zeros(len(self), dtype=bool)

def load_csv(path):
    """
    Load and validate an observation table CSV.

    The header must contain every input column label (``Scenario`` ... ``GHG ER g/sec``); other columns are ignored. Every cell must parse as a finite number, key and lane columns as integers.

    Parameters
    ----------
    path : str
        Path to a UTF-8, comma delimited CSV file with a header row.

    Returns
    -------
    :class:`ObservationTable`
        Validated table in file order.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.ingest import load_csv
        from linkdcm.synthgen import generate, uniform_spec

        table, levels = generate(uniform_spec(n_links=2, n_steps=3))
        with tempfile.NamedTemporaryFile(suffix='.csv') as file:
            table.to_labeled().to_csv(file.name, index=False)
            print(len(load_csv(file.name)))
    """
    handler = DataHandler()

    # (load_csv_read) Read every cell as text
    handler.handle_file(path)
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8', skipinitialspace=True)
    raw.columns = [str(c).strip() for c in raw.columns]
    handler.handle_columns(raw.columns, list(DEFAULT_CSV_COLUMNS))

    # (load_csv_parse) Parse cells into numbers
    data = {}
    for label, name in DEFAULT_CSV_COLUMNS.items():
        cells = raw[label].str.strip()
        parsed = pd.to_numeric(cells, errors='coerce')
        handler.handle_parsed(cells, parsed, label)
        if name in DEFAULT_INTEGER_COLUMNS:
            handler.handle_integers(parsed, label)
            data[name] = parsed.to_numpy(dtype=float).astype(np.int64)
        else:
            data[name] = parsed.to_numpy(dtype=float)
    data = pd.DataFrame(data, columns=list(DEFAULT_CSV_COLUMNS.values()))

    # (load_csv_check) Check record invariants and keys
    handler.handle_records(data, {v: k for k, v in DEFAULT_CSV_COLUMNS.items()})
    handler.handle_duplicates(data, DEFAULT_KEY_COLUMNS)
    out = ObservationTable(data)
    logger.info('Loaded %d rows from %s', len(out), path)
    return out

def read_frame_csv(path):
    """
    Read a model frame written by :func:`write_frame_csv`.

    Parameters
    ----------
    path : str
        Path to the frame CSV.

    Returns
    -------
    :class:`ModelFrame`
        Frame with integer keys, dummies and levels.
    """
    handler = DataHandler()
    handler.handle_file(path)
    data = pd.read_csv(path, encoding='utf-8')
    handler.handle_columns(data.columns, DEFAULT_KEY_COLUMNS + DEFAULT_DESIGN_COLUMNS + [DEFAULT_LEVEL_COLUMN])
    for column in DEFAULT_KEY_COLUMNS + DEFAULT_DESIGN_COLUMNS + [DEFAULT_LEVEL_COLUMN]:
        parsed = pd.to_numeric(data[column], errors='coerce')
        handler.handle_parsed(data[column].astype(str), parsed, column)
        data[column] = parsed
    for column in DEFAULT_KEY_COLUMNS + DEFAULT_LAG_COLUMNS + [DEFAULT_LEVEL_COLUMN]:
        handler.handle_integers(data[column], column)
        if column in DEFAULT_LAG_COLUMNS:
            handler.handle_binary(data[column], column)
        data[column] = data[column].to_numpy(dtype=float).astype(np.int64)
    if DEFAULT_OUT_OF_RANGE_COLUMN in data.columns:
        data[DEFAULT_OUT_OF_RANGE_COLUMN] = data[DEFAULT_OUT_OF_RANGE_COLUMN].astype(str).str.lower() == 'true'
    EvaluationHandler().handle_levels(data[DEFAULT_LEVEL_COLUMN].to_numpy(), DEFAULT_LEVEL_COLUMN)
    out = ModelFrame(data)
    return out

def write_frame_csv(frame, path):
    """
    Write a table or frame to CSV with repr-exact floats.

    Parameters
    ----------
    frame : :class:`Table`
        Table to write.
    path : str
        Output path.
    """
    frame.data.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')

def minmax_fit(table, columns=DEFAULT_ATTRIBUTES):
    """
    Fit a min-max scaler on the given columns.

    Parameters
    ----------
    table : :class:`Table`
        Table to fit on.
    columns : list(str)
        Columns to scale. Each is fitted independently on its finite values.

    Returns
    -------
    :class:`linkdcm.models.ScalerParams`
        Observed min and max per column. Constant columns are flagged with ``constant=True``.
    """
    handler = DataHandler()
    handler.handle_not_empty(len(table))
    handler.handle_columns(table.columns, columns)
    ranges = {}
    for column in columns:
        values = np.asarray(table.column(column), dtype=float)
        values = values[np.isfinite(values)]
        handler.handle_not_empty(values.size, f'column {column}')
        low, high = float(values.min()), float(values.max())
        constant = low == high
        if constant:
            logger.warning('Constant column %s (value %r) scales to 0', column, low)
        ranges[column] = ColumnRange(min=low, max=high, constant=constant)
    out = ScalerParams(columns=ranges)
    return out

def minmax_apply(table, scaler):
    """
    Scale columns to [0, 1] with a fitted scaler.

    Values outside the fitted range are not clamped. Rows holding any such value are flagged in the ``out_of_range`` column and counted in a warning.

    Parameters
    ----------
    table : :class:`Table`
        Table to scale.
    scaler : :class:`linkdcm.models.ScalerParams`
        Fitted scaler covering the columns to transform.

    Returns
    -------
    :class:`Table`
        New table of the same class, rows in the same order.

    Example
    -------
    .. jupyter-execute::

        import pandas as pd
        from linkdcm.ingest import Table, minmax_apply, minmax_fit

        table = Table(pd.DataFrame({'x': [2.0, 4.0, 10.0]}))
        scaler = minmax_fit(table, ['x'])
        print(minmax_apply(table, scaler).column('x'))
    """
    DataHandler().handle_columns(table.columns, list(scaler.columns))
    data = table.data
    flagged = np.zeros(len(data), dtype=bool)
    for column, bounds in scaler.columns.items():
        values = data[column].to_numpy(dtype=float)
        if bounds.constant:
            scaled = np.zeros_like(values)
        else:
            scaled = (values - bounds.min) / (bounds.max - bounds.min)
        flagged |= (scaled < 0.0) | (scaled > 1.0)
        data[column] = scaled
    if DEFAULT_OUT_OF_RANGE_COLUMN in data.columns:
        flagged |= data[DEFAULT_OUT_OF_RANGE_COLUMN].to_numpy(dtype=bool)
    data[DEFAULT_OUT_OF_RANGE_COLUMN] = flagged
    if flagged.any():
        logger.warning('%d rows have scaled values outside [0, 1]', int(flagged.sum()))
    out = table.with_data(data)
    return out

def build_lagged(table, levels):
    """
    Build the estimation frame with lagged level dummies.

    Rows are grouped by ``(scenario, link_number)`` and sorted by time. The first row of every group is dropped; every other row gets ``prev_medium`` / ``prev_high`` from the level of the previous row of its group.

    Parameters
    ----------
    table : :class:`Table`
        Observations holding the keys and the four model attributes.
    levels : :class:`linkdcm.discretizer.LevelSeries` or array-like
        Level of every table row, aligned with the rows.

    Returns
    -------
    :class:`ModelFrame`
        Frame sorted by key, ``sum(max(0, group_size - 1))`` rows.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.ingest import build_lagged
        from linkdcm.synthgen import generate, uniform_spec

        table, levels = generate(uniform_spec(n_links=2, n_steps=3))
        print(build_lagged(table, levels).data)
    """
    level = np.asarray(getattr(levels, 'level', levels), dtype=np.int64)
    handler = DataHandler()
    handler.handle_aligned(len(table), len(level))
    handler.handle_columns(table.columns, DEFAULT_KEY_COLUMNS + DEFAULT_ATTRIBUTES)
    EvaluationHandler().handle_levels(level)

    # (build_lagged_sort) Sort rows by key
    data = table.data.assign(**{DEFAULT_LEVEL_COLUMN: level})
    data = data.sort_values(DEFAULT_KEY_COLUMNS, kind='mergesort').reset_index(drop=True)

    # (build_lagged_shift) Previous level within each group
    groups = data.groupby(DEFAULT_GROUP_COLUMNS, sort=False)[DEFAULT_LEVEL_COLUMN]
    previous = groups.shift(1)
    singles = int((groups.transform('size') == 1).sum())
    if singles:
        logger.warning('%d groups have a single timestep and contribute no rows', singles)
    keep = previous.notna().to_numpy()
    previous = previous.to_numpy()[keep]

    # (build_lagged_frame) Assemble design columns
    columns = DEFAULT_KEY_COLUMNS + DEFAULT_ATTRIBUTES
    if DEFAULT_OUT_OF_RANGE_COLUMN in data.columns:
        columns = columns + [DEFAULT_OUT_OF_RANGE_COLUMN]
    frame = data.loc[keep, columns].reset_index(drop=True)
    frame.insert(len(DEFAULT_KEY_COLUMNS) + len(DEFAULT_ATTRIBUTES), 'prev_medium', (previous == 2).astype(np.int64))
    frame.insert(len(DEFAULT_KEY_COLUMNS) + len(DEFAULT_ATTRIBUTES) + 1, 'prev_high', (previous == 3).astype(np.int64))
    frame[DEFAULT_LEVEL_COLUMN] = data.loc[keep, DEFAULT_LEVEL_COLUMN].to_numpy()
    out = ModelFrame(frame)
    if len(out) == 0:
        logger.warning('Lagged frame is empty')
    return out

def split(table, n_train, n_test, seed):
    """
    Draw disjoint random training and test subsets without replacement.

    Both subsets keep the original row order. The draw uses the ``split`` stream of :func:`linkdcm.tools.get_rng`, so it is identical across runs and platforms for a fixed seed.

    Parameters
    ----------
    table : :class:`Table`
        Rows to split.
    n_train : int
        Number of training rows.
    n_test : int
        Number of test rows.
    seed : int
        Root seed.

    Returns
    -------
    tuple(:class:`Table`)
        Training and test tables of the same class as ``table``.

    Example
    -------
    .. jupyter-execute::

        import pandas as pd
        from linkdcm.ingest import Table, split

        table = Table(pd.DataFrame({'x': range(10)}))
        train, test = split(table, 5, 2, seed=7)
        print(train.column('x'), test.column('x'))
    """
    DataHandler().handle_split(len(table), n_train, n_test)
    order = get_rng(seed, 'split').permutation(len(table))
    train = table.take(np.sort(order[:n_train]))
    test = table.take(np.sort(order[n_train:n_train + n_test]))
    return train, test

def correlations(table, target=DEFAULT_TARGET_COLUMN):
    """
    Get the Pearson correlation of every measured column with the emission rate.

    Correlations are invariant to min-max scaling, so raw values are used. Constant columns get ``NaN``.

    Parameters
    ----------
    table : :class:`ObservationTable`
        Observations.
    target : str
        Column to correlate against.

    Returns
    -------
    :class:`pandas:pandas.DataFrame`
        Columns ``column`` and ``correlation`` sorted by decreasing absolute correlation, ``NaN`` last.
    """
    DataHandler().handle_not_empty(len(table))
    columns = [c for c in DEFAULT_CSV_COLUMNS.values() if c not in DEFAULT_KEY_COLUMNS and c != target]
    data = table.data[columns + [target]].astype(float)
    values = data[columns].corrwith(data[target])
    out = pd.DataFrame({'column': columns, 'correlation': values.to_numpy()})
    out['_order'] = -out['correlation'].abs()
    out = out.sort_values('_order', kind='mergesort', na_position='last').drop(columns='_order').reset_index(drop=True)
    return out

def table_summary(table):
    """
    Summarize an observation table.

    Parameters
    ----------
    table : :class:`ObservationTable`
        Observations.

    Returns
    -------
    dict
        ``n_rows``, ``n_groups``, ``n_scenarios`` and per-column ``min`` / ``max``.
    """
    data = table.data
    out = {
        'n_rows': len(data),
        'n_groups': int(data.groupby(DEFAULT_GROUP_COLUMNS).ngroups) if len(data) else 0,
        'n_scenarios': int(data['scenario'].nunique()),
        'columns': {
            c: {'min': float(data[c].min()), 'max': float(data[c].max())}
            for c in DEFAULT_CSV_COLUMNS.values() if c not in DEFAULT_KEY_COLUMNS
        }
    }
    return out
