import math
import zlib

import numpy as np

from docutils.core import publish_parts
from markdownify import markdownify
from numpydoc.docscrape import NumpyDocString

from .handlers import *

def docstr_to_html(docstr):
    """
    Converts a docstring into HTML format.

    Parameters
    ----------
    docstr : str
        Docstring to convert into HTML.

    Returns
    -------
    str
        HTML formatted docstring.
    """
    out = publish_parts(
        source=docstr,
        writer_name='html',
        settings_overrides={'report_level': 4})['html_body']
    return out

def get_md_doc(obj, parameters=False):
    """
    Converts a Python object's numpy style docstring into markdown.

    Used to build the help text of the command line subcommands from the functions they run.

    Parameters
    ----------
    obj : any or str
        A python object with numpy style docstring. If ``str``, then it will assume that the str will be the docstring.
    parameters : bool
        Whether to append the ``Parameters`` section.

    Returns
    -------
    str
        Markdown formatted docstring for the summary, extended summary and, optionally, parameters headings.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.ingest import load_csv
        from linkdcm.tools import get_md_doc

        print(get_md_doc(load_csv))
    """

    # (get_md_doc_numpy) Get doc and convert to numpy doc str
    npdoc = get_npdoc(obj)

    # (get_md_doc_summary) Get npdoc summary and convert to html
    summary = '\n\n'.join([' '.join(npdoc[k]) for k in ['Summary', 'Extended Summary'] if npdoc[k]])
    out = docstr_to_html(summary)

    # (get_md_doc_params) Get npdoc parameters and convert to html
    if parameters and npdoc['Parameters']:
        params = '\n'.join(['* ' + k.name + ': ' + ' '.join(k.desc) for k in npdoc['Parameters']])
        out += '<br><h2>Parameters</h2>' + docstr_to_html(params)

    # (get_md_doc_out) Convert to md docs
    out = html_to_md(out).strip()
    return out

def get_npdoc(obj):
    """
    Parses a numpy style docstring from a Python object.

    Parameters
    ----------
    obj : any or str
        A python object with numpy style docstring. If ``str``, then it will assume that the str will be the docstring.

    Returns
    -------
    :class:`numpydoc:numpydoc.docscrape.NumpyDocString`
        A parsed numpy docstring object.
    """
    out = NumpyDocString(obj) if isinstance(obj, str) else NumpyDocString(obj.__doc__ or '')
    return out

def html_to_md(html):
    """
    Converts HTML into markdown format.

    Parameters
    ----------
    html : str
        HTML to convert to markdown.

    Returns
    -------
    str
        markdown formatted from HTML.
    """
    out = markdownify(html)
    return out

def get_rng(seed, *labels):
    """
    Get a counter-based random generator for a labelled stream.

    The stream is a :class:`numpy:numpy.random.Philox` generator keyed by the root seed and the CRC32 of every label, so each stage (or each link) draws from its own reproducible stream regardless of the order streams are created in.

    Parameters
    ----------
    seed : int
        Non-negative root seed.
    *labels : str or int
        Stream labels, such as ``'split'`` or ``('synth', scenario, link_number)``.

    Returns
    -------
    :class:`numpy:numpy.random.Generator`
        Generator for the labelled stream.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.tools import get_rng

        a = get_rng(42, 'split').random(3)
        b = get_rng(42, 'split').random(3)
        print(a, (a == b).all())
    """
    DataHandler().handle_seed(seed)
    entropy = [int(seed)] + [zlib.crc32(str(label).encode('utf-8')) for label in labels]
    out = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
    return out

def five_number_summary(values):
    """
    Get the box plot summary of a set of values.

    Parameters
    ----------
    values : array-like
        Values to summarize. Non-finite values are ignored.

    Returns
    -------
    dict
        Keys ``min``, ``q1``, ``median``, ``q3`` and ``max``; all ``NaN`` when no finite values exist.
    """
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    keys = ['min', 'q1', 'median', 'q3', 'max']
    if values.size == 0:
        return {k: math.nan for k in keys}
    quantiles = np.quantile(np.sort(values), [0.0, 0.25, 0.5, 0.75, 1.0])
    out = {k: float(q) for k, q in zip(keys, quantiles)}
    return out

def to_jsonable(obj):
    """
    Convert nested results into plain JSON values.

    Numpy scalars and arrays become Python numbers and lists, ``NaN`` becomes ``None`` and infinities become the strings ``'inf'`` and ``'-inf'``.

    Parameters
    ----------
    obj : any
        Object to convert. Objects with a ``to_dict`` method are converted through it.

    Returns
    -------
    any
        JSON serializable object.
    """
    if hasattr(obj, 'to_dict') and not isinstance(obj, dict):
        return to_jsonable(obj.to_dict())
    if hasattr(obj, 'model_dump'):
        return to_jsonable(obj.model_dump())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return obj

def from_jsonable(value):
    """
    Convert a JSON float written by :func:`to_jsonable` back into a float.

    Parameters
    ----------
    value : float or str or None
        JSON value.

    Returns
    -------
    float
        ``NaN`` for ``None`` and signed infinity for ``'inf'`` / ``'-inf'``.
    """
    out = math.nan if value is None else float(value)
    return out
