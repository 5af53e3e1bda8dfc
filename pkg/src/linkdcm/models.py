import json
import os

import numpy as np

from datetime import datetime
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from typing import Dict, List, Literal, Optional, Tuple, Union

from .defaults import *
from .handlers import *

class Model:
    """
    Template class to standardize estimated models.

    * Methods ``delete``, ``load``, and ``save`` persist the model as JSON through :meth:`encode` and :meth:`decode`
    * Methods ``input``, ``output`` and ``update`` are placeholders that subclasses such as :class:`linkdcm.estimator.MnlModel` define

    Parameters
    ----------
    file_path : str
        Path to save, load, and delete the model for persistence without the extension. Can be used in methods as ``self.file``.
    file_ext : str
        File extension to save the model in.
    can_input : bool
        Whether the method ``.input`` is defined and available.
    can_output : bool
        Whether the method ``.output`` is defined and available.
    can_update : bool
        Whether the method ``.update`` is defined and available.
    settings : dict
        Dict of initial custom settings to be used by model methods, such as optimizer options.

    Attributes
    ----------
    instance : obj or None
        The estimated model set by :meth:`input`. Initial value is ``None``.
    file : str
        File path to save the model in. Includes the ``file_ext``.
    last_loaded : :class:`datetime.datetime` or None
        The date and time that the model was last loaded. If ``None``, model has not been loaded.
    metadata : dict
        Flags ``can_input``, ``can_output`` and ``can_update``.
    settings : dict
        Same as parameter ``settings``.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.models import Model

        with tempfile.TemporaryDirectory() as folder:

            blank_model = Model(file_path=f'{folder}/blank')
            print(blank_model.can_load())

            # Save and load the (empty) instance
            blank_model.save()
            blank_model.load()
            print(blank_model.can_load())

            # Remove the saved file
            blank_model.delete()
    """
    def __init__(
        self,
        file_path='./model',
        file_ext='json',
        can_input=True,
        can_output=True,
        can_update=True,
        settings={}
    ):
        self.instance = None
        self.file = f'{file_path}.{file_ext}'
        self.last_loaded = None
        self.metadata = {
            'can_input': can_input,
            'can_output': can_output,
            'can_update': can_update
        }
        self.settings = dict(settings)

    def can_load(self):
        """
        Checks if a model can be loaded using the save file.

        Returns
        -------
        bool
            Whether the model can be loaded from the save file or not.
        """
        out = os.path.isfile(self.file)
        return out

    def decode(self, payload):
        """
        Convert a loaded JSON payload into the model instance.

        Parameters
        ----------
        payload : dict or None
            Parsed JSON content of the save file.

        Returns
        -------
        obj
            Model instance. The template returns the payload unchanged.
        """
        return payload

    def delete(self, force=False):
        """
        Deletes the saved model and sets the attribute ``.instance`` to ``None``.

        Parameters
        ----------
        force : bool
            Whether to force deletion regardless if the files exist or not.
        """
        self.instance = None
        if self.can_load() or force:
            os.remove(self.file)

    def encode(self, instance):
        """
        Convert the model instance into a JSON ready payload.

        Parameters
        ----------
        instance : obj
            Model instance.

        Returns
        -------
        dict or None
            JSON ready payload. The template returns the instance unchanged.
        """
        return instance

    def input(self, data):
        """
        Template method for input data to initialize the model.

        Should set ``self.instance`` to the estimated model.

        Parameters
        ----------
        data : :class:`linkdcm.ingest.ModelFrame`
            Data to estimate the model on.
        """
        pass

    def load(self, force=False):
        """
        Loads a saved model.

        If the model file has not been changed, skips loading based on ``last_loaded``.

        Parameters
        ----------
        force : bool
            Whether to force loading whether the saved model has been changed or not.
        """
        if force or self.needs_load():
            with open(self.file, 'r', encoding='utf-8') as file:
                self.instance = self.decode(json.load(file))
                self.last_loaded = datetime.now()

    def needs_load(self):
        """
        Check if model needs to be loaded again.

        Returns
        -------
        bool
            Whether the model needs to be loaded again based on whether the save ``file`` has changed.
        """
        last_modified = datetime.fromtimestamp(os.path.getmtime(self.file))
        out = last_modified > self.last_loaded if self.last_loaded else True
        return out

    def output(self, data):
        """
        Template method for a model to output data such as predictions.

        Parameters
        ----------
        data : :class:`linkdcm.ingest.ModelFrame`
            Data to use as input for the model.

        Returns
        -------
        :class:`pandas:pandas.DataFrame`
            Output data from the model.
        """
        pass

    def save(self):
        """
        Saves the model to a JSON file to be loaded.

        Keys keep their insertion order and no timestamps are written, so identical models give identical files.
        """
        with open(self.file, 'w', encoding='utf-8', newline='\n') as file:
            json.dump(self.encode(self.instance), file, indent=2, allow_nan=False)
            file.write('\n')

    def update(self, data):
        """
        Template method for updating a model with new data.

        Parameters
        ----------
        data : :class:`linkdcm.ingest.ModelFrame`
            Data to use for updating the model.
        """
        pass

def parse_model(schema, data):
    """
    Validate data against a pydantic schema, raising :class:`linkdcm.handlers.ConfigError` on failure.

    Parameters
    ----------
    schema : :class:`pydantic:pydantic.BaseModel`
        Schema class.
    data : dict or :class:`pydantic:pydantic.BaseModel` or None
        Data to validate. ``None`` gives the schema defaults.

    Returns
    -------
    :class:`pydantic:pydantic.BaseModel`
        Validated object.
    """
    if isinstance(data, schema):
        return data
    try:
        out = schema.model_validate(data or {})
    except ValidationError as error:
        first = error.errors()[0]
        location = '.'.join(str(k) for k in first['loc'])
        raise ConfigError(f'Invalid {schema.__name__}: {location}: {first["msg"]}', field=location) from error
    return out

def _check_length(values, n, name):
    if len(values) != n:
        raise ValueError(f'{name} must have {n} values, got {len(values)}')
    return [float(v) for v in values]

class LinkRecord(BaseModel):
    """
    One per-link per-timestep observation with the columns of the input table.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.models import LinkRecord
        from pprint import pprint

        pprint(list(LinkRecord.model_fields))
    """
    scenario: int
    link_number: int
    time: int
    free_flow_speed: float = Field(ge=0, allow_inf_nan=False)
    number_of_lanes: int = Field(ge=1)
    link_speed: float = Field(ge=0, allow_inf_nan=False)
    link_total_density: float = Field(ge=0, allow_inf_nan=False)
    link_density_per_lane: float = Field(ge=0, allow_inf_nan=False)
    link_total_flow: float = Field(ge=0, allow_inf_nan=False)
    link_flow_per_lane: float = Field(ge=0, allow_inf_nan=False)
    delay_on_link: float = Field(ge=0, allow_inf_nan=False)
    in_links_density_per_lane: float = Field(ge=0, allow_inf_nan=False)
    in_links_total_flow: float = Field(ge=0, allow_inf_nan=False)
    in_links_flow_per_lane: float = Field(ge=0, allow_inf_nan=False)
    flow_over_capacity: float = Field(ge=0, allow_inf_nan=False)
    ghg_er: float = Field(ge=0, allow_inf_nan=False)

class MnlParams(BaseModel):
    """
    Identified parameters of the dynamic multinomial logit.

    The low utility carries only ``asc_low``, the medium utility ``asc_medium`` plus ``beta_medium`` and the high utility ``beta_high`` with its constant fixed at 0. Coefficient vectors follow the attribute order link speed, density per lane, free flow speed, number of lanes, previous medium, previous high.

    Attributes
    ----------
    asc_low : float
        Constant of the low level.
    asc_medium : float
        Constant of the medium level.
    beta_medium : list(float)
        Six coefficients of the medium utility.
    beta_high : list(float)
        Six coefficients of the high utility.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.models import MnlParams

        params = MnlParams(asc_low=22.0, asc_medium=11.8)
        print(params.to_labels())
    """
    model_config = ConfigDict(extra='forbid')

    asc_low: float = 0.0
    asc_medium: float = 0.0
    beta_medium: List[float] = Field(default_factory=lambda: [0.0] * 6)
    beta_high: List[float] = Field(default_factory=lambda: [0.0] * 6)

    @field_validator('beta_medium', 'beta_high')
    @classmethod
    def _six_coefficients(cls, value, info):
        return _check_length(value, len(DEFAULT_DESIGN_COLUMNS), info.field_name)

    def to_vector(self):
        """Get the 14 parameters in serialization order."""
        out = np.array([self.asc_low, self.asc_medium] + self.beta_medium + self.beta_high, dtype=float)
        return out

    @classmethod
    def from_vector(cls, vector):
        """Build parameters from 14 values in serialization order."""
        vector = np.asarray(vector, dtype=float).ravel()
        if vector.size != len(DEFAULT_MNL_LABELS):
            raise ConfigError(f'Expected {len(DEFAULT_MNL_LABELS)} MNL parameters, got {vector.size}')
        out = cls(
            asc_low=vector[0],
            asc_medium=vector[1],
            beta_medium=vector[2:8].tolist(),
            beta_high=vector[8:14].tolist())
        return out

    def to_labels(self):
        """Get the parameters keyed by their reporting labels (``ASC_Low``, ``Beta_High_FreeSpeed``, ...)."""
        out = dict(zip(DEFAULT_MNL_LABELS, self.to_vector().tolist()))
        return out

    @classmethod
    def from_labels(cls, labels):
        """Build parameters from a mapping keyed by reporting labels."""
        missing = [k for k in DEFAULT_MNL_LABELS if k not in labels]
        if missing:
            raise ConfigError(f'Missing MNL parameter: {missing[0]}', field=missing[0])
        out = cls.from_vector([labels[k] for k in DEFAULT_MNL_LABELS])
        return out

class OlParams(BaseModel):
    """
    Identified parameters of the dynamic ordered logit.

    The upper threshold is ``mu2 = mu1 + exp(delta)`` so the thresholds are ordered for every parameter value.

    Attributes
    ----------
    eta : list(float)
        Six index coefficients in the attribute order of :class:`MnlParams`.
    mu1 : float
        Low/medium threshold.
    delta : float
        Log gap between the two thresholds.
    """
    model_config = ConfigDict(extra='forbid')

    eta: List[float] = Field(default_factory=lambda: [0.0] * 6)
    mu1: float = 0.0
    delta: float = 0.0

    @field_validator('eta')
    @classmethod
    def _six_coefficients(cls, value, info):
        return _check_length(value, len(DEFAULT_DESIGN_COLUMNS), info.field_name)

    @property
    def mu2(self):
        """Medium/high threshold."""
        return self.mu1 + float(np.exp(self.delta))

    @classmethod
    def from_thresholds(cls, eta, mu1, mu2):
        """
        Build parameters from the two thresholds.

        Parameters
        ----------
        eta : list(float)
            Six index coefficients.
        mu1 : float
            Low/medium threshold.
        mu2 : float
            Medium/high threshold, strictly above ``mu1``.

        Returns
        -------
        :class:`OlParams`
            Parameters with ``delta = log(mu2 - mu1)``.
        """
        if not mu2 > mu1:
            raise ConfigError(f'Thresholds must be increasing, got ({mu1}, {mu2})', mu1=mu1, mu2=mu2)
        out = cls(eta=list(eta), mu1=mu1, delta=float(np.log(mu2 - mu1)))
        return out

    def to_vector(self):
        """Get the 8 estimation parameters ``(eta, mu1, delta)``."""
        out = np.array(self.eta + [self.mu1, self.delta], dtype=float)
        return out

    @classmethod
    def from_vector(cls, vector):
        """Build parameters from the 8 estimation parameters ``(eta, mu1, delta)``."""
        vector = np.asarray(vector, dtype=float).ravel()
        if vector.size != len(DEFAULT_OL_LABELS):
            raise ConfigError(f'Expected {len(DEFAULT_OL_LABELS)} OL parameters, got {vector.size}')
        out = cls(eta=vector[:6].tolist(), mu1=vector[6], delta=vector[7])
        return out

    def to_labels(self):
        """Get the parameters keyed by reporting labels, with back-transformed thresholds."""
        out = dict(zip(DEFAULT_OL_REPORT_LABELS, self.eta + [self.mu1, self.mu2]))
        return out

    @classmethod
    def from_labels(cls, labels):
        """Build parameters from a mapping keyed by reporting labels."""
        missing = [k for k in DEFAULT_OL_REPORT_LABELS if k not in labels]
        if missing:
            raise ConfigError(f'Missing OL parameter: {missing[0]}', field=missing[0])
        out = cls.from_thresholds(
            [labels[k] for k in DEFAULT_OL_ETA_LABELS],
            labels['Mu_Low_Medium'],
            labels['Mu_Medium_High'])
        return out

class UtilityVector(BaseModel):
    """Systematic utilities of the low, medium and high levels."""
    v1: float
    v2: float
    v3: float

    def as_array(self):
        return np.array([self.v1, self.v2, self.v3], dtype=float)

class ProbabilityVector(BaseModel):
    """Probabilities of the low, medium and high levels."""
    p1: float
    p2: float
    p3: float

    def as_array(self):
        return np.array([self.p1, self.p2, self.p3], dtype=float)

class ColumnRange(BaseModel):
    """Observed range of one scaled column."""
    min: float
    max: float
    constant: bool = False

    @model_validator(mode='after')
    def _ordered(self):
        if not self.min <= self.max:
            raise ValueError(f'min {self.min} exceeds max {self.max}')
        return self

class ScalerParams(BaseModel):
    """
    Min-max scaler fitted per column.

    Attributes
    ----------
    columns : dict(:class:`ColumnRange`)
        Observed range keyed by column name, in fitting order.
    """
    columns: Dict[str, ColumnRange]

class OptimOptions(BaseModel):
    """
    Options of the maximum likelihood optimizer.

    Attributes
    ----------
    max_iter : int
        Maximum number of quasi-Newton iterations.
    grad_tol : float
        Convergence tolerance on the largest absolute score component, per observation.
    step_tol : float
        Convergence tolerance on the relative step size.
    init : list(float) or None
        Starting parameters; zeros when ``None``.
    """
    max_iter: int = Field(DEFAULT_OPTIM_OPTIONS['max_iter'], ge=1)
    grad_tol: float = Field(DEFAULT_OPTIM_OPTIONS['grad_tol'], gt=0)
    step_tol: float = Field(DEFAULT_OPTIM_OPTIONS['step_tol'], gt=0)
    init: Optional[List[float]] = None

class KMeansOptions(BaseModel):
    """Options of the 1-D K-means discretizer."""
    k: int = Field(DEFAULT_KMEANS_OPTIONS['k'], ge=1)
    restarts: int = Field(DEFAULT_KMEANS_OPTIONS['restarts'], ge=1)
    tol: float = Field(DEFAULT_KMEANS_OPTIONS['tol'], gt=0)
    max_iter: int = Field(DEFAULT_KMEANS_OPTIONS['max_iter'], ge=1)
    exact_limit: int = Field(DEFAULT_KMEANS_OPTIONS['exact_limit'], ge=0)

class AttributeLaw(BaseModel):
    """
    Sampling law of one synthetic attribute on [0, 1].

    Attributes
    ----------
    kind : str
        ``uniform``, ``beta`` (shape ``a``, ``b``) or ``discrete`` (``levels`` equally spaced points including 0 and 1).
    a : float
        First beta shape.
    b : float
        Second beta shape.
    levels : int
        Number of points of the discrete law.
    persistence : float
        Probability in [0, 1) that a link keeps its previous value at the next step.
    static : bool
        Whether the value is drawn once per link and kept for all steps.
    """
    kind: Literal['uniform', 'beta', 'discrete'] = 'uniform'
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    levels: int = Field(2, ge=2)
    persistence: float = Field(0.0, ge=0.0, lt=1.0)
    static: bool = False

class GeneratorSpec(BaseModel):
    """
    Specification of a synthetic link panel with known ground truth.

    Attributes
    ----------
    n_links : int
        Number of links.
    n_steps : int
        Number of timesteps per link.
    seed : int
        Root seed; each link draws from its own stream.
    scenario : int
        Scenario id written to the table.
    kind : str
        ``MNL`` or ``OL``, selects how ``truth`` is read.
    truth : :class:`MnlParams` or :class:`OlParams`
        Ground truth parameters.
    attribute_laws : dict(:class:`AttributeLaw`)
        Law per model attribute.
    initial_level_law : list(float)
        Probabilities of the three levels at the first step.
    raw_ranges : dict(tuple)
        Raw (unscaled) range per attribute used to write the table.
    """
    n_links: int = Field(DEFAULT_SYNTH_N_LINKS, ge=1)
    n_steps: int = Field(DEFAULT_SYNTH_N_STEPS, ge=1)
    seed: int = Field(0, ge=0)
    scenario: int = Field(1, ge=0)
    kind: Literal['MNL', 'OL'] = 'MNL'
    truth: Union[MnlParams, OlParams] = Field(default_factory=MnlParams)
    attribute_laws: Dict[str, AttributeLaw] = Field(
        default_factory=lambda: {k: AttributeLaw(**v) for k, v in DEFAULT_SYNTH_ATTRIBUTE_LAWS.items()})
    initial_level_law: List[float] = Field(default_factory=lambda: [1.0 / 3.0] * 3)
    raw_ranges: Dict[str, Tuple[float, float]] = Field(default_factory=lambda: dict(DEFAULT_SYNTH_RAW_RANGES))

    @model_validator(mode='before')
    @classmethod
    def _truth_by_kind(cls, data):
        if isinstance(data, dict) and isinstance(data.get('truth'), dict):
            data = dict(data)
            schema = OlParams if data.get('kind', 'MNL') == 'OL' else MnlParams
            data['truth'] = schema(**data['truth'])
        return data

    @model_validator(mode='after')
    def _consistent(self):
        expected = OlParams if self.kind == 'OL' else MnlParams
        if not isinstance(self.truth, expected):
            raise ValueError(f'truth must be {expected.__name__} for kind {self.kind}')
        for name in DEFAULT_ATTRIBUTES:
            if name not in self.attribute_laws:
                raise ValueError(f'attribute_laws missing {name}')
            if name not in self.raw_ranges:
                raise ValueError(f'raw_ranges missing {name}')
            low, high = self.raw_ranges[name]
            if not low < high:
                raise ValueError(f'raw_ranges[{name}] must be increasing')
        law = np.asarray(self.initial_level_law, dtype=float)
        if law.size != 3 or (law < 0).any() or abs(law.sum() - 1.0) > 1e-9:
            raise ValueError('initial_level_law must be 3 non-negative values summing to 1')
        return self

class PipelineConfig(BaseModel):
    """
    Configuration of an end-to-end pipeline run.

    ``seed`` and ``out_dir`` left as ``None`` fall back to the environment variables of :class:`linkdcm.env.LinkDcmDotEnv` and then to the defaults.

    Attributes
    ----------
    input : str or None
        Path to the observation table CSV.
    seed : int or None
        Root seed.
    n_train : int
        Training rows.
    n_test : int
        Test rows.
    k : int
        Number of emission levels, always 3.
    model : str
        ``mnl``, ``ol`` or ``both``.
    optim : :class:`OptimOptions`
        Optimizer options.
    kmeans : :class:`KMeansOptions`
        Discretizer options.
    out_dir : str or None
        Output folder of the report bundle.
    alternative : int
        Target level of the elasticity report.
    dropped : list(int)
        Alternatives dropped in the IIA tests.
    """
    input: Optional[str] = None
    seed: Optional[int] = Field(None, ge=0)
    n_train: int = Field(DEFAULT_N_TRAIN, ge=1)
    n_test: int = Field(DEFAULT_N_TEST, ge=1)
    k: Literal[3] = 3
    model: Literal['mnl', 'ol', 'both'] = DEFAULT_MODEL_SELECTION
    optim: OptimOptions = Field(default_factory=OptimOptions)
    kmeans: KMeansOptions = Field(default_factory=KMeansOptions)
    out_dir: Optional[str] = None
    alternative: Literal[1, 2, 3] = DEFAULT_ELASTICITY_ALTERNATIVE
    dropped: List[Literal[2, 3]] = Field(default_factory=lambda: list(DEFAULT_IIA_DROPPED))
