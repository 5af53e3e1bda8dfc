import json
import logging
import os
import shutil

from .defaults import *
from .handlers import *
from .ingest import write_frame_csv
from .tools import to_jsonable

logger = logging.getLogger(__name__)

class ModelsManager:
    """
    Class to manage :class:`linkdcm.models.Model` objects.

    Parameters
    ----------
    models : list(:class:`linkdcm.models.Model`) or dict(:class:`linkdcm.models.Model`)
        List or dict of available ``Model`` classes to use for creating and managing model instances.
        If ``list``, the class names are used as keys.
    folder : str
        The folder path to store models in. Created if it does not exist.
    handler : :class:`linkdcm.handlers.ModelsHandler` or bool or None
        Handler object to manage model operations.

        * If ``None``, then a default handler will be created
        * If ``False``, then inputs for model operations will not be handled

    suffix : str
        Suffix of the base files. A base file holds the model class name and the parameters used to create the instance.

    Attributes
    ----------
    models : dict(:class:`linkdcm.models.Model`)
        Available model classes keyed by class name.
    instances : dict(:class:`linkdcm.models.Model`)
        Model instances created with :meth:`create` or found in ``folder``.
    folder : str
        Same as parameter ``folder``.
    handler : :class:`linkdcm.handlers.ModelsHandler`
        Same as parameter ``handler``.
    suffix : str
        Same as parameter ``suffix``.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.estimator import MnlModel, OlModel
        from linkdcm.managers import ModelsManager
        from linkdcm.synthgen import generate, mnl_reference_spec

        table, levels, frame = generate(mnl_reference_spec(n_links=20, seed=1), return_frame=True)
        with tempfile.TemporaryDirectory() as folder_path:

            # Create manager and a model instance
            models_manager = ModelsManager([MnlModel, OlModel], folder=folder_path)
            models_manager.create('mnl', 'MnlModel')

            # Fit, predict and refit
            models_manager.input('mnl', frame)
            print(models_manager.output('mnl', frame).head())
            models_manager.update('mnl', frame)

            # Delete model instance
            models_manager.delete('mnl')
    """
    def __init__(
        self,
        models=[],
        folder=DEFAULT_MODELS_FOLDER,
        handler=None,
        suffix='_base.json'
    ):

        # (ModelsManager_attr) Set attributes
        handler = ModelsHandler() if handler is None else handler
        self.folder = folder
        self.models = {(m.__name__):m for m in models} if isinstance(models, list) else dict(models)
        self.instances = {}
        self.handler = handler
        self.suffix = suffix

        # (ModelsManager_load) Load base model instances
        if not os.path.isdir(folder):
            os.makedirs(folder)
        self._load_base_files()

    def _get_base_file(self, name):
        """Get the path of the base file of an instance."""
        out = os.path.join(self._get_folder(name), name + self.suffix)
        return out

    def _get_folder(self, name):
        """Get the path of the subfolder of an instance."""
        out = os.path.join(self.folder, name)
        return out

    def _get_instance(self, name):
        out = self.instances[name]
        return out

    def _get_model_name(self, name):
        """Get the class name of an instance."""
        out = type(self._get_instance(name)).__name__
        return out

    def _get_save_file(self, name):
        """
        Get the path of the save file of an instance without the extension.

        Parameters
        ----------
        name : str
            Unique name of the model instance.

        Returns
        -------
        str
            ``<folder>/<name>/<name>_model``, matching the bundle's ``<kind>_model.json`` naming.
        """
        out = os.path.join(self._get_folder(name), f'{name}_model')
        return out

    def _load_base_files(self, force=False):
        """
        Rebuild the instances found in the subfolders of ``folder``.

        Subfolders without a base file or naming an unknown model class are skipped.

        Parameters
        ----------
        force : bool
            Whether to rebuild instances already in ``.instances``.
        """
        names = sorted(name for name in os.listdir(self.folder) if os.path.isdir(os.path.join(self.folder, name)))
        for name in names:
            path = self._get_base_file(name)
            if (name in self.instances and not force) or not os.path.isfile(path):
                continue
            with open(path, 'r', encoding='utf-8') as file:
                base = json.load(file)
            if base.get('model') not in self.models:
                logger.warning('Skipping %s: unknown model %s', name, base.get('model'))
                continue
            instance = self.models[base['model']](file_path=self._get_save_file(name), **base.get('parameters', {}))
            instance.metadata['model'] = base['model']
            self.instances[name] = instance

    def create(self, name, model, parameters={}):
        """
        Creates a model instance.

        * Stores the instance in attribute ``instances``
        * Creates a subfolder and base file for the instance

        Parameters
        ----------
        name : str
            Unique name of the model instance.
        model : str
            Class name of the model, a key of attribute ``models``.
        parameters : dict
            JSON serializable keyword arguments passed to the model class, such as ``settings``.
        """

        # (ModelsManager_create_handle) Handle create operation
        if self.handler:
            self.handler.handle_create(name, model, self.instances, self.models)

        # (ModelsManager_create_subfolder) Create subfolder if not exists for model
        folder = self._get_folder(name)
        if not os.path.isdir(folder):
            os.makedirs(folder)

        # (ModelsManager_create_obj) Create model object
        instance = self.models[model](file_path=self._get_save_file(name), **parameters)
        instance.metadata['model'] = model

        # (ModelsManager_create_save) Save base file
        with open(self._get_base_file(name), 'w', encoding='utf-8', newline='\n') as base_file:
            json.dump({'model': model, 'parameters': to_jsonable(parameters)}, base_file, indent=2)
            base_file.write('\n')
        self.instances[name] = instance

    def delete(self, name, parameters={}):
        """
        Deletes a model instance, its saved model and its subfolder.

        Parameters
        ----------
        name : str
            Unique name of the model instance.
        parameters : dict
            Keyword arguments passed to :meth:`linkdcm.models.Model.delete`.
        """

        # (ModelsManager_delete_handle) Handle read operation
        if self.handler:
            self.handler.handle_read(name, self.instances)

        # (ModelsManager_delete_instance) Run instance deletion
        instance = self._get_instance(name)
        instance.delete(**parameters)

        # (ModelsManager_delete_folder) Delete folder
        shutil.rmtree(self._get_folder(name))
        del self.instances[name]

    def input(self, name, data, parameters={}):
        """
        Fit a model instance and save it.

        Parameters
        ----------
        name : str
            Unique name of the model instance.
        data : :class:`linkdcm.ingest.ModelFrame`
            Estimation frame.
        parameters : dict
            Keyword arguments passed to the instance's ``input``.
        """

        # (ModelsManager_input_handle) Handle input operation
        if self.handler:
            self.handler.handle_input(name, self.instances)

        # (ModelsManager_input_run) Fit and save
        instance = self._get_instance(name)
        instance.input(data, **parameters)
        instance.save()

    def output(self, name, data, parameters={}):
        """
        Get the output of a model instance.

        Parameters
        ----------
        name : str
            Unique name of the model instance.
        data : :class:`linkdcm.ingest.ModelFrame`
            Frame to predict.
        parameters : dict
            Keyword arguments passed to the instance's ``output``.

        Returns
        -------
        :class:`pandas:pandas.DataFrame`
            Output of the model instance.
        """

        # (ModelsManager_output_handle) Handle output operation
        if self.handler:
            self.handler.handle_output(name, self.instances)

        # (ModelsManager_output_run) Get model output
        instance = self._get_instance(name)
        if instance.can_load():
            instance.load()
        out = instance.output(data, **parameters)
        return out

    def read(self, name):
        """
        Get a fitted model instance, loading its saved model when needed.

        Parameters
        ----------
        name : str
            Unique name of the model instance.

        Returns
        -------
        :class:`linkdcm.models.Model`
            Model instance holding its fit.
        """
        if self.handler:
            self.handler.handle_output(name, self.instances)
        out = self._get_instance(name)
        if out.can_load():
            out.load()
        return out

    def update(self, name, data, parameters={}):
        """
        Refit a model instance on new data and save it.

        Parameters
        ----------
        name : str
            Unique name of the model instance.
        data : :class:`linkdcm.ingest.ModelFrame`
            Estimation frame.
        parameters : dict
            Keyword arguments passed to the instance's ``update``.
        """

        # (ModelsManager_update_handle) Handle update operation
        if self.handler:
            self.handler.handle_update(name, self.instances)

        # (ModelsManager_update_run) Update model instance
        instance = self._get_instance(name)
        if instance.can_load():
            instance.load()
        instance.update(data, **parameters)
        instance.save()

class BundleManager:
    """
    Class to write the artifacts of a run into one folder.

    * JSON files carry ``spec_version`` as their first key, keep insertion order, use ``indent=2`` and end with a newline
    * CSV files use ``\\n`` line endings and shortest round-trip float formatting
    * Every written file is tracked so a failed run can remove its partial outputs

    Parameters
    ----------
    folder : str
        Output folder, created if it does not exist.
    spec_version : str
        Schema version written into every JSON file.

    Attributes
    ----------
    files : dict(str)
        Artifact file name to path, in write order.

    Example
    -------
    .. jupyter-execute::

        import tempfile
        from linkdcm.managers import BundleManager

        with tempfile.TemporaryDirectory() as folder:
            bundle = BundleManager(folder)
            bundle.write_json('split', {'n_train': 10, 'n_test': 5})
            bundle.manifest({'seed': 42})
            print(list(bundle.files))
    """
    def __init__(self, folder=DEFAULT_OUT_DIR, spec_version=DEFAULT_SPEC_VERSION):
        self.folder = folder
        self.spec_version = spec_version
        self.files = {}
        if not os.path.isdir(folder):
            os.makedirs(folder)

    def path(self, name, kind=None):
        """
        Get the path of an artifact.

        Parameters
        ----------
        name : str
            Key of :data:`linkdcm.defaults.DEFAULT_BUNDLE_FILES`.
        kind : str or None
            Model kind filling ``{kind}`` in the file name, lower cased.

        Returns
        -------
        str
            Path under ``folder``.
        """
        file_name = DEFAULT_BUNDLE_FILES[name].format(kind=str(kind).lower())
        out = os.path.join(self.folder, file_name)
        return out

    def track(self, path):
        """Record a written file."""
        self.files[os.path.basename(path)] = path
        return path

    def write_json(self, name, payload, kind=None):
        """
        Write a JSON artifact.

        Parameters
        ----------
        name : str
            Artifact name.
        payload : dict or obj
            Content; objects with ``to_dict`` are converted through it.
        kind : str or None
            Model kind of per-model artifacts.

        Returns
        -------
        str
            Written path.
        """
        content = to_jsonable(payload)
        if isinstance(content, dict):
            content = {'spec_version': self.spec_version, **content}
        path = self.path(name, kind)
        with open(path, 'w', encoding='utf-8', newline='\n') as file:
            json.dump(content, file, indent=2, allow_nan=False)
            file.write('\n')
        out = self.track(path)
        return out

    def write_csv(self, name, data, kind=None):
        """
        Write a CSV artifact.

        Parameters
        ----------
        name : str
            Artifact name.
        data : :class:`pandas:pandas.DataFrame` or :class:`linkdcm.ingest.Table`
            Rows to write.
        kind : str or None
            Model kind of per-model artifacts.

        Returns
        -------
        str
            Written path.
        """
        path = self.path(name, kind)
        if hasattr(data, 'column_index'):
            write_frame_csv(data, path)
        else:
            data.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
        out = self.track(path)
        return out

    def add(self, path):
        """Track a file written by another writer, such as a saved model."""
        return self.track(path)

    def manifest(self, config=None):
        """
        Write ``manifest.json`` listing the artifacts and echoing the run configuration.

        Parameters
        ----------
        config : dict or None
            Configuration echo. Paths should be left out to keep the bundle independent of its location.

        Returns
        -------
        str
            Written path.
        """
        files = sorted(self.files)
        out = self.write_json('manifest', {'files': files, 'config': config or {}})
        return out

    def fail(self, error):
        """
        Remove the files written so far and write ``error.json``.

        Parameters
        ----------
        error : Exception
            Error of the run. :class:`linkdcm.handlers.LinkDcmError` records are written as is.

        Returns
        -------
        str
            Path of ``error.json``.
        """
        for path in self.files.values():
            if os.path.isfile(path):
                os.remove(path)
        self.files = {}
        record = error.to_record() if isinstance(error, LinkDcmError) else {'error': type(error).__name__, 'message': str(error)}
        out = self.write_json('error', record)
        logger.error('Run failed: %s', record.get('message'))
        return out
