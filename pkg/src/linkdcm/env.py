from msdss_base_dotenv import DotEnv

from .defaults import DEFAULT_DOTENV_KWARGS

class LinkDcmDotEnv(DotEnv):
    """
    Class to manage pipeline environment variables.

    * Extends :class:`msdss_base_dotenv:msdss_base_dotenv.core.DotEnv`
    * Environment variables are only used when neither a command line flag nor the ``--config`` file sets the value

    Parameters
    ----------
    seed : str
        Name of the environment variable holding the default root seed.
    out_dir : str
        Name of the environment variable holding the default output folder.
    env_file : str
        Path of the ``.env`` file to load when present.
    key_path : str or None
        Path of the key file used to decrypt the ``.env`` file.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.env import LinkDcmDotEnv

        # Get default env vars
        env = LinkDcmDotEnv()
        for k, name in env.mappings.items():
            print(f'{name}: {env.get(k)}')

        # Use different variable names
        alt_env = LinkDcmDotEnv(seed='LINKDCM_SEED_B')
        alt_env.set('seed', '7')
        print(alt_env.get('seed'))
        alt_env.clear()
    """
    def __init__(
        self,
        seed=DEFAULT_DOTENV_KWARGS['seed'],
        out_dir=DEFAULT_DOTENV_KWARGS['out_dir'],
        env_file=DEFAULT_DOTENV_KWARGS['env_file'],
        key_path=DEFAULT_DOTENV_KWARGS['key_path']):
        kwargs = locals()
        del kwargs['self']
        del kwargs['__class__']
        super().__init__(**kwargs)
