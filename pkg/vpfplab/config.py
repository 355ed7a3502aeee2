"""
Run configuration: INI documents with the flat sections ``[kernel]``,
``[density]``, ``[sim]``, ``[sweep]`` and ``[output]``

A minimal document only names the particle number::

    [kernel]
    n_particles = 256

Values resolve as command-line flags > environment (``VPFPLAB_SEED``,
``VPFPLAB_THREADS``) > config file > defaults. The resolved config is
hashed, and the hash goes into every output file
"""
import configparser
import dataclasses
import fractions
import hashlib
import json

from path import Path

from vpfplab.dynamics.state import SimParams
from vpfplab.errors import ConfigError, ConfigParseError
from vpfplab.experiments.sweeps import SweepConfig
from vpfplab.fields import DensityModel, VelocityModel
from vpfplab.kernels.blob import blob_profile
from vpfplab.kernels.coulomb import KernelConfig, theorem_window
from vpfplab.logger import LOGGER

ENV_SEED = 'VPFPLAB_SEED'
ENV_THREADS = 'VPFPLAB_THREADS'

DEFAULT_OUTPUT_DIR = 'vpfplab-output'

#: Default N values of the sweeps that do not bring their own
DEFAULT_N_VALUES = (1000, 2000, 4000, 8000, 16000)


def number(raw):
    """
    A float that may also be written as a fraction

    >>> number("1/3") == 1 / 3
    True
    """
    return float(fractions.Fraction(raw))


# key aliases, mapped onto their canonical names
ALIASES = {
    'kernel': {'delta': 'cutoff_exponent',
               'lambda2': 'wide_cutoff_exponent', 'a': 'strength'},
    'sweep': {'lambda1': 'time_block_exponent'},
    'sim': {'m': 'reference_size', 't': 'horizon'},
}

# key -> converter, per section
SCHEMA = {
    'kernel': {
        'n_particles': int,
        'strength': number,
        'cutoff_exponent': number,
        'wide_cutoff_exponent': number,
        'blob': str,
        'blob_power': int,
    },
    'density': {
        'kind': str,
        'std': number,
        'radius': number,
        'blob_power': int,
        'velocity_kind': str,
        'velocity_std': number,
        'velocity_cutoff': number,
        'velocity_radius': number,
    },
    'sim': {
        'sigma': number,
        'horizon': number,
        'dt': number,
        'seed': int,
        'record_every': int,
        'reference_size': int,
        'kick_drift': 'boolean',
        'snapshot_every': int,
    },
    'sweep': {
        'n_values': 'int_list',
        'replications': int,
        'base_seed': int,
        'p': number,
        'at_initial_time': 'boolean',
        'reference_stream': int,
        'reference_factor': int,
        'time_block_exponent': number,
        'k1_cutoff_exponent': number,
        'kappa': number,
        'monotonicity_only': 'boolean',
    },
    'output': {
        'directory': str,
        'threads': int,
        'deterministic': 'boolean',
    },
}

_BOOLEANS = configparser.RawConfigParser.BOOLEAN_STATES


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """
    The resolved configuration of a vpfplab run
    """
    kernel: KernelConfig
    profile: object
    density: DensityModel
    velocity: VelocityModel
    sim: SimParams
    reference_size: int
    snapshot_every: int
    sweep: dict
    output_dir: str = DEFAULT_OUTPUT_DIR
    threads: int = 1
    deterministic: bool = True

    def sweep_config(self, kind, **overrides):
        """
        The :class:`SweepConfig` of sweep `kind` with this run's parameters
        """
        options = dict(self.sweep)
        options.setdefault('base_seed', self.sim.seed)
        options.update(overrides)
        options['n_values'] = tuple(options.get('n_values')
                                    or DEFAULT_N_VALUES)
        return SweepConfig(
            sweep_kind=kind, kernel=self.kernel, profile=self.profile,
            density=self.density, velocity=self.velocity, sim=self.sim,
            threads=self.threads, deterministic=self.deterministic,
            **options)

    def as_dict(self):
        return {
            'kernel': dataclasses.asdict(self.kernel),
            'profile': repr(self.profile),
            'density': repr(self.density),
            'velocity': repr(self.velocity),
            'sim': dataclasses.asdict(self.sim),
            'reference_size': self.reference_size,
            'snapshot_every': self.snapshot_every,
            'sweep': {key: list(value) if isinstance(value, tuple) else value
                      for key, value in self.sweep.items()},
            'output_dir': str(self.output_dir),
            'threads': self.threads,
            'deterministic': self.deterministic,
        }

    def sha256(self):
        """
        SHA-256 of the canonical JSON of everything that can change results;
        the output directory and, in deterministic mode, the thread count
        cannot
        """
        data = self.as_dict()
        del data['output_dir']
        if self.deterministic:
            del data['threads']
        canonical = json.dumps(data, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _read_document(text):
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=('#', ';'))
    try:
        parser.read_string(text)
    except configparser.Error as error:
        line = getattr(error, 'lineno', None)
        if line is None and getattr(error, 'errors', None):
            line = error.errors[0][0]
        raise ConfigParseError(error.message.splitlines()[0],
                               line or 1) from error
    return parser


def _convert(key_path, converter, raw):
    try:
        if converter == 'boolean':
            return _BOOLEANS[raw.strip().lower()]
        if converter == 'int_list':
            return tuple(int(item) for item in raw.replace(',', ' ').split())
        return converter(raw.strip())
    except (KeyError, ValueError, ZeroDivisionError):
        raise ConfigError(key_path, raw, "expected {}".format(
            getattr(converter, '__name__', converter))) from None


def _collect(parser):
    """
    Canonical ``{section: {key: value}}`` of converted values
    """
    values = {section: {} for section in SCHEMA}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(section, None, "unknown section, expected one "
                              "of {}".format(sorted(SCHEMA)))
        for key, raw in parser.items(section):
            key = ALIASES.get(section, {}).get(key, key)
            if key not in SCHEMA[section]:
                raise ConfigError("{}.{}".format(section, key), raw,
                                  "unknown key")
            values[section][key] = _convert("{}.{}".format(section, key),
                                            SCHEMA[section][key], raw)
    return values


def _theorem_range(key_path, value, message, allow_out_of_range):
    if allow_out_of_range:
        LOGGER.warning("{} = {}: {} (accepted)".format(
            key_path, value, message))
    else:
        raise ConfigError(key_path, value, message)


def _check_theorem_ranges(kernel_values, sweep, allow_out_of_range):
    delta = kernel_values.get('cutoff_exponent', 1.0 / 3.0)
    lambda2 = kernel_values.get('wide_cutoff_exponent', 0.3)
    if not 1.0 / 3.0 <= delta < 1.0:
        _theorem_range('kernel.cutoff_exponent', delta,
                       "cutoff_exponent must lie in [1/3, 1)",
                       allow_out_of_range)
    if lambda2 > delta:
        raise ConfigError(
            'kernel.wide_cutoff_exponent', lambda2,
            "must not exceed cutoff_exponent {}, lower wide_cutoff_exponent "
            "together with cutoff_exponent".format(delta))
    if not 0 < lambda2 < 1.0 / 3.0:
        _theorem_range('kernel.wide_cutoff_exponent', lambda2,
                       "wide_cutoff_exponent must lie in (0, 1/3)",
                       allow_out_of_range)
        return
    lambda1 = sweep.get('time_block_exponent', 0.09)
    if 0 < lambda1 < lambda2 / 3.0:
        lower, upper = theorem_window(lambda1, lambda2)
        if not lower <= delta < upper:
            LOGGER.warning(
                "cutoff_exponent {} lies outside the convergence window "
                "[{:.4f}, {:.4f}) of lambda1 = {}, lambda2 = {}".format(
                    delta, lower, upper, lambda1, lambda2))


def _build(key_path, factory, **params):
    try:
        return factory(**params)
    except KeyError as error:
        raise ConfigError(key_path, error.args[0], "unknown kind") from None
    except (TypeError, ValueError) as error:
        raise ConfigError(key_path, params, str(error)) from None


def parse_config(text, environ=None, overrides=None,
                 allow_out_of_theorem_range=False):
    """
    Parse and validate a config document

    :param text:      the INI document
    :param environ:   environment mapping consulted for ``VPFPLAB_SEED`` and
                      ``VPFPLAB_THREADS``
    :param overrides: command-line values by dotted key path, like
                      ``{'sim.seed': 7}``; ``None`` values are ignored
    :raises ConfigParseError: on syntax errors
    :raises ConfigError:      on invalid values, naming the key path
    """
    values = _collect(_read_document(text))

    environ = environ or {}
    for variable, key_path in ((ENV_SEED, 'sim.seed'),
                               (ENV_THREADS, 'output.threads')):
        if environ.get(variable):
            section, key = key_path.split('.')
            values[section][key] = _convert(variable, int,
                                            environ[variable])
            if key == 'seed':
                values['sweep']['base_seed'] = values[section][key]
    for key_path, value in (overrides or {}).items():
        if value is not None:
            section, key = key_path.split('.')
            values[section][key] = value
            if key_path == 'sim.seed':
                values['sweep']['base_seed'] = value

    kernel_values = dict(values['kernel'])
    if 'n_particles' not in kernel_values:
        raise ConfigError('kernel.n_particles', None, "required key missing")
    profile = _build('kernel.blob', blob_profile,
                     name=kernel_values.pop('blob', 'bump'),
                     power=kernel_values.pop('blob_power', 3))
    _check_theorem_ranges(kernel_values, values['sweep'],
                          allow_out_of_theorem_range)
    kernel = _build('kernel', KernelConfig, **kernel_values)

    density_values = dict(values['density'])
    velocity_params = {
        key[len('velocity_'):]: density_values.pop(key)
        for key in list(density_values) if key.startswith('velocity_')}
    velocity_kind = velocity_params.pop('kind', 'truncated-gaussian')
    density_kind = density_values.pop('kind', 'isotropic-gaussian')
    if density_kind == 'radial-custom':
        density_values['profile'] = blob_profile(
            power=density_values.pop('blob_power', 3))
    density = _build('density.kind', DensityModel.create, kind=density_kind,
                     **density_values)
    velocity = _build('density.velocity_kind', VelocityModel.create,
                      kind=velocity_kind, **velocity_params)

    sim_values = dict(values['sim'])
    reference_size = sim_values.pop('reference_size',
                                    10 * kernel.n_particles)
    snapshot_every = sim_values.pop('snapshot_every', 0)
    sim = _build('sim', SimParams, **sim_values)
    if reference_size < 1:
        raise ConfigError('sim.reference_size', reference_size,
                          "must be positive")

    output = values['output']
    threads = output.get('threads', 1)
    if threads < 1:
        raise ConfigError('output.threads', threads, "must be positive")

    return RunConfig(
        kernel=kernel, profile=profile, density=density, velocity=velocity,
        sim=sim, reference_size=reference_size,
        snapshot_every=snapshot_every, sweep=values['sweep'],
        output_dir=output.get('directory', DEFAULT_OUTPUT_DIR),
        threads=threads, deterministic=output.get('deterministic', True))


def load_config(path=None, environ=None, overrides=None,
                allow_out_of_theorem_range=False):
    """
    :func:`parse_config` on the file at `path`, or on an empty document
    with a default particle number when no file is given
    """
    if path is None:
        text = "[kernel]\nn_particles = 256\n"
    else:
        with Path(path).open(encoding='utf-8') as config_file:
            text = config_file.read()
    return parse_config(text, environ=environ, overrides=overrides,
                        allow_out_of_theorem_range=allow_out_of_theorem_range)
