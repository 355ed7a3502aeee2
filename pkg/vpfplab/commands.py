"""
The vpfplab command line

Subcommands are registered with the :func:`command` decorator. Every command
function takes the resolved :class:`vpfplab.config.RunConfig`, the parsed
arguments and a dict collecting results for interactive mode, and returns an
exit code: 0 on success, 1 when an acceptance check failed, 2 on errors
"""
import logging
import os
import time
from argparse import ArgumentParser

import numpy as np
from IPython import start_ipython
from path import Path

import vpfplab
from vpfplab.config import ENV_SEED, ENV_THREADS, load_config
from vpfplab.dynamics import run_coupled, run_ensemble
from vpfplab.dynamics.io import write_json, write_trajectory_csv
from vpfplab.errors import VpfpError
from vpfplab.experiments import SWEEPS, run_sweep, write_sweep
from vpfplab.fields import sample_initial_phase
from vpfplab.logger import LOGGER
from vpfplab.measures import (
    EXACT_CUTOVER, SLICED_PROJECTIONS, from_phase, wasserstein_exact,
    wasserstein_sliced)
from vpfplab.plots import emit_plot_scripts
from vpfplab.selftest import run_selftest

PARSER = ArgumentParser(
    'vpfplab', description="Regularized Vlasov-Poisson-Fokker-Planck "
    "particle experiments")
PARSER.add_argument('--config', help="path of the INI config file")
PARSER.add_argument('--output-dir', help="directory for all output files")
PARSER.add_argument('--seed', type=int,
                    help="base seed, overrides ${}".format(ENV_SEED))
PARSER.add_argument('--threads', type=int,
                    help="worker threads, overrides ${}".format(ENV_THREADS))
MODE = PARSER.add_mutually_exclusive_group()
MODE.add_argument('--deterministic', dest='deterministic',
                  action='store_true', default=None,
                  help="bit-stable results across thread counts")
MODE.add_argument('--fast', dest='deterministic', action='store_false',
                  help="one chunk of particles per thread")
PARSER.add_argument('--allow-out-of-theorem-range', action='store_true',
                    help="accept cut-off exponents outside the convergence "
                         "theorem with a warning; wide_cutoff_exponent must "
                         "still not exceed cutoff_exponent")
PARSER.add_argument('-v', '--verbose', action='store_true',
                    help="log debug messages")
PARSER.add_argument('-i', '--interactive', action='store_true',
                    help="start an IPython shell with the run results "
                         "instead of exiting")
PARSER.set_defaults(command=None)

SUBCOMMANDS = PARSER.add_subparsers(dest='subcommand', metavar='COMMAND')

#: Registered command functions by subcommand name
COMMANDS = {}


def command(func):
    """
    Decorator for registering `func` as vpfplab subcommand, invoked from the
    command line like::

       vpfplab func-name

    Whereby underscores in the function name are turned into hyphens. The
    subparser is available as ``func.parser`` for adding options

    Every command function must return a vpfplab exit code number
    """
    name = func.__name__.replace('_', '-')
    parser = SUBCOMMANDS.add_parser(
        name, help=func.__doc__.strip().splitlines()[0],
        description=func.__doc__)
    parser.set_defaults(command=func)
    func.parser = parser
    COMMANDS[name] = func
    return func


def _sweeps(config, results, kinds, **overrides):
    output_dir = Path(config.output_dir).makedirs_p()
    code = 0
    for kind in kinds:
        cfg = config.sweep_config(kind, **{
            key: value for key, value in overrides.items()
            if value is not None})
        result = run_sweep(cfg)
        write_sweep(result, output_dir, config.sha256())
        results[kind] = result
        if not result.passed:
            code = 1
    return code


@command
def simulate(config, args, results):
    """
    Evolve the coupled particle systems and write trajectories

    Writes trajectory.csv with snapshots of the interacting system (phi),
    the mean-field system (psi) and, if asked, the reference ensemble, and
    summary.json with the distance series and Wasserstein distances between
    the phi and psi empirical measures at the snapshot times
    """
    output_dir = Path(config.output_dir).makedirs_p()
    started = time.perf_counter()
    seed = config.sim.seed
    initial = sample_initial_phase(
        config.density, config.velocity, config.kernel.n_particles,
        np.random.default_rng(np.random.SeedSequence([seed, 0])))
    reference = sample_initial_phase(
        config.density, config.velocity, config.reference_size,
        np.random.default_rng(np.random.SeedSequence([seed, 1])))
    snapshot_every = config.snapshot_every or config.sim.record_every
    config_hash = config.sha256()
    summary = {'config': config.as_dict(), 'config_sha256': config_hash,
               'seeds': {'noise': seed, 'initial': [seed, 0],
                         'reference': [seed, 1]}}

    if args.no_coupling:
        snapshots = run_ensemble(
            config.kernel, config.profile, initial, config.sim,
            threads=config.threads, deterministic=config.deterministic)
        write_trajectory_csv(output_dir / 'trajectory.csv',
                             [('phi', snapshots)], config_hash)
        results['snapshots'] = snapshots
    else:
        record = run_coupled(
            config.kernel, config.profile, initial, reference, config.sim,
            threads=config.threads, deterministic=config.deterministic,
            snapshot_every=snapshot_every)
        tagged = [('phi', record.phi_snapshots),
                  ('psi', record.psi_snapshots)]
        if args.with_reference:
            tagged.append(('reference', record.reference_snapshots))
        write_trajectory_csv(output_dir / 'trajectory.csv', tagged,
                             config_hash)
        summary.update({
            'times': record.times,
            'distance': record.distance_series,
            'max_distance': record.max_distance,
            'wasserstein': _snapshot_wasserstein(record, args.p, seed),
        })
        results['record'] = record
        LOGGER.info("max distance {:.6g}".format(record.max_distance))

    summary['wall_clock'] = time.perf_counter() - started
    write_json(output_dir / 'summary.json', summary)
    return 0


simulate.parser.add_argument(
    '--no-coupling', action='store_true',
    help="evolve only the interacting system")
simulate.parser.add_argument(
    '--with-reference', action='store_true',
    help="include the reference ensemble in trajectory.csv")
simulate.parser.add_argument(
    '--p', type=float, default=2.0, help="Wasserstein order")


def _snapshot_wasserstein(record, p, seed):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    distances = []
    for (time_, phi), (_, psi) in zip(record.phi_snapshots,
                                      record.psi_snapshots):
        mu, nu = from_phase(phi), from_phase(psi)
        if mu.count <= EXACT_CUTOVER:
            value, stderr, method = wasserstein_exact(mu, nu, p), 0.0, 'exact'
        else:
            value, stderr, method = wasserstein_sliced(
                mu, nu, p, SLICED_PROJECTIONS, rng)
        distances.append({'time': time_, 'value': value, 'stderr': stderr,
                          'method': method})
    return distances


@command
def coupling_sweep(config, args, results):
    """
    Median max-distance of coupled runs over N, with monotonicity verdict
    """
    return _sweeps(config, results, ['coupling'])


@command
def consistency_sweep(config, args, results):
    """
    Consistency residual of the pairwise force (or of L^N with --ell) at
    t = 0 over N
    """
    return _sweeps(config, results,
                   ['ell_consistency' if args.ell else 'consistency'])


consistency_sweep.parser.add_argument(
    '--ell', action='store_true', help="sweep the majorant sums L^N")


@command
def kernel_sweep(config, args, results):
    """
    Growth of ‖k^N‖₂ and sup|∇k^N| and decay of ‖k₁^N‖₁ over N
    """
    return _sweeps(config, results, ['kernel_norms', 'k1_l1'])


@command
def wasserstein_sweep(config, args, results):
    """
    Wasserstein distance of the particle positions to a reference draw
    over N
    """
    return _sweeps(config, results, ['wasserstein'], p=args.p,
                   at_initial_time=args.initial_time or None)


wasserstein_sweep.parser.add_argument(
    '--p', type=float, help="Wasserstein order")
wasserstein_sweep.parser.add_argument(
    '--initial-time', action='store_true',
    help="compare at t = 0 against fresh draws of the initial density")


@command
def collision_sweep(config, args, results):
    """
    Exceedance frequency of collision candidate counts over their bound
    """
    return _sweeps(config, results, ['collision_count'])


@command
def selftest(config, args, results):
    """
    Run the oracle suite and print one PASS or FAIL line per oracle
    """
    report = results['selftest'] = run_selftest()
    return 0 if all(passed for _, passed, _ in report) else 1


@command
def emit_plots(config, args, results):
    """
    Write a gnuplot script next to every sweep CSV in the output directory
    """
    if not Path(config.output_dir).isdir():
        LOGGER.error("no output directory {}".format(config.output_dir))
        return 2
    results['scripts'] = emit_plot_scripts(config.output_dir)
    return 0


@command
def list_sweeps(config, args, results):
    """
    List all registered sweep kinds
    """
    for kind, runner in SWEEPS.items():
        print("[{}] {}".format(kind, runner.__doc__.strip().splitlines()[0]))
    return 0


def dispatch(subcommand, config, args=None, results=None):
    """
    Run `subcommand` on `config`

    :return: the exit code, 2 for unknown subcommands and vpfplab errors
    """
    func = COMMANDS.get(subcommand)
    if func is None:
        LOGGER.error("unknown subcommand {!r}, choose from {}".format(
            subcommand, sorted(COMMANDS)))
        return 2
    if args is None:
        args = func.parser.parse_args([])
    try:
        return func(config, args, {} if results is None else results)
    except VpfpError as error:
        LOGGER.error("{}: {}".format(type(error).__name__, error))
        return 2


def main(argv=None, environ=None):
    """
    Parse the command line, resolve the config and dispatch
    """
    args = PARSER.parse_args(argv)
    if args.verbose:
        LOGGER.setLevel(logging.DEBUG)
    if args.command is None:
        PARSER.print_help()
        return 2
    try:
        config = load_config(
            args.config, environ=os.environ if environ is None else environ,
            overrides={
                'sim.seed': args.seed,
                'output.threads': args.threads,
                'output.deterministic': args.deterministic,
                'output.directory': args.output_dir,
            },
            allow_out_of_theorem_range=args.allow_out_of_theorem_range)
    except (VpfpError, OSError) as error:
        LOGGER.error("{}: {}".format(type(error).__name__, error))
        return 2

    results = {}
    code = dispatch(args.subcommand, config, args, results)
    if args.interactive:
        start_ipython([], user_ns=dict(results, config=config,
                                       vpfplab=vpfplab))
    return code
