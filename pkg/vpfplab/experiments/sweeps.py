"""
The sweep runners

Every runner takes a :class:`SweepConfig`, evaluates its observable for each
N in ``n_values`` over ``replications`` seeds, fits per-N medians and returns
a :class:`SweepResult` with the raw rows, the fits and the acceptance checks.
Where the expected rate carries a log N factor, medians are divided by log N
before fitting.
"""
import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, NamedTuple, Tuple

import numpy as np

from vpfplab.dynamics import (
    SimParams, consistency_residual, ell_consistency_residual, run_coupled)
from vpfplab.errors import SweepConfigError
from vpfplab.experiments import SWEEPS
from vpfplab.experiments.fitting import fit_power_law, summarize
from vpfplab.fields import (
    DensityModel, IsotropicGaussian, TruncatedGaussianVelocity, VelocityModel,
    sample_initial_phase)
from vpfplab.kernels import (
    DEFAULT_PROFILE, BlobProfile, KernelConfig, gradient_sup_norm,
    k1_l1_norm, kernel_l2_norm)
from vpfplab.logger import LOGGER
from vpfplab.measures import Projection, wasserstein_to_reference
from vpfplab.stats_oracles import (
    collision_binomial_tail, collision_bound, collision_candidate_count,
    collision_constant, collision_radius)

SWEEP_KINDS = ('consistency', 'ell_consistency', 'coupling', 'kernel_norms',
               'k1_l1', 'collision_count', 'wasserstein')

#: Tolerances on fitted exponents of random observables
DYNAMIC_TOLERANCE = 0.15
#: Tolerances on fitted exponents of the kernel norms
L2_TOLERANCE = 0.03
GRADIENT_TOLERANCE = 0.05
K1_TOLERANCE = 0.05
#: Largest fitted slope accepted for the coupled distance
COUPLING_MAX_SLOPE = -0.15
#: Largest accepted frequency of collision counts above the bound
COLLISION_MAX_EXCEEDANCE = 0.05

DEFAULT_COLUMNS = ('sweep_kind', 'N', 'seed', 'value', 'stderr')
WASSERSTEIN_COLUMNS = ('sweep_kind', 'N', 'seed', 't', 'p', 'method', 'value',
                       'stderr')


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    """
    Everything a sweep needs

    ``kernel`` is a template whose particle number is replaced by every N of
    the sweep. Kind-specific options:

    :param reference_factor:     M / N of the reference ensemble (coupling,
                                 wasserstein)
    :param p:                    Wasserstein order
    :param at_initial_time:      compare at t = 0 against fresh draws of ρ₀
                                 instead of at T against the reference ensemble
    :param reference_stream:     seed stream of the Wasserstein reference
                                 draw; 0 reuses the particles' own stream
    :param time_block_exponent:  λ₁, the time block is Δt = N^-λ₁
    :param k1_cutoff_exponent:   δ of the k₁ sweep in place of the kernel's;
                                 the finite-N factor 1 - N^{λ₂-δ} hides the
                                 rate for δ near λ₂
    :param kappa:                κ of the reported Wasserstein bound,
                                 defaults to just below its admissible maximum
    :param monotonicity_only:    coupling sweep without the slope check, for
                                 the reduced tier at small N
    """
    sweep_kind: str
    n_values: Tuple[int, ...]
    replications: int = 1
    base_seed: int = 0
    kernel: KernelConfig = None
    profile: BlobProfile = DEFAULT_PROFILE
    density: DensityModel = IsotropicGaussian(1.0)
    velocity: VelocityModel = TruncatedGaussianVelocity(1.0)
    sim: SimParams = SimParams()
    reference_factor: int = 10
    p: float = 2.0
    at_initial_time: bool = False
    reference_stream: int = 1
    time_block_exponent: float = 0.09
    k1_cutoff_exponent: float = None
    kappa: float = None
    monotonicity_only: bool = False
    threads: int = 1
    deterministic: bool = True

    def __post_init__(self):
        if self.sweep_kind not in SWEEP_KINDS:
            raise SweepConfigError("unknown sweep kind {!r}, choose from {}"
                                   .format(self.sweep_kind, SWEEP_KINDS))
        n_values = tuple(int(n) for n in self.n_values)
        object.__setattr__(self, 'n_values', n_values)
        if len(n_values) < 3:
            raise SweepConfigError(
                "a slope needs at least 3 values of N, got {}".format(
                    list(n_values)))
        if any(b <= a for a, b in zip(n_values, n_values[1:])):
            raise SweepConfigError("n_values must be strictly increasing, "
                                   "got {}".format(list(n_values)))
        if n_values[0] < 2:
            raise SweepConfigError("every N must be at least 2, got {}"
                                   .format(n_values[0]))
        if self.replications < 1:
            raise SweepConfigError("replications must be positive, got {}"
                                   .format(self.replications))
        if self.kernel is None:
            object.__setattr__(self, 'kernel', KernelConfig(n_values[0]))

    def kernel_config(self, n):
        return self.kernel.with_particles(n)

    def seed(self, n, replication, stream=0):
        """
        Seed of one replication, a pure function of the base seed, N, the
        replication index and the stream
        """
        sequence = np.random.SeedSequence(
            [self.base_seed, n, replication, stream])
        return int(sequence.generate_state(1, dtype=np.uint64)[0])

    def rng(self, n, replication, stream=0):
        return np.random.default_rng(self.seed(n, replication, stream))


class SweepRow(NamedTuple):
    sweep_kind: str
    n: int
    seed: int
    value: float
    stderr: float = 0.0
    extra: Tuple = ()

    def cells(self):
        return (self.sweep_kind, self.n, self.seed, *self.extra, self.value,
                self.stderr)


class AcceptanceCheck(NamedTuple):
    name: str
    passed: bool
    detail: str


@dataclasses.dataclass
class SweepResult:
    """
    Outcome of a sweep: raw rows, fits by name, acceptance checks and any
    extra report data
    """
    config: SweepConfig
    rows: List[SweepRow] = dataclasses.field(default_factory=list)
    fits: Dict[str, Any] = dataclasses.field(default_factory=dict)
    checks: List[AcceptanceCheck] = dataclasses.field(default_factory=list)
    report: Dict[str, Any] = dataclasses.field(default_factory=dict)
    columns: Tuple[str, ...] = DEFAULT_COLUMNS
    comments: List[str] = dataclasses.field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def kind(self):
        return self.config.sweep_kind

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def values(self, n, sweep_kind=None):
        sweep_kind = sweep_kind or self.kind
        return [row.value for row in self.rows
                if row.n == n and row.sweep_kind == sweep_kind]

    def check(self, name, passed, detail):
        check = AcceptanceCheck(name, bool(passed), detail)
        self.checks.append(check)
        LOGGER.info("{} {}: {}".format(
            'PASS' if check.passed else 'FAIL', name, detail))
        return check

    def check_slope(self, name, fit, expected, tolerance):
        return self.check(name, abs(fit.slope - expected) <= tolerance,
                          "slope {:.4f}, expected {:.4f} +- {}".format(
                              fit.slope, expected, tolerance))


def run_sweep(cfg):
    """
    Run the sweep registered for ``cfg.sweep_kind``
    """
    started = time.perf_counter()
    result = SWEEPS[cfg.sweep_kind](cfg)
    result.wall_clock = time.perf_counter() - started
    return result


def _replicate(cfg, n, job):
    """
    ``job(replication, seed) -> (value, stderr)`` over all replications,
    concurrently on ``cfg.threads`` threads, sorted by seed
    """
    seeds = [cfg.seed(n, r) for r in range(cfg.replications)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(job, range(cfg.replications), seeds))
    else:
        outcomes = [job(r, seed) for r, seed in zip(
            range(cfg.replications), seeds)]
    return sorted(zip(seeds, outcomes))


def _median_fit(result, log_factor=False, sweep_kind=None):
    """
    Fit per-N medians of the result rows, divided by log N if asked
    """
    ns = result.config.n_values
    points = [summarize(n, result.values(n, sweep_kind)) for n in ns]
    medians = [point.median for point in points]
    if log_factor:
        medians = [m / math.log(n) for m, n in zip(medians, ns)]
    return fit_power_law(ns, medians, per_point=points)


def _nonincreasing(values):
    return all(b <= a for a, b in zip(values, values[1:]))


def _consistency_like(cfg, residual, expected_slope):
    result = SweepResult(cfg)
    result.comments.append("fit of median(value) / log N against N")
    for n in cfg.n_values:
        config = cfg.kernel_config(n)
        LOGGER.info("{} sweep at N = {}".format(cfg.sweep_kind, n))

        def job(replication, seed):
            value = residual(config, cfg.profile, cfg.density, cfg.velocity,
                             n, np.random.default_rng(seed),
                             deterministic=cfg.deterministic)
            LOGGER.debug("N = {}, replication {}: {:.6g}".format(
                n, replication, value))
            return value, 0.0

        for seed, (value, stderr) in _replicate(cfg, n, job):
            result.rows.append(SweepRow(cfg.sweep_kind, n, seed, value,
                                        stderr))
    fit = result.fits['median_over_log_n'] = _median_fit(
        result, log_factor=True)
    result.check_slope(cfg.sweep_kind + ' rate', fit, expected_slope,
                       DYNAMIC_TOLERANCE)
    return result


@SWEEPS.sweep('consistency')
def run_consistency_sweep(cfg):
    """
    Median of max_i |K^N(X̄)_i - (k^N * ρ)(x̄_i)| at t = 0, expected to
    decay like N^{2δ-1} log N
    """
    return _consistency_like(cfg, consistency_residual,
                             2.0 * cfg.kernel.cutoff_exponent - 1.0)


@SWEEPS.sweep('ell_consistency')
def run_ell_consistency_sweep(cfg):
    """
    Median of max_i |L^N(X̄)_i - (ℓ^N * ρ)(x̄_i)| at t = 0, expected to
    scale like N^{3δ-1} log N
    """
    return _consistency_like(cfg, ell_consistency_residual,
                             3.0 * cfg.kernel.cutoff_exponent - 1.0)


@SWEEPS.sweep('coupling')
def run_coupling_sweep(cfg):
    """
    Median over seeds of max_t ‖Φ_t - Ψ_t‖ from coupled runs, with the
    verdict whether it is nonincreasing in N
    """
    result = SweepResult(cfg)
    initial_gaps = []
    for n in cfg.n_values:
        config = cfg.kernel_config(n)
        reference_size = cfg.reference_factor * n
        LOGGER.info("coupling sweep at N = {}, M = {}".format(
            n, reference_size))

        def job(replication, seed):
            rng = np.random.default_rng(seed)
            initial = sample_initial_phase(cfg.density, cfg.velocity, n, rng)
            reference = sample_initial_phase(cfg.density, cfg.velocity,
                                             reference_size, rng)
            record = run_coupled(
                config, cfg.profile, initial, reference,
                dataclasses.replace(cfg.sim, seed=seed),
                deterministic=cfg.deterministic)
            initial_gaps.append(record.distance_series[0])
            return record.max_distance, 0.0

        for seed, (value, stderr) in _replicate(cfg, n, job):
            result.rows.append(SweepRow(cfg.sweep_kind, n, seed, value,
                                        stderr))

    fit = result.fits['max_distance'] = _median_fit(result)
    medians = [point.median for point in fit.per_point]
    monotone = _nonincreasing(medians)
    result.report['verdict'] = ('monotone-decreasing' if monotone
                                else 'not-monotone')
    result.check('coupling monotonicity', monotone,
                 "medians {}".format(["{:.4g}".format(m) for m in medians]))
    if not cfg.monotonicity_only:
        result.check('coupling slope', fit.slope <= COUPLING_MAX_SLOPE,
                     "slope {:.4f}, required <= {}".format(
                         fit.slope, COUPLING_MAX_SLOPE))
    result.check('coupling initial distance', not any(initial_gaps),
                 "largest distance at t = 0: {}".format(max(initial_gaps)))
    return result


@SWEEPS.sweep('kernel_norms')
def run_kernel_norm_sweep(cfg):
    """
    ‖k^N‖₂ and sup|∇k^N| by radial quadrature, expected to grow like
    N^{δ/2} and N^{3δ}
    """
    result = SweepResult(cfg)
    for n in cfg.n_values:
        config = cfg.kernel_config(n)
        result.rows.append(SweepRow('kernel_norms:l2', n, cfg.base_seed,
                                    kernel_l2_norm(config, cfg.profile)))
        result.rows.append(SweepRow('kernel_norms:gradient', n, cfg.base_seed,
                                    gradient_sup_norm(config, cfg.profile)))
    delta = cfg.kernel.cutoff_exponent
    l2_fit = result.fits['l2'] = _median_fit(result,
                                             sweep_kind='kernel_norms:l2')
    gradient_fit = result.fits['gradient'] = _median_fit(
        result, sweep_kind='kernel_norms:gradient')
    result.check_slope('L2 norm growth', l2_fit, delta / 2.0, L2_TOLERANCE)
    result.check_slope('gradient sup growth', gradient_fit, 3.0 * delta,
                       GRADIENT_TOLERANCE)
    return result


@SWEEPS.sweep('k1_l1')
def run_k1_sweep(cfg):
    """
    ‖k₁^N‖₁ by radial quadrature, expected to decay like N^-λ₂
    """
    result = SweepResult(cfg)
    template = cfg.kernel
    if cfg.k1_cutoff_exponent is not None:
        template = dataclasses.replace(
            template, cutoff_exponent=cfg.k1_cutoff_exponent)
    result.comments.append("cutoff_exponent={}".format(
        template.cutoff_exponent))
    for n in cfg.n_values:
        result.rows.append(SweepRow(
            cfg.sweep_kind, n, cfg.base_seed,
            k1_l1_norm(template.with_particles(n), cfg.profile)))
    fit = result.fits['k1_l1'] = _median_fit(result)
    result.check_slope('k1 L1 decay', fit,
                       -template.wide_cutoff_exponent, K1_TOLERANCE)
    return result


def max_kappa(p, delta):
    """
    The supremum min{1/6, 1/(2p), δ} of admissible κ
    """
    return min(1.0 / 6.0, 1.0 / (2.0 * p), delta)


def wasserstein_rate_bound(n, kappa, lambda2):
    """
    N^{-κ+1-3λ₂} + N^-λ₂
    """
    return n ** (-kappa + 1.0 - 3.0 * lambda2) + n ** -lambda2


@SWEEPS.sweep('wasserstein')
def run_wasserstein_sweep(cfg):
    """
    W_p between the particle positions and an equal-size reference draw,
    at t = 0 against fresh samples of ρ₀ or at T against the reference
    ensemble, with the verdict whether medians decrease in N
    """
    result = SweepResult(cfg, columns=WASSERSTEIN_COLUMNS)
    t = 0.0 if cfg.at_initial_time else cfg.sim.horizon
    kappa = cfg.kappa
    if kappa is None:
        kappa = 0.99 * max_kappa(cfg.p, cfg.kernel.cutoff_exponent)
    bounds = result.report['rate_bound'] = {}

    for n in cfg.n_values:
        config = cfg.kernel_config(n)
        LOGGER.info("wasserstein sweep at N = {}".format(n))

        def job(replication, seed):
            rng = np.random.default_rng(seed)
            state = sample_initial_phase(cfg.density, cfg.velocity, n, rng)
            reference_rng = cfg.rng(n, replication, cfg.reference_stream)
            if cfg.reference_stream == 0:
                reference_rng = np.random.default_rng(seed)
            if cfg.at_initial_time:
                sampler = cfg.density.sample
            else:
                ensemble = sample_initial_phase(
                    cfg.density, cfg.velocity, cfg.reference_factor * n,
                    reference_rng)
                record = run_coupled(
                    config, cfg.profile, state, ensemble,
                    dataclasses.replace(cfg.sim, seed=seed),
                    deterministic=cfg.deterministic,
                    snapshot_every=cfg.sim.n_steps)
                state = record.phi_snapshots[-1].state
                cloud = record.reference_snapshots[-1].state.positions

                def sampler(rng, count):
                    return cloud[rng.choice(len(cloud), count, replace=False)]

            estimate = wasserstein_to_reference(
                state, sampler, cfg.p, reference_rng,
                projection=Projection.POSITION)
            return estimate

        for seed, estimate in _replicate(cfg, n, job):
            result.rows.append(SweepRow(
                cfg.sweep_kind, n, seed, estimate.value, estimate.stderr,
                extra=(t, cfg.p, estimate.method)))
        bounds[n] = wasserstein_rate_bound(n, kappa,
                                           cfg.kernel.wide_cutoff_exponent)

    fit = result.fits['wasserstein'] = _median_fit(result)
    medians = [point.median for point in fit.per_point]
    monotone = _nonincreasing(medians)
    result.report['verdict'] = ('monotone-decreasing' if monotone
                                else 'not-monotone')
    result.report['kappa'] = kappa
    result.check('wasserstein monotonicity', monotone,
                 "medians {}".format(["{:.4g}".format(m) for m in medians]))
    return result


@SWEEPS.sweep('collision_count')
def run_collision_count_sweep(cfg):
    """
    Largest collision candidate count per draw against
    2C* N (3N^-λ₂ + log N Δt^{3/2})², with the exceedance frequency per N
    """
    result = SweepResult(cfg)
    lambda2 = cfg.kernel.wide_cutoff_exponent
    c_star = result.report['c_star'] = collision_constant(cfg.density)
    exceedance = result.report['exceedance'] = {}
    binomial = result.report['binomial_tail'] = {}

    for n in cfg.n_values:
        dt_block = n ** -cfg.time_block_exponent
        bound = collision_bound(n, lambda2, dt_block, c_star)
        pair_probability = min(
            1.0, c_star * collision_radius(n, lambda2, dt_block) ** 2)
        binomial[n] = collision_binomial_tail(n, pair_probability, bound)

        def job(replication, seed):
            state = sample_initial_phase(cfg.density, cfg.velocity, n,
                                         np.random.default_rng(seed))
            counts = collision_candidate_count(state, lambda2, dt_block,
                                               dt_block, n)
            return float(np.max(counts)), 0.0

        outcomes = _replicate(cfg, n, job)
        for seed, (value, stderr) in outcomes:
            result.rows.append(SweepRow(cfg.sweep_kind, n, seed, value,
                                        stderr))
        frequency = np.mean([value > bound for _, (value, _) in outcomes])
        exceedance[n] = float(frequency)
        result.check("collision bound at N = {}".format(n),
                     frequency <= COLLISION_MAX_EXCEEDANCE,
                     "exceedance {:.3f} over bound {:.6g}".format(
                         frequency, bound))
    return result
