import json
import math

import numpy as np
import pytest
from path import Path

from vpfplab.config import load_config
from vpfplab.dynamics import SimParams
from vpfplab.errors import DegenerateDataError, SweepConfigError
from vpfplab.experiments import (
    SWEEPS, SweepConfig, SweepsRegistry, fit_power_law, run_sweep,
    summarize, wasserstein_rate_bound, write_sweep)
from vpfplab.experiments.sweeps import max_kappa
from vpfplab.kernels import KernelConfig, k1_l1_norm

CONFIGS = Path(__file__).dirname().parent / 'configs'


class TestRegistry:

    def test_sweeps(self):
        assert set(SWEEPS.names()) == {
            'consistency', 'ell_consistency', 'coupling', 'kernel_norms',
            'k1_l1', 'wasserstein', 'collision_count'}
        assert SWEEPS['collision-count'] is SWEEPS['collision_count']
        with pytest.raises(KeyError):
            SWEEPS['energy']

    def test_decorator(self):
        registry = SweepsRegistry()

        @registry.sweep('dummy')
        def run_dummy(cfg):
            return cfg

        assert 'dummy' in registry
        assert registry['dummy'] is run_dummy
        assert list(registry.items()) == [('dummy', run_dummy)]
        assert repr(registry) == "{'dummy': 'run_dummy'}"


class TestFitPowerLaw:

    def test_exact(self):
        xs = [10, 100, 1000, 10000]
        fit = fit_power_law(xs, [3.0 * x ** -0.5 for x in xs])
        assert fit.slope == pytest.approx(-0.5, rel=1e-12)
        assert math.exp(fit.intercept) == pytest.approx(3.0, rel=1e-12)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.slope_stderr == pytest.approx(0.0, abs=1e-12)

    def test_noisy(self, rng):
        xs = np.geomspace(100, 1e6, 12)
        ys = xs ** 0.25 * np.exp(0.05 * rng.standard_normal(12))
        fit = fit_power_law(xs, ys)
        assert abs(fit.slope - 0.25) <= 4.0 * fit.slope_stderr
        assert 0.9 < fit.r_squared < 1.0

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError, match="degenerate zero"):
            fit_power_law([1, 2, 3], [0.0, 0.0, 0.0])
        with pytest.raises(DegenerateDataError):
            fit_power_law([1, 2, 3], [1.0, -1.0, 2.0])
        with pytest.raises(ValueError):
            fit_power_law([1, 2], [1.0, 2.0])
        with pytest.raises(ValueError):
            fit_power_law([1, 2, 3], [1.0, 2.0])

    def test_summarize(self):
        point = summarize(100, [1.0, 2.0, 3.0, 4.0, 100.0])
        assert point == (100, 3.0, 2.0)
        assert fit_power_law([1, 2, 4], [1, 2, 4], per_point=[point]) \
            .as_dict()['per_point'] == [
                {'n': 100, 'median': 3.0, 'spread': 2.0}]


class TestSweepConfig:

    @pytest.mark.parametrize('kwargs', [
        dict(sweep_kind='energy', n_values=(10, 20, 40)),
        dict(sweep_kind='consistency', n_values=(10, 20)),
        dict(sweep_kind='consistency', n_values=(10, 40, 20)),
        dict(sweep_kind='consistency', n_values=(1, 20, 40)),
        dict(sweep_kind='consistency', n_values=(10, 20, 40),
             replications=0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(SweepConfigError):
            SweepConfig(**kwargs)

    def test_defaults(self):
        cfg = SweepConfig('k1_l1', [100, 200, 400])
        assert cfg.n_values == (100, 200, 400)
        assert cfg.kernel == KernelConfig(100)
        assert cfg.kernel_config(400).n_particles == 400

    def test_seeds(self):
        cfg = SweepConfig('consistency', (10, 20, 40), base_seed=5)
        assert cfg.seed(10, 0) == SweepConfig(
            'coupling', (10, 20, 40), base_seed=5).seed(10, 0)
        seeds = {cfg.seed(n, r, s) for n in cfg.n_values for r in range(3)
                 for s in range(2)}
        assert len(seeds) == 18
        assert cfg.rng(10, 1).random() == cfg.rng(10, 1).random()


class TestWassersteinBound:

    def test_kappa(self):
        assert max_kappa(2.0, 1.0 / 3.0) == pytest.approx(1.0 / 6.0)
        assert max_kappa(4.0, 1.0 / 3.0) == pytest.approx(1.0 / 8.0)
        assert max_kappa(1.0, 0.1) == pytest.approx(0.1)

    def test_rate_bound(self):
        assert wasserstein_rate_bound(1000, 0.1, 0.3) == pytest.approx(
            1000 ** 0.0 + 1000 ** -0.3)


class TestKernelSweeps:

    def test_kernel_norms(self):
        result = run_sweep(SweepConfig('kernel_norms',
                                       (2 ** 10, 2 ** 14, 2 ** 18)))
        assert result.passed
        assert set(result.fits) == {'l2', 'gradient'}
        assert len(result.rows) == 6
        assert result.fits['gradient'].slope == pytest.approx(1.0, abs=0.05)
        assert result.wall_clock > 0

    def test_k1(self):
        result = run_sweep(SweepConfig('k1_l1', (10 ** 3, 10 ** 4, 10 ** 5,
                                                 10 ** 6),
                                       k1_cutoff_exponent=0.9))
        assert result.passed
        assert result.comments == ["cutoff_exponent=0.9"]
        assert result.fits['k1_l1'].slope == pytest.approx(-0.3, abs=0.05)

    def test_k1_uses_kernel_cutoff(self):
        kernel = KernelConfig(1000, cutoff_exponent=0.5,
                              wide_cutoff_exponent=0.3)
        result = run_sweep(SweepConfig('k1_l1', (10 ** 3, 10 ** 4, 10 ** 5),
                                       kernel=kernel))
        assert result.comments == ["cutoff_exponent=0.5"]
        assert result.rows[0].value == pytest.approx(
            k1_l1_norm(kernel), rel=1e-12)

    def test_k1_degenerate_split(self):
        kernel = KernelConfig(1000, cutoff_exponent=0.3,
                              wide_cutoff_exponent=0.3)
        with pytest.raises(DegenerateDataError, match="degenerate zero"):
            run_sweep(SweepConfig('k1_l1', (10 ** 3, 10 ** 4, 10 ** 5),
                                  kernel=kernel))


class TestDynamicSweeps:

    def test_consistency(self):
        cfg = SweepConfig('consistency', (40, 80, 160), replications=2)
        result = run_sweep(cfg)
        assert [row.n for row in result.rows] == [40, 40, 80, 80, 160, 160]
        for n in cfg.n_values:
            seeds = [row.seed for row in result.rows if row.n == n]
            assert seeds == sorted(cfg.seed(n, r) for r in range(2))
        assert all(row.value > 0 for row in result.rows)
        assert 'median_over_log_n' in result.fits
        assert len(result.checks) == 1

    def test_consistency_threads(self):
        cfg = SweepConfig('ell_consistency', (30, 60, 120), replications=3)
        threaded = SweepConfig('ell_consistency', (30, 60, 120),
                               replications=3, threads=3)
        assert run_sweep(cfg).rows == run_sweep(threaded).rows

    def test_degenerate(self):
        cfg = SweepConfig('consistency', (10, 20, 40),
                          kernel=KernelConfig(10, strength=0.0))
        with pytest.raises(DegenerateDataError):
            run_sweep(cfg)

    def test_coupling(self):
        cfg = SweepConfig('coupling', (4, 8, 16), reference_factor=2,
                          sim=SimParams(horizon=0.05, dt=0.01))
        result = run_sweep(cfg)
        assert len(result.rows) == 3
        assert result.report['verdict'] in ('monotone-decreasing',
                                             'not-monotone')
        names = [check.name for check in result.checks]
        assert names == ['coupling monotonicity', 'coupling slope',
                         'coupling initial distance']
        assert result.checks[2].passed

    def test_coupling_monotonicity_only(self):
        cfg = SweepConfig('coupling', (4, 8, 16), reference_factor=2,
                          sim=SimParams(horizon=0.05, dt=0.01),
                          monotonicity_only=True)
        result = run_sweep(cfg)
        assert [check.name for check in result.checks] == [
            'coupling monotonicity', 'coupling initial distance']
        assert 'max_distance' in result.fits

    def test_wasserstein_initial(self):
        cfg = SweepConfig('wasserstein', (16, 32, 64), replications=2,
                          at_initial_time=True)
        result = run_sweep(cfg)
        assert result.columns[-4:] == ('p', 'method', 'value', 'stderr')
        assert {row.extra for row in result.rows} == {(0.0, 2.0, 'exact')}
        assert set(result.report['rate_bound']) == {16, 32, 64}
        assert result.report['kappa'] == pytest.approx(0.99 / 6.0)

    def test_wasserstein_final(self):
        cfg = SweepConfig('wasserstein', (8, 16, 32), reference_factor=2,
                          sim=SimParams(horizon=0.02, dt=0.01), kappa=0.1)
        result = run_sweep(cfg)
        assert [row.extra[0] for row in result.rows] == [0.02] * 3
        assert all(row.value > 0 for row in result.rows)
        assert result.report['kappa'] == 0.1

    def test_collision_count(self):
        cfg = SweepConfig('collision_count', (100, 200, 400), replications=5)
        result = run_sweep(cfg)
        assert len(result.rows) == 15
        assert all(row.value == int(row.value) >= 0 for row in result.rows)
        assert set(result.report['exceedance']) == {100, 200, 400}
        assert all(0.0 <= p <= 1.0
                   for p in result.report['binomial_tail'].values())
        assert len(result.checks) == 3


class TestWriteSweep:

    def test_files(self, tmp_path):
        result = run_sweep(SweepConfig('k1_l1', (100, 1000, 10000),
                                       k1_cutoff_exponent=0.9))
        csv_path, json_path = write_sweep(result, str(tmp_path), 'abc123')
        lines = csv_path.lines(retain=False)
        assert lines[0] == "# config_sha256=abc123"
        assert lines[1] == "# cutoff_exponent=0.9"
        assert lines[2] == "sweep_kind,N,seed,value,stderr"
        assert lines[3].startswith("k1_l1,100,0,")
        assert len(lines) == 6
        with json_path.open(encoding='utf-8') as json_file:
            summary = json.load(json_file)
        assert summary['config_sha256'] == 'abc123'
        assert summary['sweep_kind'] == 'k1_l1'
        assert summary['passed'] is True
        assert summary['config']['n_values'] == [100, 1000, 10000]
        assert set(summary['fits']) == {'k1_l1'}


@pytest.mark.slow
class TestAcceptance:

    @pytest.mark.parametrize('name, kinds', [
        ('kernel', ['kernel_norms', 'k1_l1']),
        ('consistency', ['consistency']),
        ('consistency_delta040', ['consistency']),
        ('coupling', ['coupling']),
        ('coupling_ci', ['coupling']),
        ('wasserstein', ['wasserstein']),
        ('collision', ['collision_count']),
    ])
    def test_shipped_configs(self, name, kinds):
        config = load_config(CONFIGS / name + '.ini')
        for kind in kinds:
            result = run_sweep(config.sweep_config(kind))
            assert result.passed, [check for check in result.checks
                                   if not check.passed]
