import json

import pytest
from path import Path

import vpfplab
from vpfplab import commands
from vpfplab.commands import COMMANDS, dispatch, main
from vpfplab.config import parse_config
from vpfplab.errors import SweepConfigError
from vpfplab.experiments import AcceptanceCheck, SweepResult
from vpfplab.plots import emit_plot_scripts
from vpfplab.selftest import ORACLES, run_selftest

SIMULATION = """\
[kernel]
n_particles = 8

[sim]
horizon = 0.02
dt = 0.01
record_every = 1
reference_size = 16
seed = 3
"""

KERNEL_SWEEP = """\
[kernel]
n_particles = 1024

[sweep]
n_values = 1024, 4096, 16384
k1_cutoff_exponent = 0.9
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text):
        path = Path(str(tmp_path)) / 'run.ini'
        path.write_text(text)
        return str(path)
    return write


@pytest.fixture
def output_dir(tmp_path):
    return Path(str(tmp_path)) / 'out'


def read_summary(path):
    with open(str(path), encoding='utf-8') as summary_file:
        return json.load(summary_file)


def failing_sweep(cfg):
    return SweepResult(cfg, checks=[AcceptanceCheck('rate', False, "off")])


class TestRegistry:

    def test_commands(self):
        assert sorted(COMMANDS) == [
            'consistency-sweep', 'coupling-sweep', 'collision-sweep',
            'emit-plots', 'kernel-sweep', 'list-sweeps', 'selftest',
            'simulate', 'wasserstein-sweep']
        assert COMMANDS['list-sweeps'].parser.prog.endswith('list-sweeps')

    def test_unknown(self, caplog):
        assert dispatch('energy-sweep', parse_config(SIMULATION)) == 2
        assert "unknown subcommand 'energy-sweep'" in caplog.text

    def test_no_subcommand(self, capsys):
        assert main([]) == 2
        assert "usage: vpfplab" in capsys.readouterr().out

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as error:
            main(['--colour', 'list-sweeps'])
        assert error.value.code == 2

    def test_exclusive_modes(self):
        with pytest.raises(SystemExit):
            main(['--fast', '--deterministic', 'list-sweeps'])


class TestMain:

    def test_list_sweeps(self, capsys):
        assert main(['list-sweeps'], environ={}) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 7
        assert lines[0].startswith("[consistency] Median of max_i")

    def test_missing_config(self, tmp_path, caplog):
        assert main(['--config', str(tmp_path / 'absent.ini'),
                     'list-sweeps'], environ={}) == 2
        assert "FileNotFoundError" in caplog.text

    def test_invalid_config(self, write_config, caplog):
        path = write_config("[kernel]\nn_particles = 8\ndelta = 0.2\n"
                            "lambda2 = 0.1\n")
        assert main(['--config', path, 'list-sweeps'], environ={}) == 2
        assert "kernel.cutoff_exponent" in caplog.text
        assert main(['--config', path, '--allow-out-of-theorem-range',
                     'list-sweeps'], environ={}) == 0

    def test_interactive(self, monkeypatch):
        namespaces = []
        monkeypatch.setattr(commands, 'start_ipython',
                            lambda argv, user_ns: namespaces.append(user_ns))
        monkeypatch.setattr(commands, 'run_selftest',
                            lambda: [('noise', True, "")])
        assert main(['-i', 'selftest'], environ={}) == 0
        user_ns = namespaces[-1]
        assert user_ns['vpfplab'] is vpfplab
        assert user_ns['selftest'] == [('noise', True, "")]
        assert user_ns['config'].kernel.n_particles == 256


class TestSimulate:

    def test_coupled(self, write_config, output_dir):
        code = main(['--config', write_config(SIMULATION), '--output-dir',
                     str(output_dir), 'simulate'], environ={})
        assert code == 0
        lines = (output_dir / 'trajectory.csv').lines(retain=False)
        assert lines[0].startswith("# config_sha256=")
        assert lines[1] == "time,particle,x1,x2,x3,v1,v2,v3,ensemble"
        # 3 snapshots of 8 particles for phi and psi
        assert len(lines) == 2 + 48
        assert lines[2].endswith(",phi")
        summary = read_summary(output_dir / 'summary.json')
        assert summary['times'] == pytest.approx([0.0, 0.01, 0.02])
        assert summary['distance'][0] == 0.0
        assert summary['seeds'] == {'noise': 3, 'initial': [3, 0],
                                    'reference': [3, 1]}
        assert [w['method'] for w in summary['wasserstein']] == ['exact'] * 3
        assert summary['wasserstein'][0]['value'] == 0.0
        assert summary['config_sha256'] == lines[0].split('=')[1]

    def test_reproducible(self, write_config, output_dir):
        path = write_config(SIMULATION)
        main(['--config', path, '--output-dir', str(output_dir), 'simulate'],
             environ={})
        first = (output_dir / 'trajectory.csv').bytes()
        main(['--config', path, '--output-dir', str(output_dir),
              '--threads', '4', 'simulate'], environ={})
        assert (output_dir / 'trajectory.csv').bytes() == first

    def test_seed_from_environment(self, write_config, output_dir):
        main(['--config', write_config(SIMULATION), '--output-dir',
              str(output_dir), 'simulate'], environ={'VPFPLAB_SEED': '5'})
        assert read_summary(output_dir / 'summary.json')['seeds'][
            'noise'] == 5
        main(['--config', write_config(SIMULATION), '--output-dir',
              str(output_dir), '--seed', '6', 'simulate'],
             environ={'VPFPLAB_SEED': '5'})
        assert read_summary(output_dir / 'summary.json')['seeds'][
            'noise'] == 6

    def test_with_reference(self, write_config, output_dir):
        main(['--config', write_config(SIMULATION), '--output-dir',
              str(output_dir), 'simulate', '--with-reference'], environ={})
        lines = (output_dir / 'trajectory.csv').lines(retain=False)
        assert len(lines) == 2 + 48 + 3 * 16
        assert lines[-1].endswith(",reference")

    def test_no_coupling(self, write_config, output_dir):
        results = {}
        config = parse_config(SIMULATION,
                              overrides={'output.directory': output_dir})
        args = COMMANDS['simulate'].parser.parse_args(['--no-coupling'])
        assert dispatch('simulate', config, args, results) == 0
        assert len(results['snapshots']) == 3
        assert 'distance' not in read_summary(output_dir / 'summary.json')


class TestSweepCommands:

    def test_kernel_sweep(self, write_config, output_dir):
        results = {}
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        assert dispatch('kernel-sweep', config, results=results) == 0
        assert set(results) == {'kernel_norms', 'k1_l1'}
        assert (output_dir / 'kernel_norms.csv').isfile()
        summary = read_summary(output_dir / 'k1_l1.json')
        assert summary['config_sha256'] == config.sha256()

    def test_failed_check(self, monkeypatch, output_dir):
        monkeypatch.setattr(commands, 'run_sweep', failing_sweep)
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        assert dispatch('collision-sweep', config) == 1
        assert (output_dir / 'collision_count.json').isfile()

    def test_sweep_error(self, monkeypatch, output_dir, caplog):

        def broken(cfg):
            raise SweepConfigError("n_values must be strictly increasing")

        monkeypatch.setattr(commands, 'run_sweep', broken)
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        assert dispatch('coupling-sweep', config) == 2
        assert "SweepConfigError" in caplog.text

    def test_sweep_options(self, monkeypatch, output_dir):
        seen = []

        def record(cfg):
            seen.append(cfg)
            return SweepResult(cfg)

        monkeypatch.setattr(commands, 'run_sweep', record)
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        parser = COMMANDS['wasserstein-sweep'].parser
        dispatch('wasserstein-sweep', config,
                 parser.parse_args(['--p', '1', '--initial-time']))
        dispatch('wasserstein-sweep', config, parser.parse_args([]))
        dispatch('consistency-sweep', config,
                 COMMANDS['consistency-sweep'].parser.parse_args(['--ell']))
        assert (seen[0].p, seen[0].at_initial_time) == (1.0, True)
        assert (seen[1].p, seen[1].at_initial_time) == (2.0, False)
        assert seen[2].sweep_kind == 'ell_consistency'


class TestEmitPlots:

    def test_scripts(self, output_dir):
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        dispatch('kernel-sweep', config)
        (output_dir / 'notes.csv').write_text("a,b\n1,2\n")
        results = {}
        assert dispatch('emit-plots', config, results=results) == 0
        assert sorted(script.name for script in results['scripts']) == [
            'k1_l1.gp', 'kernel_norms.gp']
        script = (output_dir / 'kernel_norms.gp').text()
        assert "set logscale xy" in script
        assert "strcol(1) eq 'kernel_norms:l2' ? $2 : 1/0):4" in script
        assert "set output 'kernel_norms.png'" in script
        assert not (output_dir / 'notes.gp').exists()

    def test_every_output_carries_hash(self, output_dir):
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        dispatch('kernel-sweep', config)
        dispatch('emit-plots', config)
        hash_line = "# config_sha256=" + config.sha256()
        for name in ('kernel_norms', 'k1_l1'):
            assert (output_dir / name + '.csv').lines(retain=False)[0] == \
                hash_line
            assert (output_dir / name + '.gp').lines(retain=False)[1] == \
                hash_line
            assert read_summary(output_dir / name + '.json')[
                'config_sha256'] == config.sha256()

    def test_linear_counts(self, output_dir):
        output_dir.makedirs_p()
        (output_dir / 'collision_count.csv').write_text(
            "# config_sha256=0\nsweep_kind,N,seed,value,stderr\n"
            "collision_count,100,1,3,0\n")
        scripts = emit_plot_scripts(output_dir)
        assert "set logscale x\n" in scripts[0].text()

    def test_missing_directory(self, output_dir):
        config = parse_config(KERNEL_SWEEP,
                              overrides={'output.directory': output_dir})
        assert dispatch('emit-plots', config) == 2


class TestSelftest:

    def test_report(self, capsys):

        def raises():
            raise ArithmeticError("diverged")

        report = run_selftest([('good', lambda: (True, "fine")),
                               ('bad', lambda: (False, "off")),
                               ('broken', raises)])
        assert report == [('good', True, "fine"), ('bad', False, "off"),
                          ('broken', False, "ArithmeticError: diverged")]
        assert capsys.readouterr().out.splitlines() == [
            "PASS good: fine", "FAIL bad: off",
            "FAIL broken: ArithmeticError: diverged"]

    def test_registered(self):
        names = [name for name, _ in ORACLES]
        assert names[:3] == ['kernel-exterior', 'shell-theorem',
                             'meanfield-exterior']
        assert 'noise-batching' in names
        assert {'kernel-odd-and-dominated', 'kernel-lipschitz',
                'ell-breakpoint', 'green-short-time-scaling',
                'free-kinetic-paths', 'concentration',
                'collision-candidates'} <= set(names)

    @pytest.mark.parametrize('name', [
        'kernel-odd-and-dominated', 'kernel-lipschitz', 'ell-breakpoint',
        'collision-candidates'])
    def test_invariant_oracles(self, name):
        report = run_selftest([(name, dict(ORACLES)[name])])
        assert report[0][1], report[0][2]

    def test_exit_code(self, monkeypatch):
        config = parse_config(KERNEL_SWEEP)
        monkeypatch.setattr(commands, 'run_selftest',
                            lambda: [('a', True, ""), ('b', False, "")])
        assert dispatch('selftest', config) == 1

    @pytest.mark.slow
    def test_all_oracles_pass(self):
        assert all(passed for _, passed, _ in run_selftest())
