"""
Sweep CSV and JSON summary files
"""
import dataclasses

from path import Path

from vpfplab.dynamics.io import write_csv, write_json


def sweep_config_summary(cfg):
    """
    The sweep config as plain JSON data
    """
    summary = {}
    for field in dataclasses.fields(cfg):
        value = getattr(cfg, field.name)
        if dataclasses.is_dataclass(value):
            value = dataclasses.asdict(value)
        elif not isinstance(value, (int, float, str, bool, type(None))):
            value = repr(value) if not isinstance(value, tuple) else list(
                value)
        summary[field.name] = value
    return summary


def sweep_summary(result, config_hash):
    return {
        'sweep_kind': result.kind,
        'config_sha256': config_hash,
        'config': sweep_config_summary(result.config),
        'seeds': sorted({row.seed for row in result.rows}),
        'wall_clock': result.wall_clock,
        'fits': {name: fit.as_dict() for name, fit in result.fits.items()},
        'checks': [check._asdict() for check in result.checks],
        'passed': result.passed,
        'report': {key: (
            {str(k): v for k, v in value.items()} if isinstance(value, dict)
            else value) for key, value in result.report.items()},
    }


def write_sweep(result, output_dir, config_hash):
    """
    Write ``<kind>.csv`` with one row per replication and ``<kind>.json``
    with fits and acceptance checks into `output_dir`

    :return: ``(csv path, json path)``
    """
    output_dir = Path(output_dir)
    csv_path = write_csv(output_dir / result.kind + '.csv', result.columns,
                         (row.cells() for row in result.rows), config_hash,
                         comments=result.comments)
    json_path = write_json(output_dir / result.kind + '.json',
                           sweep_summary(result, config_hash))
    return csv_path, json_path
