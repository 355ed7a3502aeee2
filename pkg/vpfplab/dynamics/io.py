"""
CSV and JSON writers

Every CSV starts with a ``# config_sha256=<hash>`` comment line, followed by
the column header row. Floats are written with 17 significant digits, which
round-trips 64-bit floats exactly
"""
import csv
import io
import json

import numpy as np
from path import Path

from vpfplab.logger import LOGGER

HASH_PREFIX = '# config_sha256='

TRAJECTORY_COLUMNS = ['time', 'particle', 'x1', 'x2', 'x3', 'v1', 'v2', 'v3',
                      'ensemble']


def format_value(value):
    """
    >>> format_value(0.1)
    '1.0000000000000001e-01'
    >>> format_value(3)
    '3'
    """
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.16e')
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path, columns, rows, config_hash, comments=()):
    """
    Write `rows` under a header of `columns`

    :param comments: extra ``# ...`` lines placed after the hash line
    """
    path = Path(path)
    path.dirname().makedirs_p()
    buffer = io.StringIO()
    buffer.write("{}{}\n".format(HASH_PREFIX, config_hash))
    for comment in comments:
        buffer.write("# {}\n".format(comment))
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    path.write_bytes(buffer.getvalue().encode('utf-8'))
    LOGGER.info("Wrote {}".format(path))
    return path


def trajectory_rows(tagged_snapshots):
    """
    Rows of the trajectory CSV

    :param tagged_snapshots: iterable of ``(tag, [Snapshot, ...])``
    """
    for tag, snapshots in tagged_snapshots:
        for time, state in snapshots:
            for particle, (x, v) in enumerate(zip(state.positions,
                                                  state.velocities)):
                yield [float(time), particle, *map(float, x),
                       *map(float, v), tag]


def write_trajectory_csv(path, tagged_snapshots, config_hash):
    return write_csv(path, TRAJECTORY_COLUMNS,
                     trajectory_rows(tagged_snapshots), config_hash)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError("{!r} is not JSON serializable".format(value))


def write_json(path, summary):
    """
    Write a run summary as indented JSON with sorted keys
    """
    path = Path(path)
    path.dirname().makedirs_p()
    text = json.dumps(summary, indent=2, sort_keys=True, default=_jsonable)
    path.write_bytes((text + '\n').encode('utf-8'))
    LOGGER.info("Wrote {}".format(path))
    return path
