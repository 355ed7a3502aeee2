"""
Gnuplot scripts for the sweep CSVs of an output directory
"""
import csv

from path import Path

from vpfplab.dynamics.io import HASH_PREFIX
from vpfplab.logger import LOGGER

# sweeps whose values are not fitted with a power law
_LINEAR_VALUES = {'collision_count'}

_TEMPLATE = """\
# gnuplot script for {csv_name}, written by vpfplab emit-plots
{hash_line}set datafile separator ','
set terminal pngcairo size 800,600
set output '{png_name}'
set title '{title}'
set xlabel 'N'
set ylabel '{ylabel}'
set logscale {logscale}
set key autotitle columnhead
set key top right
plot {plots}
"""


def _read_header(path):
    """
    The config hash line, the column names and the distinct sweep kinds of a
    sweep CSV
    """
    hash_lines = []

    def data_lines(csv_file):
        for line in csv_file:
            if line.startswith(HASH_PREFIX):
                hash_lines.append(line.rstrip('\n'))
            elif not line.startswith('#'):
                yield line

    with path.open(encoding='utf-8') as csv_file:
        rows = csv.reader(data_lines(csv_file))
        columns = next(rows, [])
        if 'sweep_kind' not in columns or 'N' not in columns:
            return None, columns, []
        index = columns.index('sweep_kind')
        kinds = []
        for row in rows:
            if row and row[index] not in kinds:
                kinds.append(row[index])
    return (hash_lines[0] if hash_lines else None), columns, kinds


def plot_script(path, columns, kinds, hash_line=None):
    """
    Gnuplot source plotting value over N, one series per sweep kind

    :param hash_line: the ``# config_sha256=`` line of the CSV, repeated in
                      the script
    """
    n_column = columns.index('N') + 1
    value_column = columns.index('value') + 1
    series = [
        "'{name}' using (strcol(1) eq '{kind}' ? ${n} : 1/0):{value} "
        "with points pointtype 7 title '{kind}'".format(
            name=path.name, kind=kind, n=n_column, value=value_column)
        for kind in kinds]
    linear = all(kind.split(':')[0] in _LINEAR_VALUES for kind in kinds)
    return _TEMPLATE.format(
        csv_name=path.name, hash_line=hash_line + '\n' if hash_line else '',
        png_name=path.stripext().name + '.png',
        title=path.stripext().name.replace('_', ' '),
        ylabel='value', logscale='x' if linear else 'xy',
        plots=", \\\n     ".join(series))


def emit_plot_scripts(output_dir):
    """
    Write ``<name>.gp`` next to every sweep CSV in `output_dir`; CSVs that
    are not sweep results are skipped

    :return: list of the written script paths
    """
    scripts = []
    for path in sorted(Path(output_dir).files('*.csv')):
        hash_line, columns, kinds = _read_header(path)
        if not kinds:
            LOGGER.debug("Skipping {}, not a sweep result".format(path))
            continue
        script = path.stripext() + '.gp'
        script.write_bytes(plot_script(path, columns, kinds, hash_line)
                           .encode('utf-8'))
        LOGGER.info("Wrote {}".format(script))
        scripts.append(script)
    return scripts
