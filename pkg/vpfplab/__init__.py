__all__ = ['SWEEPS', 'LOGGER', 'KernelConfig', 'SimParams', 'run']

from vpfplab.logger import LOGGER
from vpfplab.kernels import KernelConfig
from vpfplab.dynamics import SimParams

#: The central sweep registry, see :class:`vpfplab.experiments.SweepsRegistry`
from vpfplab.experiments import SWEEPS


def run():
    from . import __main__

    # the console script entry point, __main__ only runs by itself when
    # executed with ``python -m vpfplab``
    __main__.run()
