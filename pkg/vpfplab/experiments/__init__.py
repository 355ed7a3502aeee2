"""
Sweeps over the particle number N and power-law fits of their results

Sweep runners register by kind in :data:`SWEEPS`:

>>> sorted(SWEEPS.names())  # doctest: +NORMALIZE_WHITESPACE
['coupling', 'collision_count', 'consistency', 'ell_consistency', 'k1_l1',
 'kernel_norms', 'wasserstein']
>>> 'k1_l1' in SWEEPS
True
"""
from pprint import pformat

from vpfplab.logger import LOGGER

__all__ = [
    'SWEEPS', 'SweepsRegistry', 'SweepConfig', 'SweepResult', 'SweepRow',
    'AcceptanceCheck', 'RateFitResult', 'PointSummary', 'fit_power_law',
    'wasserstein_rate_bound', 'run_sweep', 'write_sweep',
]


class SweepsRegistry:
    """
    The class of the :data:`vpfplab.SWEEPS` registry

    Maps sweep kinds to runner callables ``SweepConfig -> SweepResult``.
    Runners register with the :meth:`sweep` decorator
    """

    def __init__(self):
        self.sweeps = dict()

    def register(self, kind, runner):
        """
        Registers `runner` for sweep `kind`
        """
        self.sweeps[kind] = runner
        LOGGER.debug("Registered sweep {!r}".format(kind))

    def sweep(self, kind):
        """
        Decorator registering the decorated function for sweep `kind`
        """
        def decorator(runner):
            self.register(kind, runner)
            return runner
        return decorator

    def items(self):
        """
        Iterates ``(<sweep kind>, <runner>)`` pairs
        """
        yield from self.sweeps.items()

    def names(self):
        """
        Iterates the registered sweep kinds
        """
        yield from self.sweeps.keys()

    def __contains__(self, kind):
        return kind in self.sweeps

    def __getitem__(self, kind):
        """
        Get the runner of a sweep kind, also accepting hyphens for
        underscores
        """
        runner = self.sweeps.get(kind) or self.sweeps.get(
            kind.replace('-', '_'))
        if runner is None:
            raise KeyError(kind)
        return runner

    def __repr__(self):
        return pformat({kind: runner.__name__ for kind, runner
                        in self.items()})


#: The central sweep registry
SWEEPS = SweepsRegistry()

from .fitting import (  # Ignore PycodestyleBear (E402)
    PointSummary, RateFitResult, fit_power_law, summarize)
from .sweeps import (  # Ignore PycodestyleBear (E402)
    AcceptanceCheck, SweepConfig, SweepResult, SweepRow, run_sweep,
    wasserstein_rate_bound)
from .output import write_sweep  # Ignore PycodestyleBear (E402)
