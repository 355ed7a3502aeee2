"""
Immutable phase-space snapshots, run parameters and trajectory records
"""
import dataclasses
import math
from typing import List, NamedTuple

import numpy as np

from vpfplab.errors import DimensionMismatch


def _frozen_copy(values, name):
    array = np.array(values, dtype=float)
    if array.ndim != 2 or array.shape[1] != 3:
        raise DimensionMismatch("{} must have shape (N, 3), got {}".format(
            name, array.shape))
    if not np.all(np.isfinite(array)):
        raise ValueError("{} contain non-finite entries".format(name))
    array.setflags(write=False)
    return array


class PhaseState:
    """
    Positions X and velocities V of N particles, both (N, 3) read-only
    arrays
    """

    __slots__ = ('positions', 'velocities')

    def __init__(self, positions, velocities):
        positions = _frozen_copy(positions, 'positions')
        velocities = _frozen_copy(velocities, 'velocities')
        if len(positions) != len(velocities):
            raise DimensionMismatch(
                "{} positions but {} velocities".format(
                    len(positions), len(velocities)))
        object.__setattr__(self, 'positions', positions)
        object.__setattr__(self, 'velocities', velocities)

    def __setattr__(self, name, value):
        raise AttributeError("PhaseState is immutable")

    def __len__(self):
        return len(self.positions)

    def __eq__(self, other):
        return (isinstance(other, PhaseState)
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.velocities, other.velocities))

    __hash__ = None

    def __repr__(self):
        return "PhaseState(n={})".format(len(self))


@dataclasses.dataclass(frozen=True)
class SimParams:
    """
    Time-integration parameters

    :param sigma:        velocity diffusion σ >= 0; σ = 0 gives Newtonian flow
    :param horizon:      final time T > 0
    :param dt:           time step, defaults to T / 1000
    :param seed:         seed of the Brownian increments
    :param record_every: steps between recorded distances
    :param kick_drift:   update velocities first and move with the new ones
    """
    sigma: float = 0.5
    horizon: float = 1.0
    dt: float = None
    seed: int = 0
    record_every: int = 10
    kick_drift: bool = False

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, 'dt', 1e-3 * self.horizon)
        if not self.sigma >= 0:
            raise ValueError("sigma must be nonnegative, got {}".format(
                self.sigma))
        if not self.horizon > 0:
            raise ValueError("horizon must be positive, got {}".format(
                self.horizon))
        if not 0 < self.dt <= self.horizon:
            raise ValueError("dt must lie in (0, horizon], got {}".format(
                self.dt))
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1, got {}".format(
                self.record_every))

    @property
    def n_steps(self):
        # rounding keeps T / dt = 1000.0000000001 at 1000 steps
        return math.ceil(round(self.horizon / self.dt, 9))


class Snapshot(NamedTuple):
    time: float
    state: PhaseState


@dataclasses.dataclass
class TrajectoryRecord:
    """
    The weighted distance between the coupled systems over time, plus
    optional snapshots of both systems
    """
    times: List[float] = dataclasses.field(default_factory=list)
    distance_series: List[float] = dataclasses.field(default_factory=list)
    phi_snapshots: List[Snapshot] = dataclasses.field(default_factory=list)
    psi_snapshots: List[Snapshot] = dataclasses.field(default_factory=list)
    reference_snapshots: List[Snapshot] = dataclasses.field(
        default_factory=list)

    def append(self, time, distance):
        if self.times and not time > self.times[-1]:
            raise ValueError("recorded times must increase, got {} after {}"
                             .format(time, self.times[-1]))
        self.times.append(float(time))
        self.distance_series.append(float(distance))

    @property
    def running_max(self):
        return np.maximum.accumulate(self.distance_series)

    @property
    def max_distance(self):
        return max(self.distance_series)
