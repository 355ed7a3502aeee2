"""
Equal-weight empirical measures and Wasserstein-p distances between them

All comparisons are between clouds of the same size, where optimal transport
reduces to an optimal assignment. The exact solver is used up to
``EXACT_CUTOVER`` points; beyond that :func:`wasserstein_to_reference`
switches to the sliced estimator, which is a Monte Carlo surrogate and never
stands in where exact values are asserted.
"""
import enum
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from vpfplab.errors import DimensionMismatch, UnbalancedTransportError
from vpfplab.logger import LOGGER

#: Largest cloud solved exactly by wasserstein_to_reference
EXACT_CUTOVER = 2048

#: Default number of random directions of the sliced estimator
SLICED_PROJECTIONS = 256


class Projection(enum.Enum):
    POSITION = 'position'
    PHASE = 'phase'


class Estimate(NamedTuple):
    """
    A distance with its Monte Carlo standard error, zero for exact values
    """
    value: float
    stderr: float
    method: str


class EmpiricalMeasure:
    """
    The uniform measure 1/n Σ δ_{p_i} on n points in R^d

    One-dimensional input is taken as n scalar points
    """

    def __init__(self, points):
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            points = points[:, np.newaxis]
        if points.ndim != 2 or len(points) < 1:
            raise ValueError("an empirical measure needs at least one point, "
                             "got shape {}".format(points.shape))
        if not np.all(np.isfinite(points)):
            raise ValueError("empirical measure points must be finite")
        points.setflags(write=False)
        self.points = points

    @property
    def count(self):
        return len(self.points)

    @property
    def dimension(self):
        return self.points.shape[1]

    def __len__(self):
        return self.count

    def __repr__(self):
        return "EmpiricalMeasure(count={}, dimension={})".format(
            self.count, self.dimension)


def from_phase(state, projection=Projection.POSITION):
    """
    μ_Φ of a PhaseState, on positions (d = 3) or on phase space (d = 6)
    """
    projection = Projection(projection)
    if projection is Projection.POSITION:
        return EmpiricalMeasure(state.positions)
    return EmpiricalMeasure(np.hstack([state.positions, state.velocities]))


def _check_pair(mu, nu, p):
    if mu.count != nu.count:
        raise UnbalancedTransportError(
            "cannot transport {} points onto {}".format(mu.count, nu.count))
    if mu.dimension != nu.dimension:
        raise DimensionMismatch("{}-D and {}-D measures".format(
            mu.dimension, nu.dimension))
    if not p >= 1:
        raise ValueError("p must be at least 1, got {}".format(p))


def wasserstein_exact(mu, nu, p=2):
    """
    W_p by optimal assignment on the matrix of p-th power distances

    :raises UnbalancedTransportError: on unequal counts
    """
    _check_pair(mu, nu, p)
    cost = cdist(mu.points, nu.points) ** p
    rows, columns = linear_sum_assignment(cost)
    return float(np.mean(cost[rows, columns]) ** (1.0 / p))


def _sorted_wasserstein(a, b, p):
    """
    W_p between the columns of two (n, k) arrays of scalars, shape (k,)
    """
    gaps = np.abs(np.sort(a, axis=0) - np.sort(b, axis=0))
    return np.mean(gaps ** p, axis=0) ** (1.0 / p)


def wasserstein_1d(mu, nu, p=2):
    """
    W_p between scalar clouds by sorting and matching in order
    """
    _check_pair(mu, nu, p)
    if mu.dimension != 1:
        raise DimensionMismatch("wasserstein_1d needs scalar points, got "
                                "dimension {}".format(mu.dimension))
    return float(_sorted_wasserstein(mu.points, nu.points, p)[0])


def wasserstein_sliced(mu, nu, p, n_projections, rng):
    """
    Mean of the 1-D W_p of the clouds projected on uniformly random unit
    directions, with its Monte Carlo standard error
    """
    _check_pair(mu, nu, p)
    if n_projections < 2:
        raise ValueError("n_projections must be at least 2, got {}".format(
            n_projections))
    directions = rng.standard_normal((n_projections, mu.dimension))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    values = _sorted_wasserstein(mu.points @ directions.T,
                                 nu.points @ directions.T, p)
    return Estimate(float(np.mean(values)),
                    float(np.std(values, ddof=1) / np.sqrt(n_projections)),
                    'sliced')


def wasserstein_to_reference(state, reference_sampler, p, rng,
                             projection=Projection.POSITION,
                             cutover=EXACT_CUTOVER,
                             n_projections=SLICED_PROJECTIONS):
    """
    W_p between μ_Φ and an equal-size draw from `reference_sampler`

    :param reference_sampler: (rng, count) -> points of the projection's
                              dimension
    :return: :class:`Estimate`, exact up to `cutover` points, sliced above
    """
    mu = from_phase(state, projection)
    nu = EmpiricalMeasure(reference_sampler(rng, mu.count))
    if mu.count <= cutover:
        return Estimate(wasserstein_exact(mu, nu, p), 0.0, 'exact')
    LOGGER.warning("{} points exceed the exact cutover {}, using the sliced "
                   "estimator with {} projections".format(
                       mu.count, cutover, n_projections))
    return wasserstein_sliced(mu, nu, p, n_projections, rng)
