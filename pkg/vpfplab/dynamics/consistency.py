"""
Consistency residuals: pairwise sums over i.i.d. mean-field samples against
the exact convolutions at t = 0

Beyond ``EXACT_LIMIT`` particles the exact fields come from cached radial
splines instead of one quadrature per particle.
"""
import numpy as np

from vpfplab import fields
from vpfplab.dynamics.forces import pairwise_ell, pairwise_force
from vpfplab.dynamics.state import PhaseState
from vpfplab.logger import LOGGER

#: Largest ensemble whose exact fields are integrated point by point
EXACT_LIMIT = 64


def exact_meanfield(config, profile, density, positions):
    """
    (k^N * ρ) at every row of `positions`
    """
    if len(positions) <= EXACT_LIMIT:
        return np.array([
            fields.meanfield_force_exact(config, profile, density, x)
            for x in positions])
    return fields.meanfield_table(config, profile, density)(positions)


def exact_ell(config, density, positions):
    """
    (ℓ^N * ρ) at every row of `positions`
    """
    if len(positions) <= EXACT_LIMIT:
        return np.array([fields.ell_convolution(config, density, x)
                         for x in positions])
    return fields.ell_table(config, density)(positions)


def distinct_sample(density, velocity, n, rng):
    """
    Draw n i.i.d. particles and redraw positions until no two coincide
    """
    state = fields.sample_initial_phase(density, velocity, n, rng)
    positions = np.array(state.positions)
    while True:
        _, first = np.unique(positions, axis=0, return_index=True)
        if len(first) == n:
            break
        repeated = np.setdiff1d(np.arange(n), first)
        LOGGER.warning("resampling {} coincident positions".format(
            len(repeated)))
        positions[repeated] = density.sample(rng, len(repeated))
    return PhaseState(positions, state.velocities)


def consistency_residual(config, profile, density, velocity, n, rng,
                         threads=1, deterministic=True):
    """
    max_i |K^N(X̄)_i - (k^N * ρ)(x̄_i)| for n i.i.d. samples X̄ of ρ
    """
    state = distinct_sample(density, velocity, n, rng)
    if config.strength == 0:
        return 0.0
    pairwise = pairwise_force(config, profile, state, threads=threads,
                              deterministic=deterministic)
    exact = exact_meanfield(config, profile, density, state.positions)
    return float(np.max(np.linalg.norm(pairwise - exact, axis=-1)))


def ell_consistency_residual(config, profile, density, velocity, n, rng,
                             threads=1, deterministic=True):
    """
    max_i |L^N(X̄)_i - (ℓ^N * ρ)(x̄_i)| for n i.i.d. samples X̄ of ρ

    `profile` is not used, ℓ^N does not depend on the blob
    """
    state = distinct_sample(density, velocity, n, rng)
    pairwise = pairwise_ell(config, state, threads=threads,
                            deterministic=deterministic)
    exact = exact_ell(config, density, state.positions)
    return float(np.max(np.abs(pairwise - exact)))
