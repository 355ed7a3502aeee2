"""
Euler-Maruyama time stepping of the particle systems

Three ensembles share one :class:`NoiseSource` in a coupled run:

* Φ, the interacting N-particle system, on noise streams 0 .. N-1
* Ψ, the same initial state driven by the mean field of the reference
  ensemble, on the *same* streams 0 .. N-1
* the reference ensemble of M particles, self-interacting, on the disjoint
  streams N .. N+M-1
"""
import math

import numpy as np

from vpfplab.dynamics.forces import pairwise_force, reference_force
from vpfplab.dynamics.noise import NoiseSource
from vpfplab.dynamics.state import PhaseState, Snapshot, TrajectoryRecord
from vpfplab.errors import DimensionMismatch, IntegrationBlowUp
from vpfplab.logger import LOGGER


def step(state, force_field, params, noise, step_index, stream_offset=0):
    """
    One Euler-Maruyama step

    The force is evaluated at the incoming state and
    v' = v + F dt + √(2σ) ΔB. Positions move with the incoming velocity,
    x' = x + v dt, unless ``params.kick_drift`` is set, in which case they
    move with v'

    :param force_field:   PhaseState -> (n, 3) forces
    :param noise:         source of ΔB, unused when σ = 0
    :param stream_offset: noise stream of the first particle
    :raises IntegrationBlowUp: if any new coordinate is not finite
    """
    n = len(state)
    dt = params.dt
    velocities = state.velocities + force_field(state) * dt
    if params.sigma > 0:
        velocities = velocities + math.sqrt(2.0 * params.sigma) * (
            noise.increments(step_index, stream_offset, n))
    transport = velocities if params.kick_drift else state.velocities
    positions = state.positions + transport * dt

    broken = ~(np.all(np.isfinite(positions), axis=-1)
               & np.all(np.isfinite(velocities), axis=-1))
    if np.any(broken):
        raise IntegrationBlowUp(int(np.argmax(broken)), step_index)
    return PhaseState(positions, velocities)


def distance_norm(phi, psi, n):
    """
    √(log n) max|X - X̄| + max|V - V̄|, maxima over all coordinates

    :raises DimensionMismatch: unless both states hold n >= 2 particles
    """
    if n < 2:
        raise DimensionMismatch("distance_norm needs n >= 2, got {}".format(n))
    if len(phi) != n or len(psi) != n:
        raise DimensionMismatch(
            "states of sizes {} and {} compared at n = {}".format(
                len(phi), len(psi), n))
    position_gap = np.max(np.abs(phi.positions - psi.positions))
    velocity_gap = np.max(np.abs(phi.velocities - psi.velocities))
    return float(math.sqrt(math.log(n)) * position_gap + velocity_gap)


def _self_force(config, profile, threads, deterministic):
    def force_field(state):
        if len(state) < 2:
            return np.zeros_like(state.positions)
        return pairwise_force(config, profile, state, threads=threads,
                              deterministic=deterministic)
    return force_field


def _recorded(params, index):
    return index % params.record_every == 0 or index == params.n_steps


def run_ensemble(config, profile, initial, params, threads=1,
                 deterministic=True, stream_offset=0, noise=None):
    """
    Evolve a single self-interacting ensemble

    :return: list of :class:`Snapshot` at t = 0 and every
             ``params.record_every`` steps, ending with the final state
    """
    noise = noise or NoiseSource(params.seed, params.dt)
    force_field = _self_force(config, profile, threads, deterministic)
    state = initial
    snapshots = [Snapshot(0.0, state)]
    for index in range(params.n_steps):
        state = step(state, force_field, params, noise, index,
                     stream_offset=stream_offset)
        if _recorded(params, index + 1):
            snapshots.append(Snapshot((index + 1) * params.dt, state))
    return snapshots


def run_coupled(config, profile, initial, reference, params, threads=1,
                deterministic=True, snapshot_every=None):
    """
    Evolve Φ, Ψ and the reference ensemble on shared noise and record the
    weighted distance between Φ and Ψ

    Ψ feels 1/M Σ_j k^N(x - y_j) from the M reference particles y_j and does
    not act back on them

    :param initial:        Φ₀ = Ψ₀, N particles
    :param reference:      independent initial reference ensemble
    :param snapshot_every: steps between stored snapshots of all three
                           ensembles, none stored by default
    """
    n = len(initial)
    noise = NoiseSource(params.seed, params.dt)
    self_force = _self_force(config, profile, threads, deterministic)
    phi = psi = initial
    ensemble = reference
    record = TrajectoryRecord()

    def snapshot(time, index):
        if snapshot_every and (index % snapshot_every == 0
                               or index == params.n_steps):
            record.phi_snapshots.append(Snapshot(time, phi))
            record.psi_snapshots.append(Snapshot(time, psi))
            record.reference_snapshots.append(Snapshot(time, ensemble))

    def mean_field(state):
        return reference_force(config, profile, ensemble.positions,
                               state.positions, threads=threads,
                               deterministic=deterministic)

    record.append(0.0, distance_norm(phi, psi, n))
    snapshot(0.0, 0)
    for index in range(params.n_steps):
        phi_next = step(phi, self_force, params, noise, index)
        psi_next = step(psi, mean_field, params, noise, index)
        ensemble = step(ensemble, self_force, params, noise, index,
                        stream_offset=n)
        phi, psi = phi_next, psi_next
        time = (index + 1) * params.dt
        snapshot(time, index + 1)
        if _recorded(params, index + 1):
            record.append(time, distance_norm(phi, psi, n))
            LOGGER.debug("t = {:.4g}: distance {:.6g}".format(
                record.times[-1], record.distance_series[-1]))
    return record
