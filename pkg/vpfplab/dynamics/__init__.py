__all__ = [
    'PhaseState', 'SimParams', 'Snapshot', 'TrajectoryRecord', 'NoiseSource',
    'pairwise_force', 'pairwise_ell', 'reference_force',
    'reference_ensemble_force', 'step', 'run_ensemble', 'run_coupled',
    'distance_norm', 'consistency_residual', 'ell_consistency_residual',
]

from .state import PhaseState, SimParams, Snapshot, TrajectoryRecord
from .noise import NoiseSource
from .forces import (
    pairwise_force, pairwise_ell, reference_force, reference_ensemble_force)
from .integrator import step, run_ensemble, run_coupled, distance_norm
from .consistency import consistency_residual, ell_consistency_residual
