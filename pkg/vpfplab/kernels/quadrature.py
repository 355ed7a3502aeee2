"""
Quadrature helpers shared by the kernel norms, the mean-field convolutions
and the oracles
"""
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from vpfplab.errors import QuadratureError

#: Absolute tolerance of 1-D radial quadratures
RADIAL_EPSABS = 1e-10
RADIAL_EPSREL = 1e-10


def radial_quad(integrand, breakpoints, epsabs=RADIAL_EPSABS,
                epsrel=RADIAL_EPSREL, limit=200, what='radial integral'):
    """
    Integrate a scalar function piecewise between consecutive breakpoints
    with adaptive Gauss-Kronrod quadrature

    The last breakpoint may be ``math.inf``

    :return: ``(value, error estimate)``
    :raises QuadratureError: if any piece fails to converge
    """
    total = 0.0
    error = 0.0
    for lower, upper in zip(breakpoints[:-1], breakpoints[1:]):
        if not upper > lower:
            continue
        result = quad(integrand, lower, upper, epsabs=epsabs, epsrel=epsrel,
                      limit=limit, full_output=1)
        value, abserr = result[0], result[1]
        # quad appends a message to its result tuple when it gives up
        if len(result) > 3 or not math.isfinite(value):
            raise QuadratureError(
                "{} on [{:g}, {:g}] did not converge".format(
                    what, lower, upper), abserr)
        total += value
        error += abserr
    return total, error


def convolution_quadrature(config, profile, x, polar_nodes=64,
                           azimuth_nodes=64, radial_nodes=16):
    """
    (k * ψ_δ^N)(x) by direct quadrature, independent of the shell theorem

    With y = x - ρω the Coulomb singularity cancels against ρ² dρ and the
    integral becomes a ∫ ω ∫ ψ_δ^N(x - ρω) dρ dω over the chord of the blob
    support in direction ω. Chords are integrated with Gauss-Legendre, the
    polar angle with Gauss-Legendre in cos θ and the azimuth with the
    trapezoid rule. Converges spectrally for x inside the blob support
    """
    x = np.asarray(x, dtype=float)
    scale = config.core_scale
    radius = 1.0 / scale

    cos_theta, polar_weights = leggauss(polar_nodes)
    sin_theta = np.sqrt(1.0 - cos_theta ** 2)
    phi = 2.0 * math.pi * (np.arange(azimuth_nodes) + 0.5) / azimuth_nodes
    omega = np.stack([
        np.outer(sin_theta, np.cos(phi)),
        np.outer(sin_theta, np.sin(phi)),
        np.outer(cos_theta, np.ones_like(phi)),
    ], axis=-1).reshape(-1, 3)
    weights = np.outer(polar_weights,
                       np.full(azimuth_nodes,
                               2.0 * math.pi / azimuth_nodes)).ravel()

    b = omega @ x
    root = np.sqrt(np.maximum(b ** 2 - x @ x + radius ** 2, 0.0))
    upper = np.maximum(b + root, 0.0)
    lower = np.maximum(b - root, 0.0)

    nodes, node_weights = leggauss(radial_nodes)
    half = 0.5 * (upper - lower)
    rho = lower[:, np.newaxis] + half[:, np.newaxis] * (nodes + 1.0)
    y = x - rho[..., np.newaxis] * omega[:, np.newaxis, :]
    psi = scale ** 3 * profile.radial_density(
        scale * np.linalg.norm(y, axis=-1))
    chords = half * (psi @ node_weights)
    return config.strength * ((weights * chords) @ omega)
