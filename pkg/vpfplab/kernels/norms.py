"""
Norms of the regularized kernel by 1-D radial quadrature

k^N is radial in magnitude, so every L^p norm reduces to an integral over
the radius with weight 4π r²
"""
import math

import numpy as np

from vpfplab.kernels.blob import DEFAULT_PROFILE
from vpfplab.kernels.coulomb import frobenius, kernel_gradient
from vpfplab.kernels.quadrature import radial_quad


def kernel_l2_norm(config, profile=DEFAULT_PROFILE):
    """
    ‖k^N‖₂ over R³

    Passing ``profile=None`` asks for the unregularized Coulomb kernel,
    whose L² norm diverges at the origin

    :raises QuadratureError: if the radial integral does not converge
    """
    weight = 4.0 * math.pi * config.strength ** 2
    if profile is None:
        def integrand(r):
            return weight / r ** 2
        breakpoints = [0.0, 1.0, math.inf]
    else:
        scale = config.core_scale

        def integrand(r):
            if r * scale >= 1.0:
                return weight / r ** 2
            core = float(profile.core_ratio(r * scale))
            return weight * r ** 4 * scale ** 6 * core ** 2
        breakpoints = [0.0, config.cutoff_length, math.inf]

    value, _ = radial_quad(integrand, breakpoints, what='L2 norm of k^N')
    return math.sqrt(value)


def k1_l1_norm(config, profile=DEFAULT_PROFILE):
    """
    ‖k₁^N‖₁, the L¹ norm of the short-range part of the split kernel

    k₁^N vanishes beyond N^-λ₂, so the integral runs over [0, N^-λ₂] with a
    breakpoint at the inner cut-off N^-δ
    """
    if config.wide_cutoff_exponent == config.cutoff_exponent:
        return 0.0
    weight = 4.0 * math.pi * abs(config.strength)
    core_scale = config.core_scale
    wide_scale = config.wide_scale

    def integrand(r):
        inner = core_scale ** 3 * float(profile.core_ratio(r * core_scale))
        wide = wide_scale ** 3 * float(profile.core_ratio(r * wide_scale))
        return weight * r ** 3 * abs(inner - wide)

    value, _ = radial_quad(
        integrand,
        [0.0, config.cutoff_length, config.wide_cutoff_length],
        what='L1 norm of k1^N')
    return value


def gradient_sup_norm(config, profile=DEFAULT_PROFILE, points=2001,
                      extent=2.0):
    """
    sup |∇k^N| (Frobenius norm) over a radial grid of ``points`` radii in
    [0, extent · N^-δ]

    The Jacobian only rotates with the direction of x, so one ray suffices
    """
    radii = np.linspace(0.0, extent * config.cutoff_length, points)
    x = np.zeros((points, 3))
    x[:, 0] = radii
    return float(np.max(frobenius(kernel_gradient(config, profile, x))))
