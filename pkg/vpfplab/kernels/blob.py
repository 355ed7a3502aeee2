"""
Radial blob functions used to mollify the Coulomb kernel

A blob ψ is a nonnegative radial C² function supported in the unit ball
with unit mass. Everything downstream only needs two radial functions of it:
the profile ψ(r) and the enclosed mass m(r), the integral of ψ over the ball
of radius r. By the shell theorem the mollified Coulomb field at radius r is
the field of the charge m(r) placed at the origin.
"""
import math

import numpy as np
from numpy.polynomial import Polynomial

#: Normalization c of the default blob c(1 - r²)³, i.e. 315 / (64 π)
BUMP_NORMALIZATION = 315.0 / (64.0 * math.pi)

# below this radius the generic core slope is extrapolated as a constant
_SLOPE_FLOOR = 1e-3


class BlobProfile:
    """
    A radial mollifier given by its profile and enclosed-mass function

    Both callables must accept numpy arrays of radii. ``enclosed_mass`` must
    vanish at 0, equal 1 from radius 1 on, and be nondecreasing

    Besides plain evaluation the kernels need the *core ratio*
    R(s) = m(s) / s³, which stays finite at the origin, and its slope
    R'(s) / s for the kernel Jacobian. This base class derives both
    numerically; :class:`PolynomialBump` provides them exactly
    """

    def __init__(self, radial_density, enclosed_mass, name='custom'):
        """
        :param radial_density: r -> ψ(r), zero from r = 1 on
        :param enclosed_mass:  r -> m(r)
        :param name:           label used in configs and reports
        """
        self._radial_density = radial_density
        self._enclosed_mass = enclosed_mass
        self.name = name

    def radial_density(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, self._radial_density(np.minimum(r, 1.0)),
                        0.0)

    def enclosed_mass(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 1.0, self._enclosed_mass(np.minimum(r, 1.0)),
                        1.0)

    def core_ratio(self, s):
        """
        R(s) = m(s) / s³ with its limit (4π/3) ψ(0) at s = 0
        """
        s = np.asarray(s, dtype=float)
        safe = np.where(s > 0.0, s, 1.0)
        ratio = self.enclosed_mass(safe) / safe ** 3
        return np.where(s > 0.0, ratio,
                        4.0 * math.pi / 3.0 * float(self.radial_density(0.0)))

    def core_ratio_slope(self, s):
        """
        R'(s) / s = (4π ψ(s) - 3 R(s)) / s²

        For s below 1e-3 the value at 1e-3 is returned
        """
        s = np.maximum(np.asarray(s, dtype=float), _SLOPE_FLOOR)
        return (4.0 * math.pi * self.radial_density(s)
                - 3.0 * self.core_ratio(s)) / s ** 2

    def __repr__(self):
        return "{}({!r})".format(type(self).__qualname__, self.name)


class PolynomialBump(BlobProfile):
    """
    The blob ψ(r) = c (1 - r²)^k on the unit ball, C² for k >= 3

    All radial functions are exact polynomials, so the kernel and its
    Jacobian are evaluated without cancellation near the origin

    >>> bump = PolynomialBump(3)
    >>> abs(bump.normalization - BUMP_NORMALIZATION) < 1e-12
    True
    >>> float(bump.enclosed_mass(1.0))
    1.0
    """

    def __init__(self, power=3):
        if power < 3:
            raise ValueError(
                "blob power must be >= 3 for a C² profile, got {}".format(
                    power))
        self.power = power
        shape = Polynomial([1.0, 0.0, -1.0]) ** power
        mass = (Polynomial([0.0, 0.0, 4.0 * math.pi]) * shape).integ()
        self.normalization = 1.0 / mass(1.0)
        self._density_poly = self.normalization * shape
        self._mass_poly = self.normalization * mass
        # m(r) starts at r³, so m(r) / r³ is again a polynomial
        self._core_poly = Polynomial(self._mass_poly.coef[3:])
        # R is even, so R' / s is a polynomial as well
        self._slope_poly = Polynomial(self._core_poly.deriv().coef[1:])
        super().__init__(self._density_poly, self._mass_poly,
                         name='bump{}'.format(power))

    def core_ratio(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide='ignore'):
            outer = 1.0 / s ** 3
        return np.where(s < 1.0, self._core_poly(np.minimum(s, 1.0)), outer)

    def core_ratio_slope(self, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide='ignore'):
            outer = -3.0 / s ** 5
        return np.where(s < 1.0, self._slope_poly(np.minimum(s, 1.0)), outer)

    def __eq__(self, other):
        return type(other) is type(self) and other.power == self.power

    def __hash__(self):
        return hash((type(self).__qualname__, self.power))

    def __repr__(self):
        return "{}({})".format(type(self).__qualname__, self.power)


#: The default blob c (1 - r²)³
DEFAULT_PROFILE = PolynomialBump(3)


def blob_profile(name='bump', power=3):
    """
    Look up a blob by its config name

    Only the polynomial bump family ships; ``name='bump'`` with a ``power``
    selects a member
    """
    if name not in ('bump', 'bump{}'.format(power)):
        raise KeyError(name)
    if power == 3:
        return DEFAULT_PROFILE
    return PolynomialBump(power)


def blob_density(profile, x):
    """
    ψ(x) for points x of shape (..., 3)
    """
    return profile.radial_density(np.linalg.norm(x, axis=-1))


def scaled_blob(profile, exponent, n, x):
    """
    The rescaled blob N^{3e} ψ(N^e x), which keeps unit mass for every N

    :param exponent: the scaling exponent e > 0
    :param n:        the particle count N >= 2
    """
    if exponent <= 0:
        raise ValueError("exponent must be positive, got {}".format(exponent))
    if n < 2:
        raise ValueError("n must be at least 2, got {}".format(n))
    scale = float(n) ** exponent
    return scale ** 3 * profile.radial_density(
        scale * np.linalg.norm(x, axis=-1))
