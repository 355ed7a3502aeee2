"""
Analytic charge densities and the mean-field convolutions against them

Density and velocity models are radial. They register by ``kind`` name,
which is how config files refer to them:

>>> sorted(DensityModel.KINDS)
['isotropic-gaussian', 'radial-custom', 'uniform-ball']
>>> sorted(VelocityModel.KINDS)
['truncated-gaussian', 'uniform-ball']
>>> DensityModel.create('uniform-ball', radius=2.0)
UniformBall(radius=2.0)

For a radial density ρ the mollified field k^N * ρ = k * (ψ_δ^N * ρ) is, by
the shell theorem, a x / |x|³ times the charge of ψ_δ^N * ρ inside the ball
of radius |x|. That charge differs from the unmollified one only through the
band of radii within N^-δ of |x|, so it is computed as the exact enclosed
charge plus a 1-D correction integral over that band.
"""
import functools
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.special import erf

from vpfplab.dynamics.state import PhaseState
from vpfplab.kernels.blob import DEFAULT_PROFILE
from vpfplab.kernels.coulomb import (
    ELL_NUMERATOR, ELL_RADIUS_FACTOR, regularized_kernel)
from vpfplab.kernels.quadrature import radial_quad

__all__ = [
    'DensityModel', 'VelocityModel', 'IsotropicGaussian', 'UniformBall',
    'RadialCustom', 'TruncatedGaussianVelocity', 'UniformBallVelocity',
    'smoothed_enclosed_charge', 'meanfield_force_exact',
    'meanfield_force_grid', 'meanfield_table', 'MeanFieldTable',
    'meanfield_force_sup_norm', 'ell_convolution', 'ell_convolution_sup',
    'EllTable', 'ell_table',
    'sample_initial_phase',
]

#: Nodes per piece of the blob shell-weight quadrature
SHELL_NODES = 32

#: Velocity cut-off of the default truncated Gaussian, in standard deviations
DEFAULT_VELOCITY_CUTOFF = 4.0

_SHELL_NODES, _SHELL_WEIGHTS = leggauss(SHELL_NODES)


class ModelMeta(type):
    """
    Metaclass of the radial models

    A class defined with ``kind=<name>`` is registered under that name in the
    ``KINDS`` dict of its model family (:class:`DensityModel` or
    :class:`VelocityModel`)
    """

    def __new__(mcs, clsname, bases, clsattrs, *args, kind=None):
        return type.__new__(mcs, clsname, bases, clsattrs, *args)

    def __init__(cls, clsname, bases, clsattrs, *args, kind=None):
        type.__init__(cls, clsname, bases, clsattrs, *args)
        if kind:
            cls.kind = kind
            cls.KINDS[kind] = cls


class RadialModel(metaclass=ModelMeta):
    """
    Base of radially symmetric probability densities on R³

    Derived classes provide :meth:`radial`, :meth:`radial_enclosed_charge`
    and :meth:`sample`, and set ``support_radius`` (``math.inf`` when not
    compact) and ``extent``, a radius beyond which the mass is negligible
    """

    kind = None
    support_radius = math.inf
    is_radial = True

    @classmethod
    def create(cls, kind, **params):
        """
        Instantiate the model registered as `kind` in this family

        :raises KeyError: for unknown kinds
        """
        return cls.KINDS[kind](**params)

    def radial(self, r):
        """
        ρ as a function of the radius
        """
        raise NotImplementedError

    def radial_enclosed_charge(self, r):
        """
        Q(r), the mass inside the ball of radius r
        """
        raise NotImplementedError

    def sample(self, rng, count):
        """
        Draw `count` i.i.d. points, shape (count, 3), from a numpy Generator
        """
        raise NotImplementedError

    def evaluate(self, x):
        return self.radial(np.linalg.norm(np.asarray(x, dtype=float),
                                          axis=-1))

    def breakpoints(self):
        """
        Radii where quadratures over this density should be split
        """
        if math.isfinite(self.support_radius):
            return [0.0, self.support_radius]
        return [0.0, self.extent, math.inf]

    def radial_moment_integral(self, lower, upper):
        """
        ∫ t ρ(t) dt over [lower, upper]
        """
        upper = min(upper, self.support_radius)
        if not upper > lower:
            return 0.0
        value, _ = radial_quad(lambda t: t * float(self.radial(t)),
                               [lower, upper])
        return value

    def total_mass(self):
        value, _ = radial_quad(
            lambda r: 4.0 * math.pi * r ** 2 * float(self.radial(r)),
            self.breakpoints(), what='total mass')
        return value

    def lp_norm(self, p):
        """
        ‖ρ‖_p for 1 <= p <= ∞
        """
        if p == math.inf:
            grid = np.linspace(0.0, min(self.extent, self.support_radius),
                               1025)
            return float(np.max(self.radial(grid)))
        if p < 1:
            raise ValueError("p must be at least 1, got {}".format(p))
        value, _ = radial_quad(
            lambda r: 4.0 * math.pi * r ** 2 * float(self.radial(r)) ** p,
            self.breakpoints(), what='L{} norm'.format(p))
        return value ** (1.0 / p)

    def _params(self):
        return ()

    def __eq__(self, other):
        return type(other) is type(self) and other._params() == self._params()

    def __hash__(self):
        return hash((type(self).__qualname__, self._params()))

    def __repr__(self):
        return "{}({})".format(type(self).__qualname__, ", ".join(
            "{}={!r}".format(*item) for item in self._params()))


class DensityModel(RadialModel):
    """
    Family of the initial charge densities ρ₀
    """
    KINDS = {}


class VelocityModel(RadialModel):
    """
    Family of the initial velocity distributions, all compactly supported
    """
    KINDS = {}


def _unit_directions(rng, count):
    directions = rng.standard_normal((count, 3))
    return directions / np.linalg.norm(directions, axis=-1, keepdims=True)


def _gaussian_radial(r, std):
    return ((2.0 * math.pi * std ** 2) ** -1.5
            * np.exp(-np.square(r) / (2.0 * std ** 2)))


def _gaussian_enclosed(r, std):
    t = np.asarray(r, dtype=float) / std
    return (erf(t / math.sqrt(2.0))
            - math.sqrt(2.0 / math.pi) * t * np.exp(-t ** 2 / 2.0))


class _Gaussian:

    def __init__(self, std=1.0):
        if not std > 0:
            raise ValueError("std must be positive, got {}".format(std))
        self.std = float(std)

    @property
    def extent(self):
        return 8.0 * self.std

    def _params(self):
        return (('std', self.std), )


class IsotropicGaussian(_Gaussian, DensityModel, kind='isotropic-gaussian'):
    """
    The centered Gaussian with covariance std² I
    """

    def radial(self, r):
        return _gaussian_radial(r, self.std)

    def radial_enclosed_charge(self, r):
        return _gaussian_enclosed(r, self.std)

    def radial_moment_integral(self, lower, upper):
        return self.std ** 2 * float(self.radial(lower) - self.radial(upper))

    def breakpoints(self):
        return [0.0, self.std, math.inf]

    def sample(self, rng, count):
        return self.std * rng.standard_normal((count, 3))


class TruncatedGaussianVelocity(_Gaussian, VelocityModel,
                                kind='truncated-gaussian'):
    """
    A centered Gaussian conditioned on |v| <= cutoff, which defaults to
    four standard deviations
    """

    def __init__(self, std=1.0, cutoff=None):
        super().__init__(std)
        if cutoff is None:
            cutoff = DEFAULT_VELOCITY_CUTOFF * self.std
        if not cutoff > 0:
            raise ValueError("cutoff must be positive, got {}".format(cutoff))
        self.cutoff = float(cutoff)
        self._kept = float(_gaussian_enclosed(self.cutoff, self.std))

    @property
    def support_radius(self):
        return self.cutoff

    @property
    def extent(self):
        return self.cutoff

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.cutoff,
                        _gaussian_radial(r, self.std) / self._kept, 0.0)

    def radial_enclosed_charge(self, r):
        r = np.minimum(np.asarray(r, dtype=float), self.cutoff)
        return _gaussian_enclosed(r, self.std) / self._kept

    def sample(self, rng, count):
        samples = np.empty((count, 3))
        filled = 0
        while filled < count:
            draw = self.std * rng.standard_normal((count - filled, 3))
            draw = draw[np.linalg.norm(draw, axis=-1) <= self.cutoff]
            samples[filled:filled + len(draw)] = draw
            filled += len(draw)
        return samples

    def _params(self):
        return (('std', self.std), ('cutoff', self.cutoff))


class _Ball:

    def __init__(self, radius=1.0):
        if not radius > 0:
            raise ValueError("radius must be positive, got {}".format(radius))
        self.radius = float(radius)

    @property
    def support_radius(self):
        return self.radius

    @property
    def extent(self):
        return self.radius

    @property
    def _height(self):
        return 3.0 / (4.0 * math.pi * self.radius ** 3)

    def radial(self, r):
        return np.where(np.asarray(r, dtype=float) < self.radius,
                        self._height, 0.0)

    def radial_enclosed_charge(self, r):
        return np.minimum(np.asarray(r, dtype=float) / self.radius, 1.0) ** 3

    def radial_moment_integral(self, lower, upper):
        lower = min(lower, self.radius)
        upper = min(upper, self.radius)
        return self._height * (upper ** 2 - lower ** 2) / 2.0

    def sample(self, rng, count):
        directions = _unit_directions(rng, count)
        radii = self.radius * np.cbrt(rng.random(count))
        return directions * radii[:, np.newaxis]

    def _params(self):
        return (('radius', self.radius), )


class UniformBall(_Ball, DensityModel, kind='uniform-ball'):
    """
    The uniform density on the ball of the given radius
    """


class UniformBallVelocity(_Ball, VelocityModel, kind='uniform-ball'):
    """
    Velocities uniform on the ball |v| <= radius
    """


class RadialCustom(DensityModel, kind='radial-custom'):
    """
    A blob-like radial profile stretched to the given radius,
    ρ(x) = ψ(|x| / R) / R³

    Sampled by inverting the enclosed mass of the profile on a fine grid
    """

    INVERSE_GRID = 4097

    def __init__(self, profile=DEFAULT_PROFILE, radius=1.0):
        if not radius > 0:
            raise ValueError("radius must be positive, got {}".format(radius))
        self.profile = profile
        self.radius = float(radius)
        unit = np.linspace(0.0, 1.0, self.INVERSE_GRID)
        self._inverse = (self.profile.enclosed_mass(unit), unit)

    @property
    def support_radius(self):
        return self.radius

    @property
    def extent(self):
        return self.radius

    def radial(self, r):
        return (self.profile.radial_density(
            np.asarray(r, dtype=float) / self.radius) / self.radius ** 3)

    def radial_enclosed_charge(self, r):
        return self.profile.enclosed_mass(
            np.asarray(r, dtype=float) / self.radius)

    def sample(self, rng, count):
        directions = _unit_directions(rng, count)
        radii = self.radius * np.interp(rng.random(count), *self._inverse)
        return directions * radii[:, np.newaxis]

    def _params(self):
        return (('profile', self.profile), ('radius', self.radius))


def _fraction_inside(s, u, r):
    """
    Fraction of the sphere of radius u, centered at distance s from the
    origin, lying inside the ball of radius r
    """
    with np.errstate(divide='ignore', invalid='ignore'):
        fraction = (r ** 2 - (s - u) ** 2) / (4.0 * s * u)
    return np.clip(np.nan_to_num(fraction), 0.0, 1.0)


def blob_shell_weight(profile, s, r, width):
    """
    Mass of the blob of the given width, centered at distance s from the
    origin, inside the ball of radius r
    """
    cuts = sorted({0.0, 1.0, min(abs(s - r) / width, 1.0),
                   min((s + r) / width, 1.0)})
    total = 0.0
    for lower, upper in zip(cuts[:-1], cuts[1:]):
        if not upper > lower:
            continue
        half = (upper - lower) / 2.0
        u = lower + half * (_SHELL_NODES + 1.0)
        values = (4.0 * math.pi * u ** 2 * profile.radial_density(u)
                  * _fraction_inside(s, width * u, r))
        total += half * (values @ _SHELL_WEIGHTS)
    return total


def smoothed_enclosed_charge(profile, density, r, width, full_output=False):
    """
    Charge of ψ_width * ρ inside the ball of radius r

    :return: the charge, or ``(charge, achieved error)`` with `full_output`
    """
    lower = max(r - width, 0.0)
    upper = r + width
    if math.isfinite(density.support_radius):
        upper = min(upper, density.support_radius)

    def correction(s):
        inside = 1.0 if s < r else 0.0
        return (4.0 * math.pi * s ** 2 * float(density.radial(s))
                * (blob_shell_weight(profile, s, r, width) - inside))

    breakpoints = sorted(
        {point for point in (lower, r, upper, density.support_radius)
         if lower <= point <= upper})
    value, error = radial_quad(correction, breakpoints,
                               what='mollified enclosed charge')
    charge = float(density.radial_enclosed_charge(r)) + value
    if full_output:
        return charge, error
    return charge


def meanfield_force_exact(config, profile, density, x, full_output=False):
    """
    (k^N * ρ)(x) for a radial density ρ

    ``profile=None`` convolves the unregularized Coulomb kernel instead.
    Densities that are not radial go through :func:`meanfield_force_grid`

    :return: the force, or ``(force, achieved error)`` with `full_output`
    :raises QuadratureError: if the band correction does not converge
    """
    if not density.is_radial:
        return meanfield_force_grid(config, profile, density, x,
                                    full_output=full_output)
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        force, error = np.zeros(3), 0.0
    else:
        if profile is None:
            charge, error = float(density.radial_enclosed_charge(r)), 0.0
        else:
            charge, error = smoothed_enclosed_charge(
                profile, density, r, config.cutoff_length, full_output=True)
        force = config.strength * x * charge / r ** 3
    if full_output:
        return force, error
    return force


def meanfield_force_grid(config, profile, density, x, nodes=64,
                         full_output=False):
    """
    (k^N * ρ)(x) by tensor Gauss-Legendre quadrature over the cube
    [-extent, extent]³

    The achieved error is estimated against the same rule with half the
    nodes. Expect about 1e-5 relative for smooth densities
    """
    x = np.asarray(x, dtype=float)

    def tensor_rule(count):
        t, w = leggauss(count)
        axis = density.extent * t
        points = np.stack(np.meshgrid(axis, axis, axis, indexing='ij'),
                          axis=-1)
        weights = np.einsum('i,j,k->ijk', *([density.extent * w] * 3))
        values = regularized_kernel(config, profile, x - points)
        mass = density.evaluate(points) * weights
        return np.einsum('ijkl,ijk->l', values, mass)

    force = tensor_rule(nodes)
    if full_output:
        return force, float(np.linalg.norm(force - tensor_rule(nodes // 2)))
    return force


class MeanFieldTable:
    """
    Spline of the mollified enclosed charge over radius, for evaluating
    k^N * ρ at many points at once

    Beyond the tabulated range the unmollified enclosed charge is used
    """

    def __init__(self, config, profile, density, points=1025):
        self.config = config
        self.density = density
        self.max_radius = density.extent + config.cutoff_length
        radii = np.linspace(0.0, self.max_radius, points)[1:]
        if profile is None:
            charges = density.radial_enclosed_charge(radii)
        else:
            charges = np.array([
                smoothed_enclosed_charge(profile, density, r,
                                         config.cutoff_length)
                for r in radii])
        self.min_radius = radii[0]
        self._ratio = CubicSpline(radii, charges / radii ** 3)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        inside = self._ratio(np.clip(r, self.min_radius, self.max_radius))
        with np.errstate(divide='ignore', invalid='ignore'):
            outside = self.density.radial_enclosed_charge(r) / r ** 3
        ratio = np.where(r <= self.max_radius, inside, outside)
        return self.config.strength * x * ratio[..., np.newaxis]


@functools.lru_cache(maxsize=32)
def meanfield_table(config, profile, density, points=1025):
    """
    Cached :class:`MeanFieldTable`
    """
    return MeanFieldTable(config, profile, density, points=points)


def meanfield_force_sup_norm(config, profile, density, points=257):
    """
    sup |k^N * ρ| over radii, scanned on a grid up to the density extent and
    refined around the largest grid value
    """
    if config.strength == 0:
        return 0.0

    def magnitude(r):
        if profile is None:
            charge = float(density.radial_enclosed_charge(r))
        else:
            charge = smoothed_enclosed_charge(profile, density, r,
                                              config.cutoff_length)
        return abs(config.strength) * charge / r ** 2

    radii = np.linspace(0.0, density.extent + config.cutoff_length,
                        points)[1:]
    values = np.array([magnitude(r) for r in radii])
    best = int(np.argmax(values))
    refined = minimize_scalar(
        lambda r: -magnitude(r), method='bounded',
        bounds=(radii[max(best - 1, 0)], radii[min(best + 1, len(radii) - 1)]),
        options={'xatol': 1e-10})
    return max(float(values[best]), float(-refined.fun))


def ell_convolution(config, density, x, power=1, full_output=False):
    """
    ((ℓ^N)^power * ρ)(x) for a radial density

    The radial integral over |x - y| is split where ℓ^N changes form
    (6 N^-δ), at 1, at |x| and at the edges of a compact support

    :raises QuadratureError: if a piece does not converge
    """
    s = float(np.linalg.norm(np.asarray(x, dtype=float)))
    scale = config.core_scale
    inner = ELL_RADIUS_FACTOR / scale
    support = density.support_radius

    def spherical_average(u):
        if s == 0.0:
            return float(density.radial(u))
        return density.radial_moment_integral(abs(s - u), s + u) / (2 * s * u)

    def integrand(u):
        majorant = scale ** 3 if u < inner else ELL_NUMERATOR / u ** 3
        return (4.0 * math.pi * u ** 2 * majorant ** power
                * spherical_average(u))

    upper = s + support
    points = {0.0, inner, 1.0, s, abs(s - support), upper}
    breakpoints = sorted(p for p in points if p <= upper)
    value, error = radial_quad(integrand, breakpoints,
                               what='ell^N convolution')
    if full_output:
        return value, error
    return value


def ell_convolution_sup(config, density, power=1, points=65):
    """
    sup over a radial grid of ((ℓ^N)^power * ρ)
    """
    radii = np.linspace(0.0, density.extent, points)
    return max(ell_convolution(config, density, (r, 0.0, 0.0), power=power)
               for r in radii)


def sample_initial_phase(density, velocity, n, rng):
    """
    `n` i.i.d. particles with positions from `density` and velocities from
    `velocity`, drawn from the numpy Generator `rng`
    """
    if n < 1:
        raise ValueError("the initial ensemble needs at least one particle, "
                         "got n = {}".format(n))
    positions = density.sample(rng, n)
    velocities = velocity.sample(rng, n)
    return PhaseState(positions, velocities)


class EllTable:
    """
    Spline of ((ℓ^N)^power * ρ) over radius up to the density extent;
    points farther out are integrated directly
    """

    def __init__(self, config, density, power=1, points=513):
        self.config = config
        self.density = density
        self.power = power
        self.max_radius = density.extent
        radii = np.linspace(0.0, self.max_radius, points)
        values = [ell_convolution(config, density, (r, 0.0, 0.0), power=power)
                  for r in radii]
        self._spline = CubicSpline(radii, values)

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=-1)
        values = self._spline(np.minimum(r, self.max_radius))
        for index in np.flatnonzero(r > self.max_radius):
            values[index] = ell_convolution(self.config, self.density,
                                            x[index], power=self.power)
        return values


@functools.lru_cache(maxsize=32)
def ell_table(config, density, power=1, points=513):
    """
    Cached :class:`EllTable`
    """
    return EllTable(config, density, power=power, points=points)
