"""
Analytic and Monte Carlo oracles

The kinetic Fokker-Planck kernel

    G(x, v, t) = C t^-6 exp(-|v|²/4t - 3|x - tv/2|²/t³)

is a product of one identical factor per coordinate, so every integral of G
over R⁶ is the cube of a 2-D integral, computed here with adaptive
quadrature. Integrating out v for fixed y = x - tv/2 gives
∫exp(-|v|²/4t) dv · ∫exp(-3|y|²/t³) dy = (4/3)^{3/2} π³ t⁶, whence
C = 3√3 / (8π³).
"""
import dataclasses
import math

import numpy as np
from scipy.integrate import dblquad, quad
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree
from scipy.stats import binom, norm

from vpfplab.errors import QuadratureError

#: Normalization of the kinetic Fokker-Planck kernel
GREEN_NORMALIZATION = 3.0 * math.sqrt(3.0) / (8.0 * math.pi ** 3)

#: Constants of the Gaussian tail bound of the Brownian maximum
TAIL_C1 = math.sqrt(2.0 / math.pi)
TAIL_C2 = 0.5

# half-width of the quadrature boxes, in standard deviations
_TRUNCATION = 10.0

# paths simulated per batch by brownian_max_tail
_PATH_BATCH = 2000


@dataclasses.dataclass(frozen=True)
class GreenEval:
    """
    The kernel G(·, ·, t) at a fixed time t > 0
    """
    time: float
    normalization: float = GREEN_NORMALIZATION

    def __post_init__(self):
        if not self.time > 0:
            raise ValueError("time must be positive, got {}".format(
                self.time))

    @property
    def velocity_std(self):
        return math.sqrt(2.0 * self.time)

    @property
    def position_std(self):
        return math.sqrt(2.0 * self.time ** 3 / 3.0)

    def factor(self, x, v):
        """
        The one-coordinate factor of G, G = Π_k factor(x_k, v_k)
        """
        t = self.time
        return (self.normalization ** (1.0 / 3.0) * t ** -2.0
                * np.exp(-np.square(v) / (4.0 * t)
                         - 3.0 * np.square(x - t * v / 2.0) / t ** 3))


def kinetic_green(g, x, v):
    """
    G(x, v, t) for points of shape (..., 3)
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.prod(g.factor(x, v), axis=-1)


def _coordinate_integral(g, weight, what):
    """
    ∫∫ weight(x, v) factor(x, v) dx dv over a box of ±10 standard deviations
    """
    x_edge = _TRUNCATION * g.position_std
    v_edge = _TRUNCATION * g.velocity_std
    value, error = dblquad(lambda x, v: weight(x, v) * g.factor(x, v),
                           -v_edge, v_edge, -x_edge, x_edge,
                           epsabs=1e-13, epsrel=1e-11)
    if not math.isfinite(value):
        raise QuadratureError("{} did not converge".format(what), error)
    return value


def green_total_mass(t):
    """
    ∫∫ G dx dv by quadrature
    """
    g = GreenEval(t)
    return _coordinate_integral(g, lambda x, v: 1.0, 'total mass') ** 3


def green_moments(t):
    """
    Per-component second moments (Var v, Cov(x, v), Var x) of G(·, ·, t) by
    quadrature
    """
    g = GreenEval(t)
    mass = _coordinate_integral(g, lambda x, v: 1.0, 'mass')
    return tuple(
        _coordinate_integral(g, weight, 'second moment') / mass
        for weight in (lambda x, v: v * v, lambda x, v: x * v,
                       lambda x, v: x * x))


def free_kinetic_moments(sigma, t):
    """
    Exact per-component (Var v, Cov(x, v), Var x) at time t of
    dx = v dt, dv = √(2σ) dB started at the origin

    >>> free_kinetic_moments(1.0, 1.0)
    (2.0, 1.0, 0.6666666666666666)
    """
    if not t > 0:
        raise ValueError("t must be positive, got {}".format(t))
    return (2.0 * sigma * t, sigma * t ** 2, 2.0 * sigma * t ** 3 / 3.0)


def _velocity_marginal(g, x, integrand=None):
    """
    ∫ integrand(x, v) dv over the real line with a breakpoint at the mode
    """
    integrand = integrand or g.factor
    center = 2.0 * x / g.time
    edge = _TRUNCATION * g.velocity_std
    total = 0.0
    for lower, upper in ((center - edge, center), (center, center + edge)):
        value, error = quad(lambda v: integrand(x, v), lower, upper,
                            epsabs=1e-14, epsrel=1e-11, limit=200)
        if not math.isfinite(value):
            raise QuadratureError("velocity integral did not converge", error)
        total += value
    return total


def _grid_sup(function, edge, points):
    grid = np.linspace(-edge, edge, points)
    values = np.array([function(x) for x in grid])
    best = int(np.argmax(values))
    refined = minimize_scalar(
        lambda x: -function(x), method='bounded',
        bounds=(grid[max(best - 1, 0)], grid[min(best + 1, points - 1)]),
        options={'xatol': 1e-12 * max(edge, 1.0)})
    return max(float(values[best]), float(-refined.fun))


def mixed_norm_inf_1(t, points=201):
    """
    ‖G_t‖_{∞,1} = sup_x ∫ G(x, v, t) dv by quadrature over v and a grid
    search over x, exact value (4πt³/3)^{-3/2}
    """
    g = GreenEval(t)
    edge = _TRUNCATION * g.position_std
    return _grid_sup(lambda x: _velocity_marginal(g, x), edge, points) ** 3


def mixed_norm_inf_1_exact(t):
    return (4.0 * math.pi * t ** 3 / 3.0) ** -1.5


def shifted_difference_norm(t, h, points=201):
    """
    ‖G_t(· - h e₁) - G_t(· + h e₁)‖_{∞,1}, the kernel shifted by ±h along the
    first position axis

    Only the first coordinate factor differs, and the difference changes sign
    at v = 2x/t, where the velocity integral is split
    """
    g = GreenEval(t)
    edge = _TRUNCATION * g.position_std

    def difference(x, v):
        return abs(g.factor(x - h, v) - g.factor(x + h, v))

    first = _grid_sup(lambda x: _velocity_marginal(g, x, difference), edge,
                      points)
    others = _grid_sup(lambda x: _velocity_marginal(g, x), edge, points)
    return first * others ** 2


def concentration_check(sample_generator, g_of_n, n, c_alpha, trials, rng,
                        batch=None):
    """
    Frequency of |Z̄| >= C_α √g(n) log n / √n over `trials` means of n
    i.i.d. variables

    :param sample_generator: (rng, shape) -> array of that shape
    """
    threshold = c_alpha * math.sqrt(g_of_n(n)) * math.log(n) / math.sqrt(n)
    batch = batch or max(1, 10 ** 7 // n)
    exceeded = 0
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        means = np.mean(sample_generator(rng, (size, n)), axis=1)
        exceeded += int(np.count_nonzero(np.abs(means) >= threshold))
        done += size
    return exceeded / trials


def brownian_max_tail(delta_t, b, trials, rng, steps=1000, bridge=True):
    """
    Monte Carlo frequency of max_{s <= Δt} B(s) >= b for a scalar Brownian
    motion, next to the reflection-principle value 2 (1 - Φ(b / √Δt))

    Paths are sampled on a grid of `steps` intervals. With `bridge`, the
    maximum inside each interval is drawn exactly from the Brownian bridge
    between the grid values, which removes the discrete-monitoring bias

    :return: ``(empirical, analytic)``
    """
    if not delta_t > 0:
        raise ValueError("delta_t must be positive, got {}".format(delta_t))
    if b < 0:
        raise ValueError("b must be nonnegative, got {}".format(b))
    h = delta_t / steps
    hits = 0
    done = 0
    while done < trials:
        size = min(_PATH_BATCH, trials - done)
        increments = math.sqrt(h) * rng.standard_normal((size, steps))
        path = np.concatenate([np.zeros((size, 1)),
                               np.cumsum(increments, axis=1)], axis=1)
        if bridge:
            left, right = path[:, :-1], path[:, 1:]
            u = 1.0 - rng.random((size, steps))
            interval_max = (left + right + np.sqrt(
                (right - left) ** 2 - 2.0 * h * np.log(u))) / 2.0
            maxima = np.max(interval_max, axis=1)
        else:
            maxima = np.max(path, axis=1)
        hits += int(np.count_nonzero(maxima >= b))
        done += size
    return hits / trials, float(2.0 * norm.sf(b / math.sqrt(delta_t)))


def brownian_tail_bound(delta_t, b, c1=TAIL_C1, c2=TAIL_C2):
    """
    C₁ (√Δt / b) exp(-C₂ b² / Δt); with the default constants an upper
    bound of the reflection value
    """
    return c1 * math.sqrt(delta_t) / b * math.exp(-c2 * b ** 2 / delta_t)


def collision_radius(n, lambda2, dt_block):
    """
    N^-λ₂ + log N Δt^{3/2}
    """
    return n ** -lambda2 + math.log(n) * dt_block ** 1.5


def collision_candidate_count(state, lambda2, dt_block, t_offset, n=None):
    """
    For every particle i the number of j ≠ i with
    |x_i - x_j + t_offset (v_i - v_j)| <= N^-λ₂ + log N Δt^{3/2}

    :param n: the N of the radius, defaults to the size of `state`
    """
    if not 0 <= t_offset <= dt_block:
        raise ValueError("t_offset must lie in [0, dt_block], got {}".format(
            t_offset))
    n = n or len(state)
    streamed = state.positions + t_offset * state.velocities
    tree = cKDTree(streamed)
    within = tree.query_ball_point(streamed, collision_radius(
        n, lambda2, dt_block), return_length=True)
    return np.asarray(within) - 1


def collision_constant(density):
    """
    C* = ‖ρ‖₃ (4π/3)^{2/3}, so that P(|X - y| <= R) <= C* R² by Hölder
    """
    return density.lp_norm(3) * (4.0 * math.pi / 3.0) ** (2.0 / 3.0)


def collision_bound(n, lambda2, dt_block, c_star):
    """
    2 C* N (3 N^-λ₂ + log N Δt^{3/2})²
    """
    return (2.0 * c_star * n
            * (3.0 * n ** -lambda2 + math.log(n) * dt_block ** 1.5) ** 2)


def collision_binomial_tail(n, p, threshold):
    """
    P(count > threshold) for a Binomial(n - 1, p) candidate count
    """
    return float(binom.sf(threshold, n - 1, p))
