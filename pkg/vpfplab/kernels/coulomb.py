"""
Closed-form Coulomb kernels

All functions take points of shape (3,) or (..., 3) and are vectorized over
the leading axes. The mollified kernel k^N = k * ψ_δ^N is evaluated through
the shell theorem as a x / |x|³ · m(|x| N^δ), written as
a x N^{3δ} R(|x| N^δ) inside the cut-off with R = m / s³, so that no
division by |x| happens near the origin.
"""
import dataclasses

import numpy as np

from vpfplab.errors import SingularKernelError

#: Radius factor and numerator of the cut-off majorant ℓ^N
ELL_RADIUS_FACTOR = 6.0
ELL_NUMERATOR = 6.0 ** 3


@dataclasses.dataclass(frozen=True)
class KernelConfig:
    """
    Parameters of the interaction kernel

    :param n_particles:          N, at least 2
    :param strength:             a; a > 0 repulsive, a < 0 attractive
    :param cutoff_exponent:      δ, the blob width is N^-δ
    :param wide_cutoff_exponent: λ₂, the width of the regular part k₂^N

    λ₂ may equal δ, which makes the splitting degenerate (k₁^N ≡ 0)
    """
    n_particles: int
    strength: float = 1.0
    cutoff_exponent: float = 1.0 / 3.0
    wide_cutoff_exponent: float = 0.3

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("n_particles must be at least 2, got {}".format(
                self.n_particles))
        if not self.cutoff_exponent > 0:
            raise ValueError("cutoff_exponent must be positive, got {}".format(
                self.cutoff_exponent))
        if not 0 < self.wide_cutoff_exponent <= self.cutoff_exponent:
            raise ValueError(
                "wide_cutoff_exponent must lie in (0, cutoff_exponent], "
                "got {} with cutoff_exponent {}".format(
                    self.wide_cutoff_exponent, self.cutoff_exponent))

    @property
    def core_scale(self):
        """N^δ"""
        return float(self.n_particles) ** self.cutoff_exponent

    @property
    def wide_scale(self):
        """N^λ₂"""
        return float(self.n_particles) ** self.wide_cutoff_exponent

    @property
    def cutoff_length(self):
        """N^-δ"""
        return 1.0 / self.core_scale

    @property
    def wide_cutoff_length(self):
        """N^-λ₂"""
        return 1.0 / self.wide_scale

    def with_particles(self, n_particles):
        return dataclasses.replace(self, n_particles=n_particles)


def theorem_window(lambda1, lambda2):
    """
    The cut-off window [1/3, min{(λ₁ + 3λ₂ + 1)/6, (1 - λ₂)/2}) for which the
    coupled trajectories stay N^-λ₂ close

    :return: ``(lower, upper)``, empty when ``upper <= lower``
    """
    if not 0 < lambda2 < 1.0 / 3.0:
        raise ValueError("lambda2 must lie in (0, 1/3), got {}".format(
            lambda2))
    if not 0 < lambda1 < lambda2 / 3.0:
        raise ValueError("lambda1 must lie in (0, lambda2/3), got {}".format(
            lambda1))
    return 1.0 / 3.0, min((lambda1 + 3.0 * lambda2 + 1.0) / 6.0,
                          (1.0 - lambda2) / 2.0)


def remark_parameters(epsilon):
    """
    Parameters reaching the rate N^(-1/3 + ε) for 1/63 <= ε < 1/36

    :return: dict with ``lambda1``, ``lambda2`` and the largest admissible
             cut-off exponent ``delta_max`` (exclusive)
    """
    if not 1.0 / 63.0 <= epsilon < 1.0 / 36.0:
        raise ValueError("epsilon must lie in [1/63, 1/36), got {}".format(
            epsilon))
    return {
        'lambda1': 1.0 / 9.0 - epsilon,
        'lambda2': 1.0 / 3.0 - epsilon,
        'delta_max': 19.0 / 54.0 - 2.0 * epsilon / 3.0,
    }


def _as_points(x):
    return np.asarray(x, dtype=float)


def _mollified(strength, scale, profile, x):
    """
    Field a x / |x|³ · m(|x| scale), zero at the origin
    """
    x = _as_points(x)
    r = np.linalg.norm(x, axis=-1)
    s = r * scale
    with np.errstate(divide='ignore', invalid='ignore'):
        outer = strength / r ** 3
    inner = strength * scale ** 3 * profile.core_ratio(np.minimum(s, 1.0))
    factor = np.where(s >= 1.0, outer, inner)
    return x * factor[..., np.newaxis]


def coulomb(config, x):
    """
    The Coulomb kernel a x / |x|³

    :raises SingularKernelError: if any point is the origin
    """
    x = _as_points(x)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise SingularKernelError("the Coulomb kernel is singular at x = 0")
    return x * (config.strength / r ** 3)[..., np.newaxis]


def regularized_kernel(config, profile, x):
    """
    k^N(x) = (k * ψ_δ^N)(x); equals the Coulomb kernel for |x| >= N^-δ
    and vanishes at the origin
    """
    return _mollified(config.strength, config.core_scale, profile, x)


def kernel_gradient(config, profile, x):
    """
    Jacobian of k^N, shape (..., 3, 3) with entry [i, j] = ∂_j k^N_i
    """
    x = _as_points(x)
    r = np.linalg.norm(x, axis=-1)
    scale = config.core_scale
    s = r * scale
    outer_s = np.where(s >= 1.0, r, 1.0)
    eye = np.eye(3)
    outer_products = x[..., :, np.newaxis] * x[..., np.newaxis, :]

    inner_diag = scale ** 3 * profile.core_ratio(np.minimum(s, 1.0))
    inner_rank1 = scale ** 5 * profile.core_ratio_slope(np.minimum(s, 1.0))
    outer_diag = 1.0 / outer_s ** 3
    outer_rank1 = -3.0 / outer_s ** 5

    diag = np.where(s < 1.0, inner_diag, outer_diag)
    rank1 = np.where(s < 1.0, inner_rank1, outer_rank1)
    return config.strength * (diag[..., np.newaxis, np.newaxis] * eye
                              + rank1[..., np.newaxis, np.newaxis]
                              * outer_products)


def ell(config, x):
    """
    The cut-off majorant ℓ^N: 6³ / |x|³ from |x| >= 6 N^-δ on, N^{3δ} below
    """
    r = np.linalg.norm(_as_points(x), axis=-1)
    scale = config.core_scale
    with np.errstate(divide='ignore'):
        far = ELL_NUMERATOR / r ** 3
    return np.where(r >= ELL_RADIUS_FACTOR / scale, far, scale ** 3)


def split_kernel(config, profile, x):
    """
    Split k^N into a short-range part k₁^N and the wide cut-off part k₂^N

    k₂^N is k mollified at width N^-λ₂ and k₁^N = k^N - k₂^N, which
    vanishes from |x| >= N^-λ₂ on

    :return: ``(k1, k2)``
    """
    k_n = regularized_kernel(config, profile, x)
    k_2 = _mollified(config.strength, config.wide_scale, profile, x)
    return k_n - k_2, k_2


def lipschitz_ratio(config, profile, x, xi):
    """
    |k^N(x + ξ) - k^N(x)| / (ℓ^N(x) |ξ|)

    Stays below an N-independent constant for |ξ| < 4 N^-δ
    """
    x = _as_points(x)
    xi = _as_points(xi)
    difference = (regularized_kernel(config, profile, x + xi)
                  - regularized_kernel(config, profile, x))
    return (np.linalg.norm(difference, axis=-1)
            / (ell(config, x) * np.linalg.norm(xi, axis=-1)))


def gradient_ell_ratio(config, profile, x, y):
    """
    |∇k^N(x)| / ℓ^N(y) (Frobenius norm), bounded by C N^{3(δ - λ₂)} when
    |x - y| <= N^-λ₂
    """
    return (frobenius(kernel_gradient(config, profile, x))
            / ell(config, y))


def frobenius(jacobian):
    """
    Frobenius norm over the last two axes
    """
    return np.sqrt(np.sum(np.square(jacobian), axis=(-2, -1)))
