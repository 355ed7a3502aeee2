import math

import numpy as np
import pytest
from scipy.stats import linregress

from vpfplab.errors import QuadratureError, SingularKernelError
from vpfplab.kernels import (
    BUMP_NORMALIZATION, DEFAULT_PROFILE, KernelConfig, PolynomialBump,
    blob_density, blob_profile, convolution_quadrature, coulomb,
    ell, gradient_ell_ratio, gradient_sup_norm, k1_l1_norm, kernel_gradient,
    kernel_l2_norm, lipschitz_ratio, radial_quad, regularized_kernel,
    remark_parameters, scaled_blob, split_kernel, theorem_window)

PROFILES = [DEFAULT_PROFILE, PolynomialBump(4)]


def random_points(rng, count, max_radius, min_radius=0.0):
    directions = rng.standard_normal((count, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, np.newaxis]
    radii = rng.uniform(min_radius, max_radius, count)
    return directions * radii[:, np.newaxis]


def slope(ns, values):
    return linregress(np.log(ns), np.log(values)).slope


class TestBlob:

    @pytest.mark.parametrize('profile', PROFILES)
    def test_unit_mass(self, profile):
        mass, _ = radial_quad(
            lambda r: 4.0 * math.pi * r ** 2 * float(
                profile.radial_density(r)), [0.0, 1.0])
        assert mass == pytest.approx(1.0, abs=1e-8)
        assert float(profile.enclosed_mass(0.0)) == 0.0
        assert float(profile.enclosed_mass(1.0)) == pytest.approx(1.0,
                                                                  abs=1e-14)
        assert float(profile.enclosed_mass(3.0)) == 1.0

    @pytest.mark.parametrize('profile', PROFILES)
    def test_enclosed_mass_nondecreasing(self, profile):
        masses = profile.enclosed_mass(np.linspace(0.0, 1.5, 1001))
        assert np.all(np.diff(masses) >= -1e-15)

    def test_bump_value_at_origin(self):
        assert float(blob_density(DEFAULT_PROFILE, np.zeros(3))) == \
            pytest.approx(BUMP_NORMALIZATION, rel=1e-14)
        assert BUMP_NORMALIZATION == pytest.approx(315.0 / (64.0 * math.pi))

    def test_outside_support(self):
        assert blob_density(DEFAULT_PROFILE, [1.5, 0.0, 0.0]) == 0.0

    def test_scaled_blob(self):
        n, exponent = 1024, 1.0 / 3.0
        scale = n ** exponent
        assert scaled_blob(DEFAULT_PROFILE, exponent, n,
                           [1.0001 / scale, 0.0, 0.0]) == 0.0
        assert float(scaled_blob(DEFAULT_PROFILE, exponent, n, np.zeros(3))) \
            == pytest.approx(scale ** 3 * BUMP_NORMALIZATION, rel=1e-12)

        def shell(r):
            return 4.0 * math.pi * r ** 2 * float(scaled_blob(
                DEFAULT_PROFILE, exponent, n, [r, 0.0, 0.0]))

        mass, _ = radial_quad(shell, [0.0, 1.0 / scale])
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_scaled_blob_preconditions(self):
        with pytest.raises(ValueError):
            scaled_blob(DEFAULT_PROFILE, 0.0, 100, np.zeros(3))
        with pytest.raises(ValueError):
            scaled_blob(DEFAULT_PROFILE, 0.5, 1, np.zeros(3))

    def test_blob_profile_lookup(self):
        assert blob_profile() is DEFAULT_PROFILE
        assert blob_profile('bump', 4) == PolynomialBump(4)
        with pytest.raises(KeyError):
            blob_profile('gaussian')
        with pytest.raises(ValueError):
            PolynomialBump(2)


class TestCoulomb:

    @pytest.mark.parametrize('strength, x, expected', [
        (1.0, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        (1.0, [0.0, 2.0, 0.0], [0.0, 0.25, 0.0]),
        (-1.0, [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]),
    ])
    def test_values(self, strength, x, expected):
        config = KernelConfig(n_particles=100, strength=strength)
        assert np.allclose(coulomb(config, x), expected, rtol=0, atol=1e-15)

    def test_singular_origin(self, kernel_config):
        with pytest.raises(SingularKernelError):
            coulomb(kernel_config, np.zeros(3))
        with pytest.raises(ZeroDivisionError):
            coulomb(kernel_config, [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class TestRegularizedKernel:

    @pytest.mark.parametrize('profile', PROFILES)
    def test_exact_outside_cutoff(self, kernel_config, profile, rng):
        x = random_points(rng, 1000, 10.0, kernel_config.cutoff_length)
        exact = coulomb(kernel_config, x)
        got = regularized_kernel(kernel_config, profile, x)
        relative = (np.linalg.norm(got - exact, axis=1)
                    / np.linalg.norm(exact, axis=1))
        assert np.max(relative) <= 1e-12

    def test_origin(self, kernel_config, profile):
        assert np.array_equal(
            regularized_kernel(kernel_config, profile, np.zeros(3)),
            np.zeros(3))

    @pytest.mark.parametrize('profile', PROFILES)
    def test_odd_and_dominated(self, kernel_config, profile, rng):
        x = random_points(rng, 1000, 3.0 * kernel_config.cutoff_length, 1e-6)
        k_n = regularized_kernel(kernel_config, profile, x)
        assert np.array_equal(regularized_kernel(kernel_config, profile, -x),
                              -k_n)
        assert np.all(np.linalg.norm(k_n, axis=1)
                      <= np.linalg.norm(coulomb(kernel_config, x), axis=1)
                      * (1 + 1e-14))

    def test_against_convolution_quadrature(self, profile):
        config = KernelConfig(n_particles=256)
        x = 0.5 * config.cutoff_length * np.array([0.0, 0.6, 0.8])
        shell = regularized_kernel(config, profile, x)
        direct = convolution_quadrature(config, profile, x)
        assert np.linalg.norm(shell - direct) <= 1e-6 * np.linalg.norm(direct)

    @pytest.mark.slow
    @pytest.mark.parametrize('profile', PROFILES)
    def test_against_convolution_quadrature_random(self, kernel_config,
                                                   profile, rng):
        x = random_points(rng, 50, 0.95 * kernel_config.cutoff_length)
        for point in x:
            shell = regularized_kernel(kernel_config, profile, point)
            direct = convolution_quadrature(kernel_config, profile, point)
            assert np.linalg.norm(shell - direct) <= 1e-6 * np.linalg.norm(
                direct)


class TestKernelGradient:

    def test_coulomb_outside_cutoff(self, kernel_config, profile, rng):
        x = random_points(rng, 100, 5.0, kernel_config.cutoff_length)
        r = np.linalg.norm(x, axis=1)
        analytic = (np.eye(3) / r[:, None, None] ** 3
                    - 3.0 * x[:, :, None] * x[:, None, :]
                    / r[:, None, None] ** 5)
        got = kernel_gradient(kernel_config, profile, x)
        assert np.all(np.linalg.norm(got - analytic, axis=(1, 2))
                      <= 1e-12 * np.linalg.norm(analytic, axis=(1, 2)))

    @pytest.mark.parametrize('profile', PROFILES)
    def test_finite_differences(self, kernel_config, profile, rng):
        h = 1e-5 * kernel_config.cutoff_length
        x = random_points(rng, 100, 0.9 * kernel_config.cutoff_length,
                          0.05 * kernel_config.cutoff_length)
        jacobians = kernel_gradient(kernel_config, profile, x)
        for point, jacobian in zip(x, jacobians):
            columns = [
                (regularized_kernel(kernel_config, profile, point + h * e)
                 - regularized_kernel(kernel_config, profile, point - h * e))
                / (2.0 * h) for e in np.eye(3)]
            numeric = np.stack(columns, axis=1)
            assert np.linalg.norm(numeric - jacobian) <= \
                1e-5 * np.linalg.norm(jacobian)

    @pytest.mark.parametrize('delta', [1.0 / 3.0, 0.9])
    def test_sup_norm_growth(self, profile, delta):
        ns = 2.0 ** np.arange(8, 17)
        sups = [gradient_sup_norm(KernelConfig(int(n), cutoff_exponent=delta),
                                  profile) for n in ns]
        assert slope(ns, sups) == pytest.approx(3.0 * delta, abs=0.05)


class TestEll:

    def test_branches(self, kernel_config):
        scale = kernel_config.core_scale
        assert float(ell(kernel_config, np.zeros(3))) == scale ** 3
        assert float(ell(kernel_config, [6.0 / scale, 0.0, 0.0])) == \
            pytest.approx(scale ** 3, rel=1e-12)
        assert float(ell(kernel_config, [0.0, 12.0 / scale, 0.0])) == \
            pytest.approx(scale ** 3 / 8.0, rel=1e-12)


class TestSplitKernel:

    def test_pieces(self, kernel_config, profile, rng):
        x = random_points(rng, 500, 3.0 * kernel_config.wide_cutoff_length)
        k1, k2 = split_kernel(kernel_config, profile, x)
        assert np.allclose(k1 + k2, regularized_kernel(kernel_config,
                                                       profile, x),
                           rtol=1e-12, atol=1e-12)
        outside = (np.linalg.norm(x, axis=1)
                   >= kernel_config.wide_cutoff_length)
        assert np.all(k1[outside] == 0.0)
        assert np.allclose(k2[outside], coulomb(kernel_config, x[outside]),
                           rtol=1e-12, atol=0)

    def test_origin(self, kernel_config, profile):
        k1, k2 = split_kernel(kernel_config, profile, np.zeros(3))
        assert not np.any(k1) and not np.any(k2)


class TestNorms:

    @pytest.mark.parametrize('delta', [1.0 / 3.0, 0.9])
    def test_l2_growth(self, profile, delta):
        ns = 2.0 ** np.arange(10, 21)
        norms = [kernel_l2_norm(KernelConfig(int(n), cutoff_exponent=delta),
                                profile) for n in ns]
        assert slope(ns, norms) == pytest.approx(delta / 2.0, abs=0.03)

    def test_l2_coulomb_diverges(self, kernel_config):
        with pytest.raises(QuadratureError) as error:
            kernel_l2_norm(kernel_config, None)
        assert error.value.achieved >= 0

    def test_l2_monte_carlo(self, profile):
        config = KernelConfig(n_particles=4096)
        rng = np.random.default_rng(4096)
        radius = 2.0 * config.cutoff_length
        volume = 4.0 * math.pi * radius ** 3 / 3.0
        r = radius * rng.random(200000) ** (1.0 / 3.0)
        x = random_points(rng, 200000, 1.0, 1.0) * r[:, np.newaxis]
        samples = volume * np.sum(regularized_kernel(config, profile, x) ** 2,
                                  axis=1)
        tail = 4.0 * math.pi / radius
        estimate = np.mean(samples) + tail
        stderr = np.std(samples) / math.sqrt(len(samples))
        assert abs(estimate - kernel_l2_norm(config, profile) ** 2) <= \
            3.0 * stderr

    @pytest.mark.parametrize('n', [256, 4096, 65536])
    def test_k1_closed_form(self, n):
        config = KernelConfig(n_particles=n, cutoff_exponent=0.9,
                              wide_cutoff_exponent=0.3, strength=-2.0)
        exact = 4.0 * math.pi * 2.0 * 63.0 / 128.0 * (n ** -0.3 - n ** -0.9)
        assert k1_l1_norm(config) == pytest.approx(exact, rel=1e-8)

    @pytest.mark.parametrize('lambda2', [0.3, 0.15])
    def test_k1_decay(self, lambda2):
        ns = 2.0 ** np.arange(8, 17)
        norms = [k1_l1_norm(KernelConfig(int(n), cutoff_exponent=0.9,
                                         wide_cutoff_exponent=lambda2))
                 for n in ns]
        assert slope(ns, norms) == pytest.approx(-lambda2, abs=0.05)

    def test_k1_degenerate_split(self):
        config = KernelConfig(1000, cutoff_exponent=0.3,
                              wide_cutoff_exponent=0.3)
        assert k1_l1_norm(config) == 0.0


class TestRatios:

    @pytest.mark.parametrize('n', [2 ** 8, 2 ** 12, 2 ** 16])
    def test_lipschitz_claim(self, n, profile, rng):
        config = KernelConfig(n_particles=n)
        length = config.cutoff_length
        x = random_points(rng, 10000, 10.0 * length)
        xi = random_points(rng, 10000, 4.0 * length, 0.01 * length)
        assert np.max(lipschitz_ratio(config, profile, x, xi)) <= 10.0

    @pytest.mark.parametrize('n', [2 ** 8, 2 ** 12, 2 ** 16])
    def test_gradient_ell_bound(self, n, profile, rng):
        config = KernelConfig(n_particles=n)
        x = random_points(rng, 5000, 3.0 * config.wide_cutoff_length)
        y = x + random_points(rng, 5000, config.wide_cutoff_length)
        bound = 12.0 * n ** (3.0 * (config.cutoff_exponent
                             - config.wide_cutoff_exponent))
        assert np.max(gradient_ell_ratio(config, profile, x, y)) <= bound


class TestKernelConfig:

    def test_validation(self):
        with pytest.raises(ValueError):
            KernelConfig(n_particles=1)
        with pytest.raises(ValueError):
            KernelConfig(n_particles=100, cutoff_exponent=0.2,
                         wide_cutoff_exponent=0.3)

    def test_theorem_window(self):
        lower, upper = theorem_window(0.09, 0.3)
        assert lower == pytest.approx(1.0 / 3.0)
        assert upper == pytest.approx(min((0.09 + 0.9 + 1.0) / 6.0, 0.35))
        with pytest.raises(ValueError):
            theorem_window(0.2, 0.3)

    def test_remark_parameters(self):
        params = remark_parameters(1.0 / 63.0)
        assert params['lambda2'] == pytest.approx(1.0 / 3.0 - 1.0 / 63.0)
        lower, upper = theorem_window(params['lambda1'], params['lambda2'])
        assert lower < params['delta_max'] <= upper + 1e-12
        with pytest.raises(ValueError):
            remark_parameters(0.5)
