__all__ = [
    'BlobProfile', 'PolynomialBump', 'DEFAULT_PROFILE', 'BUMP_NORMALIZATION',
    'blob_profile', 'blob_density', 'scaled_blob',
    'KernelConfig', 'coulomb', 'regularized_kernel', 'kernel_gradient',
    'ell', 'split_kernel', 'lipschitz_ratio', 'gradient_ell_ratio',
    'frobenius', 'theorem_window', 'remark_parameters',
    'kernel_l2_norm', 'k1_l1_norm', 'gradient_sup_norm',
    'radial_quad', 'convolution_quadrature',
]

from .blob import (
    BlobProfile, PolynomialBump, DEFAULT_PROFILE, BUMP_NORMALIZATION,
    blob_profile, blob_density, scaled_blob)
from .coulomb import (
    KernelConfig, coulomb, regularized_kernel, kernel_gradient, ell,
    split_kernel, lipschitz_ratio, gradient_ell_ratio, frobenius,
    theorem_window, remark_parameters)
from .norms import kernel_l2_norm, k1_l1_norm, gradient_sup_norm
from .quadrature import radial_quad, convolution_quadrature
