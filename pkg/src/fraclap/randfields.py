"""Seeded random spectral fields, reproducible across platforms.

Coefficients are i.i.d. normal with standard deviation lambda_j^{-decay}
(variance lambda^{-2} at the default decay), drawn from the counter-based
Philox generator so a seed pins the field bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .domain import SpectralField

__all__ = ["rng_for_seed", "random_field", "random_stream"]


def rng_for_seed(seed):
    return np.random.Generator(np.random.Philox(key=int(seed)))


def random_field(domain, seed, decay=1.0):
    """Smooth random field: coefficient std lambda_j^{-decay}."""
    rng = seed if isinstance(seed, np.random.Generator) else rng_for_seed(seed)
    lam = domain.eigenvalue_tensor()
    coeffs = rng.standard_normal(domain.coeff_shape) * lam ** (-decay)
    return SpectralField(domain, coeffs)


def random_stream(domain, seed, decay=1.5):
    """Smoother random field suitable as a stream function."""
    return random_field(domain, seed, decay=decay)
