import numpy as np
import pytest

from fraclap.domain import DomainSpec, SpectralField


@pytest.fixture
def interval():
    return DomainSpec((np.pi,), mode_cutoff=32, grid_n=128)


@pytest.fixture
def square():
    return DomainSpec((np.pi, np.pi), mode_cutoff=16, grid_n=48)


def lift(f, target):
    """Zero-pad a field's coefficient block into a larger domain."""
    c = np.zeros(target.coeff_shape)
    c[tuple(slice(0, s) for s in f.coeffs.shape)] = f.coeffs
    return SpectralField(target, c)


def single_mode(domain, j, amplitude=1.0):
    c = np.zeros(domain.coeff_shape)
    if np.isscalar(j):
        j = (j,)
    c[tuple(v - 1 for v in j)] = amplitude
    return SpectralField(domain, c)
