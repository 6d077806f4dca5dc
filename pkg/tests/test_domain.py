import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclap.domain import (
    DomainError,
    DomainSpec,
    distance_to_boundary,
    eigenfunction_grid,
    eigenvalue,
    gradient_grid,
    ground_state_bounds_probe,
    sobolev_norm,
    to_grid,
    to_spectral,
)
from fraclap.randfields import random_field

from conftest import single_mode


class TestDomainSpec:
    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            DomainSpec((-1.0,), 8, 32)
        with pytest.raises(DomainError):
            DomainSpec((1.0,), 8, 10)  # N < 2M
        with pytest.raises(DomainError):
            DomainSpec((1.0, 1.0, 1.0), 8, 32)  # d=3 out of scope

    def test_mode_ordering_monotone_in_lambda(self, square):
        lams = [eigenvalue(square, j) for j in square.mode_ordering()]
        assert all(a <= b + 1e-12 for a, b in zip(lams, lams[1:]))

    def test_eigenvalue_monotone_per_index(self, square):
        for j in range(1, square.mode_cutoff):
            assert eigenvalue(square, (j + 1, 3)) > eigenvalue(square, (j, 3))
            assert eigenvalue(square, (3, j + 1)) > eigenvalue(square, (3, j))


class TestEigenvalues:
    def test_interval_ground_state(self, interval):
        assert eigenvalue(interval, 1) == pytest.approx(1.0, abs=1e-14)

    def test_square_mixed_mode(self):
        d = DomainSpec((np.pi, np.pi), 8, 16)
        assert eigenvalue(d, (1, 2)) == pytest.approx(5.0, abs=1e-12)

    def test_interval_length_two(self):
        d = DomainSpec((2.0,), 8, 16)
        assert eigenvalue(d, 3) == pytest.approx((3 * np.pi / 2) ** 2, rel=1e-14)

    def test_out_of_range(self, interval):
        with pytest.raises(DomainError):
            eigenvalue(interval, 0)
        with pytest.raises(DomainError):
            eigenvalue(interval, interval.mode_cutoff + 1)


class TestEigenfunctions:
    def test_interval_ground_state_values(self, interval):
        w1 = eigenfunction_grid(interval, 1)
        x = interval.axis_nodes(0)
        np.testing.assert_allclose(w1.values, np.sqrt(2 / np.pi) * np.sin(x), atol=1e-13)

    def test_square_ground_state_values(self, square):
        w = eigenfunction_grid(square, (1, 1))
        X, Y = square.meshgrid()
        np.testing.assert_allclose(w.values, (2 / np.pi) * np.sin(X) * np.sin(Y), atol=1e-13)

    def test_l2_normalization(self, interval, square):
        for d, j in ((interval, (3,)), (square, (2, 5))):
            w = eigenfunction_grid(d, j)
            assert w.l2_norm() == pytest.approx(1.0, abs=1e-10)

    def test_orthonormality_gram(self, interval):
        S = interval.sine_table(0)
        gram = interval.cell_weight * S.T @ S
        assert np.abs(gram - np.eye(interval.mode_cutoff)).max() < 1e-8


class TestTransforms:
    def test_basis_vector(self, interval):
        f = to_spectral(eigenfunction_grid(interval, 1))
        expect = np.zeros(interval.mode_cutoff)
        expect[0] = 1.0
        np.testing.assert_allclose(f.coeffs, expect, atol=1e-12)

    def test_zero_field(self, square):
        z = single_mode(square, (1, 1), 0.0)
        assert np.all(to_grid(z).values == 0.0)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_round_trip(self, square, seed):
        f = random_field(square, seed)
        back = to_spectral(to_grid(f))
        assert np.abs(back.coeffs - f.coeffs).max() <= 1e-12 * np.abs(f.coeffs).max()

    @given(seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=20, deadline=None)
    def test_parseval(self, seed):
        domain = DomainSpec((np.pi,), 16, 40)
        f = random_field(domain, seed)
        grid = to_grid(f)
        assert grid.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-10)


class TestSobolevNorm:
    def test_ground_state_any_s(self, interval):
        w1 = single_mode(interval, 1)
        for s in (-1.0, 0.0, 0.7, 2.0):
            assert sobolev_norm(w1, s) == pytest.approx(1.0, abs=1e-13)

    def test_second_mode_scaling(self, interval):
        f = single_mode(interval, 2, 0.37)
        # ||f||_{s,D}^2 = lambda^s f^2 with lambda = 4
        assert sobolev_norm(f, 1.0) / sobolev_norm(f, 0.0) == pytest.approx(2.0, rel=1e-12)
        assert sobolev_norm(f, 0.5) / sobolev_norm(f, 0.0) == pytest.approx(np.sqrt(2), rel=1e-12)

    def test_zero(self, interval):
        z = single_mode(interval, 1, 0.0)
        assert sobolev_norm(z, 1.3) == 0.0


class TestGeometry:
    def test_interval_midpoint(self, interval):
        assert distance_to_boundary(interval, np.pi / 2) == pytest.approx(np.pi / 2)

    def test_square_near_side(self, square):
        assert distance_to_boundary(square, (0.1, 1.0)) == pytest.approx(0.1)

    def test_boundary_point(self, square):
        assert distance_to_boundary(square, (0.0, 1.0)) == 0.0

    def test_outside_raises(self, interval):
        with pytest.raises(DomainError):
            distance_to_boundary(interval, -0.5)


class TestGroundStateBounds:
    def test_interval_limits(self):
        # odd N so the grid hits the midpoint exactly
        d = DomainSpec((np.pi,), 16, 63)
        probe = ground_state_bounds_probe(d)
        h = d.spacings[0]
        # sup of sin(x)/min(x, pi-x) approached at the first node: sin(h)/h
        assert probe["C0_hat"] == pytest.approx(np.sqrt(2 / np.pi), rel=2 * h**2)
        assert probe["c0_hat"] == pytest.approx(np.sqrt(2 / np.pi) / (np.pi / 2), rel=1e-10)
        assert 0 < probe["c0_hat"] <= probe["C0_hat"] < np.inf

    def test_square_finite_positive(self, square):
        probe = ground_state_bounds_probe(square)
        assert 0 < probe["c0_hat"] <= probe["C0_hat"] < np.inf


class TestDerivatives:
    def test_gradient_of_mode(self, square):
        f = single_mode(square, (2, 3))
        gx, gy = gradient_grid(f)
        X, Y = square.meshgrid()
        c = 2.0 / np.pi
        np.testing.assert_allclose(
            gx.values, 2 * c * np.cos(2 * X) * np.sin(3 * Y), atol=1e-12
        )
        np.testing.assert_allclose(
            gy.values, 3 * c * np.sin(2 * X) * np.cos(3 * Y), atol=1e-12
        )
