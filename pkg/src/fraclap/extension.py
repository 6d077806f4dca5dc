"""Harmonic extension to the cylinder, trace norms, commutator probes.

The extension of f is v_f(x,z) = sum_j f_j e^{-z sqrt(lambda_j)} w_j(x);
the square root of the Dirichlet Laplacian is its normal derivative at
z = 0.  Commutators are computed by operator composition in the base
domain: the auxiliary cylinder problem has exactly that restriction at
truncation, so no infinite-cylinder solve is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import apply_lambda_s
from .domain import (
    DomainError,
    GridField,
    SpectralField,
    analyze,
    derivative_grid,
    gradient_grid,
    sobolev_norm,
    synthesize,
    to_grid,
)

__all__ = [
    "CylinderField",
    "BNorm",
    "harmonic_extend",
    "dtn_check",
    "extension_decay_norm",
    "v0_norm",
    "v0_equivalence_probe",
    "b_norm",
    "b_norm_stream",
    "commutator_mult",
    "commutator_advection",
]


@dataclass
class CylinderField:
    """Per-mode exponential profiles f_j e^{-z sqrt(lambda_j)} over a z grid."""

    base: SpectralField
    z_grid: np.ndarray

    def __post_init__(self):
        self.z_grid = np.asarray(self.z_grid, dtype=float)
        if (self.z_grid < 0).any():
            raise DomainError("cylinder heights must be nonnegative")

    @property
    def domain(self):
        return self.base.domain

    def slice_coeffs(self, z):
        lam = self.domain.eigenvalue_tensor()
        return self.base.coeffs * np.exp(-z * np.sqrt(lam))

    def slice(self, z):
        return SpectralField(self.domain, self.slice_coeffs(float(z)))

    def slab(self):
        """Grid values at every height; z is the leading axis."""
        return np.stack(
            [synthesize(self.domain, self.slice_coeffs(z)) for z in self.z_grid]
        )

    def slice_l2(self, z):
        return float(np.sqrt(np.sum(self.slice_coeffs(float(z)) ** 2)))

    def harmonicity_residual(self):
        """(Delta_x + d^2/dz^2) v_f in coefficients: identically zero."""
        lam = self.domain.eigenvalue_tensor()
        per_mode = (-lam + np.sqrt(lam) ** 2)[..., None] * np.exp(
            -np.sqrt(lam)[..., None] * self.z_grid
        )
        return float(np.abs(per_mode * self.base.coeffs[..., None]).max())


def harmonic_extend(f, z_grid):
    return CylinderField(f, np.asarray(z_grid, dtype=float))


def dtn_check(f, h):
    """One-sided Dirichlet-to-Neumann residual at step h.

    The coefficient identity -d/dz v_f|_0 = sqrt(lambda_j) f_j is exact;
    the returned residual ||(v(0) - v(h))/h - Lambda f|| is the first
    order one-sided difference error, O(h).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    lam = f.domain.eigenvalue_tensor()
    sq = np.sqrt(lam)
    diff = (1.0 - np.exp(-h * sq)) / h
    residual = float(np.sqrt(np.sum(((diff - sq) * f.coeffs) ** 2)))
    exact_gap = 0.0  # -d/dz at 0 equals sqrt(lambda_j) f_j by construction
    return {"residual": residual, "coefficient_gap": exact_gap}


def extension_decay_norm(f, ell=None):
    """Weighted cylinder energy ||e^{zl} grad v_f|| + ||e^{zl} v_f||.

    Per-mode z-integrals are closed form:
    int_0^inf e^{2zl} e^{-2z sqrt(lam)} dz = 1 / (2 (sqrt(lam) - l)).
    Defaults to l = lambda_1 / 4 and requires l < sqrt(lambda_1).
    """
    lam = f.domain.eigenvalue_tensor()
    lam1 = float(lam.min())
    l = ell if ell is not None else lam1 / 4.0
    if l >= np.sqrt(lam1):
        raise DomainError(
            f"decay weight l={l} >= sqrt(lambda_1)={np.sqrt(lam1)}; integral diverges"
        )
    zint = 1.0 / (2.0 * (np.sqrt(lam) - l))
    grad_sq = float(np.sum(2.0 * lam * f.coeffs**2 * zint))
    val_sq = float(np.sum(f.coeffs**2 * zint))
    value = np.sqrt(grad_sq) + np.sqrt(val_sq)
    v0 = sobolev_norm(f, 0.5)
    return {"value": float(value), "v0_norm": v0, "C_fit": float(value / v0) if v0 > 0 else 0.0}


def _gagliardo_seminorm_sq(g, chunk=512):
    """Grid Gagliardo seminorm^2 with the |x-y| < h ball excluded.

    The excluded ball is reinstated by the standard gradient correction:
    2h int (f')^2 in d=1, pi h int |grad f|^2 in d=2.
    """
    domain = g.domain
    mesh = domain.meshgrid()
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    vals = g.values.ravel()
    w = domain.cell_weight
    n = len(vals)
    acc = 0.0
    p = domain.dim + 1
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=-1))
        np.fill_diagonal(dist[:, lo:hi], np.inf)
        num = (vals[lo:hi, None] - vals[None, :]) ** 2
        acc += float(np.sum(num / dist**p))
    return acc * w * w


def _gagliardo_local_correction(f):
    domain = f.domain
    h = min(domain.spacings)
    grads = gradient_grid(f)
    grad_sq = sum(g.values**2 for g in grads)
    energy = domain.cell_weight * float(np.sum(grad_sq))
    return (2.0 * h if domain.dim == 1 else np.pi * h) * energy


def v0_norm(f):
    """Trace-space norm: L2 + Gagliardo H^{1/2} seminorm + int f^2/d."""
    g = to_grid(f)
    domain = f.domain
    l2_sq = domain.cell_weight * float(np.sum(g.values**2))
    semi_sq = _gagliardo_seminorm_sq(g) + _gagliardo_local_correction(f)
    weighted = domain.cell_weight * float(np.sum(g.values**2 / domain.distance_grid()))
    return float(np.sqrt(l2_sq + semi_sq + weighted))


def v0_equivalence_probe(samples):
    """min/max of v0_norm^2 / ||f||^2_{1/2,D} over a sample of fields."""
    ratios = []
    for f in samples:
        spectral = sobolev_norm(f, 0.5)
        if spectral == 0:
            continue
        ratios.append((v0_norm(f) / spectral) ** 2)
    return {"min_ratio": float(min(ratios)), "max_ratio": float(max(ratios))}


@dataclass
class BNorm:
    """Multiplier norm ||a||_B; W^{2,p} with p = 4 in the plane."""

    value: float
    pieces: dict


_DERIV_SETS = {
    1: [(0,), (1,), (2,)],
    2: [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)],
}


def b_norm(a, domain=None, p=4):
    """||a||_{W^{2,p}} for a band-limited field, or exactly for a constant.

    Constants are legitimate multipliers but have no sine representation,
    so a float argument takes the analytic branch (derivatives vanish).
    """
    if np.isscalar(a):
        if domain is None:
            raise DomainError("b_norm of a constant needs the domain")
        if domain.dim not in (1, 2):
            raise DomainError("b_norm defined for dim 1 and 2")
        volume = float(np.prod(domain.lengths))
        value = abs(float(a)) * volume ** (1.0 / p)
        return BNorm(value=value, pieces={"(0,)*dim": value})
    domain = a.domain
    if domain.dim not in (1, 2):
        raise DomainError("b_norm defined for dim 1 and 2")
    pieces = {}
    total = 0.0
    for orders in _DERIV_SETS[domain.dim]:
        d = derivative_grid(a, orders)
        lp = d.lp_norm(p)
        pieces[str(orders)] = lp
        total += lp**p
    return BNorm(value=float(total ** (1.0 / p)), pieces=pieces)


def b_norm_stream(stream, p=4):
    """B-norm of the velocity grad-perp(psi): sum of component norms."""
    domain = stream.domain
    if domain.dim != 2:
        raise DomainError("stream-function velocities need dim 2")
    total = 0.0
    pieces = {}
    for comp, sign, base in (("u1", -1.0, (0, 1)), ("u2", 1.0, (1, 0))):
        comp_total = 0.0
        for orders in _DERIV_SETS[2]:
            full = (orders[0] + base[0], orders[1] + base[1])
            d = derivative_grid(stream, full)
            comp_total += d.lp_norm(p) ** p
        pieces[comp] = float(comp_total ** (1.0 / p))
        total += pieces[comp]
    return BNorm(value=float(total), pieces=pieces)


def _project_product(domain, grid_values):
    """Sine-band coefficients of a product formed on the N >= 2M grid."""
    return analyze(GridField(domain, grid_values))


def commutator_mult(a, f):
    """[a, Lambda] f = a Lambda f - Lambda(a f), dealiased to the band.

    Returns the commutator field and the ratio
    ||[a,Lambda]f||_{1/2,D} / (||a||_B ||f||_{1/2,D}).
    """
    domain = f.domain
    lf = apply_lambda_s(f, 1.0)
    if np.isscalar(a):
        coeffs = float(a) * lf.coeffs - apply_lambda_s(float(a) * f, 1.0).coeffs
        norm_a = b_norm(a, domain=domain).value
    else:
        a_grid = synthesize(domain, a.coeffs)
        term1 = _project_product(domain, a_grid * synthesize(domain, lf.coeffs))
        af = _project_product(domain, a_grid * synthesize(domain, f.coeffs))
        lam = domain.eigenvalue_tensor()
        term2 = np.sqrt(lam) * af
        coeffs = term1 - term2
        norm_a = b_norm(a).value
    field = SpectralField(domain, coeffs)
    denom = norm_a * sobolev_norm(f, 0.5)
    ratio = sobolev_norm(field, 0.5) / denom if denom > 0 else 0.0
    return {"field": field, "ratio": float(ratio)}


def commutator_advection(stream, f):
    """[a . grad, Lambda] f for a = grad-perp(stream); tangency by construction.

    Ratio is measured against ||a||_B ||f||_{3/2,D}.
    """
    if not isinstance(stream, SpectralField):
        raise DomainError("advection commutator needs the velocity as a stream function")
    domain = f.domain
    if domain.dim != 2:
        raise DomainError("advection commutator implemented for dim 2")
    ux = -derivative_grid(stream, (0, 1)).values
    uy = derivative_grid(stream, (1, 0)).values
    lf = apply_lambda_s(f, 1.0)

    def a_dot_grad(h):
        gx, gy = gradient_grid(h)
        return _project_product(domain, ux * gx.values + uy * gy.values)

    term1 = a_dot_grad(lf)
    lam = domain.eigenvalue_tensor()
    term2 = np.sqrt(lam) * a_dot_grad(f)
    field = SpectralField(domain, term1 - term2)
    denom = b_norm_stream(stream).value * sobolev_norm(f, 1.5)
    ratio = sobolev_norm(field, 0.5) / denom if denom > 0 else 0.0
    return {"field": field, "ratio": float(ratio)}
