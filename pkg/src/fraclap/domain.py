"""Dirichlet sine eigenbasis on intervals and rectangles.

The grid follows the DST-I convention: interior nodes x_i = i*L/(N+1),
i = 1..N per axis, with quadrature weight h = L/(N+1) per node.  On that
grid the normalized sine modes are exactly discretely orthonormal, so
inner products of band-limited fields are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "DomainSpec",
    "SpectralField",
    "GridField",
    "to_spectral",
    "to_grid",
    "sobolev_norm",
    "eigenvalue",
    "eigenfunction_grid",
    "distance_to_boundary",
    "ground_state_bounds_probe",
]


class DomainError(ValueError):
    """Invalid domain parameters or out-of-range indices/points."""


def _as_lengths(lengths):
    if np.isscalar(lengths):
        lengths = (float(lengths),)
    return tuple(float(L) for L in lengths)


@dataclass(frozen=True)
class DomainSpec:
    """Interval (0,L) or rectangle (0,L1)x(0,L2) with its sine eigenbasis.

    Parameters
    ----------
    lengths : side length, or tuple of side lengths (one per axis)
    mode_cutoff : number of retained modes M per axis
    grid_n : number of interior grid nodes N per axis; must satisfy
        N >= 2*M so that quadratic products are projected without aliasing.
    """

    lengths: tuple = (np.pi,)
    mode_cutoff: int = 32
    grid_n: int = 128

    def __post_init__(self):
        object.__setattr__(self, "lengths", _as_lengths(self.lengths))
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        if any(L <= 0 for L in self.lengths):
            raise DomainError(f"lengths must be positive, got {self.lengths}")
        if self.mode_cutoff < 1:
            raise DomainError("mode_cutoff must be >= 1")
        if self.grid_n < 2 * self.mode_cutoff:
            raise DomainError(
                f"grid_n={self.grid_n} < 2*mode_cutoff={2 * self.mode_cutoff}; "
                "dealiased products need N >= 2M"
            )

    @property
    def dim(self):
        return len(self.lengths)

    @property
    def coeff_shape(self):
        return (self.mode_cutoff,) * self.dim

    @property
    def grid_shape(self):
        return (self.grid_n,) * self.dim

    @property
    def spacings(self):
        return tuple(L / (self.grid_n + 1) for L in self.lengths)

    @property
    def cell_weight(self):
        """Quadrature weight of one grid node (product of spacings)."""
        return float(np.prod(self.spacings))

    @property
    def diameter(self):
        return float(np.sqrt(sum(L**2 for L in self.lengths)))

    def axis_nodes(self, axis):
        i = np.arange(1, self.grid_n + 1)
        return i * self.lengths[axis] / (self.grid_n + 1)

    def axis_eigenvalues(self, axis, band="mode"):
        m = self.mode_cutoff if band == "mode" else self.grid_n
        j = np.arange(1, m + 1)
        return (j * np.pi / self.lengths[axis]) ** 2

    @lru_cache(maxsize=None)
    def _tables(self, axis, band):
        """(sine, cosine) synthesis tables, shape (N, modes)."""
        m = self.mode_cutoff if band == "mode" else self.grid_n
        L = self.lengths[axis]
        arg = np.outer(np.arange(1, self.grid_n + 1), np.arange(1, m + 1))
        arg = arg * (np.pi / (self.grid_n + 1))
        norm = np.sqrt(2.0 / L)
        return norm * np.sin(arg), norm * np.cos(arg)

    def sine_table(self, axis, band="mode"):
        return self._tables(axis, band)[0]

    def cosine_table(self, axis, band="mode"):
        return self._tables(axis, band)[1]

    def eigenvalue_tensor(self, band="mode"):
        """lambda_j over the retained multi-index block."""
        if self.dim == 1:
            return self.axis_eigenvalues(0, band)
        lx = self.axis_eigenvalues(0, band)
        ly = self.axis_eigenvalues(1, band)
        return lx[:, None] + ly[None, :]

    @lru_cache(maxsize=1)
    def mode_ordering(self):
        """Multi-indices sorted by (eigenvalue, lexicographic index)."""
        if self.dim == 1:
            return tuple((j,) for j in range(1, self.mode_cutoff + 1))
        lam = self.eigenvalue_tensor()
        idx = [
            (lam[a, b], (a + 1, b + 1))
            for a in range(self.mode_cutoff)
            for b in range(self.mode_cutoff)
        ]
        idx.sort()
        return tuple(j for _, j in idx)

    def refined(self, factor=2):
        """Same domain and band, factor-times finer grid (for dealiasing)."""
        return DomainSpec(self.lengths, self.mode_cutoff, factor * self.grid_n)

    def meshgrid(self):
        axes = [self.axis_nodes(a) for a in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def distance_grid(self):
        """d(x) = dist(x, boundary) evaluated on the interior grid."""
        mesh = self.meshgrid()
        d = np.minimum(mesh[0], self.lengths[0] - mesh[0])
        for a in range(1, self.dim):
            d = np.minimum(d, np.minimum(mesh[a], self.lengths[a] - mesh[a]))
        return d


def _check_index(domain, j):
    if np.isscalar(j):
        j = (int(j),)
    j = tuple(int(v) for v in j)
    if len(j) != domain.dim:
        raise DomainError(f"multi-index {j} has wrong length for dim={domain.dim}")
    for v in j:
        if not 1 <= v <= domain.mode_cutoff:
            raise DomainError(f"mode index {j} out of range 1..{domain.mode_cutoff}")
    return j


def eigenvalue(domain, j):
    """lambda_j = sum_i (j_i pi / L_i)^2."""
    j = _check_index(domain, j)
    return float(sum((v * np.pi / L) ** 2 for v, L in zip(j, domain.lengths)))


@dataclass
class SpectralField:
    """Coefficients over the retained sine modes of a domain."""

    domain: DomainSpec
    coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.coeffs is None:
            self.coeffs = np.zeros(self.domain.coeff_shape)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != self.domain.coeff_shape:
            raise DomainError(
                f"coefficient shape {self.coeffs.shape} does not match "
                f"domain block {self.domain.coeff_shape}"
            )

    def copy(self):
        return SpectralField(self.domain, self.coeffs.copy())

    def __add__(self, other):
        return SpectralField(self.domain, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return SpectralField(self.domain, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.domain, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.coeffs**2)))

    def inner(self, other):
        return float(np.sum(self.coeffs * other.coeffs))

    def to_grid(self, on=None):
        return to_grid(self, on=on)

    def sobolev_norm(self, s):
        return sobolev_norm(self, s)


@dataclass
class GridField:
    """Values on the interior tensor grid of a domain."""

    domain: DomainSpec
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.domain.grid_shape)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.domain.grid_shape:
            raise DomainError(
                f"grid shape {self.values.shape} does not match "
                f"domain grid {self.domain.grid_shape}"
            )

    def copy(self):
        return GridField(self.domain, self.values.copy())

    def __add__(self, other):
        return GridField(self.domain, self.values + other.values)

    def __sub__(self, other):
        return GridField(self.domain, self.values - other.values)

    def __mul__(self, scalar):
        return GridField(self.domain, self.values * float(scalar))

    __rmul__ = __mul__

    def integral(self):
        return self.domain.cell_weight * float(np.sum(self.values))

    def l2_norm(self):
        return float(np.sqrt(self.domain.cell_weight * np.sum(self.values**2)))

    def lp_norm(self, p):
        if p == np.inf:
            return float(np.abs(self.values).max())
        w = self.domain.cell_weight
        return float((w * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))

    def to_spectral(self):
        return to_spectral(self)


def synthesize(domain, coeffs, band="mode", on=None):
    """Evaluate a coefficient block on the grid of `on` (default: domain)."""
    target = on if on is not None else domain
    if target.lengths != domain.lengths:
        raise DomainError("synthesis target must share the domain geometry")
    if domain.dim == 1:
        return target.sine_table(0, band)[:, : coeffs.shape[0]] @ coeffs
    Sx = target.sine_table(0, band)[:, : coeffs.shape[0]]
    Sy = target.sine_table(1, band)[:, : coeffs.shape[1]]
    return Sx @ coeffs @ Sy.T


def analyze(grid, band="mode"):
    """Quadrature coefficients <g, w_j> over the requested band."""
    domain = grid.domain
    w = domain.cell_weight
    if domain.dim == 1:
        return w * (domain.sine_table(0, band).T @ grid.values)
    Sx = domain.sine_table(0, band)
    Sy = domain.sine_table(1, band)
    return w * (Sx.T @ grid.values @ Sy)


def to_grid(f, on=None):
    target = on if on is not None else f.domain
    return GridField(target, synthesize(f.domain, f.coeffs, on=target))


def to_spectral(g):
    return SpectralField(g.domain, analyze(g))


def eigenfunction_grid(domain, j):
    """L2-normalized eigenfunction w_j sampled on the grid."""
    j = _check_index(domain, j)
    c = np.zeros(domain.coeff_shape)
    c[tuple(v - 1 for v in j)] = 1.0
    return to_grid(SpectralField(domain, c))


def sobolev_norm(f, s):
    """||f||_{s,D} = sqrt(sum lambda_j^s f_j^2)."""
    lam = f.domain.eigenvalue_tensor()
    return float(np.sqrt(np.sum(lam**s * f.coeffs**2)))


def derivative_grid(f, orders, on=None):
    """Partial derivative of a band-limited field, exact on the grid.

    `orders` gives the derivative order (0..3) per axis; odd orders
    synthesize through the cosine table, even through the sine table.
    """
    domain = f.domain
    target = on if on is not None else domain
    if np.isscalar(orders):
        orders = (int(orders),)
    orders = tuple(int(o) for o in orders)
    if len(orders) != domain.dim:
        raise DomainError("one derivative order per axis required")
    c = f.coeffs.copy()
    tabs = []
    for a, o in enumerate(orders):
        if not 0 <= o <= 3:
            raise DomainError("derivative orders up to 3 supported")
        k = np.sqrt(domain.axis_eigenvalues(a)) ** o
        sign = -1.0 if o >= 2 else 1.0
        fac = sign * k
        c = c * (fac if domain.dim == 1 else (fac[:, None] if a == 0 else fac[None, :]))
        tab = target.cosine_table(a) if o % 2 else target.sine_table(a)
        tabs.append(tab)
    if domain.dim == 1:
        return GridField(target, tabs[0] @ c)
    return GridField(target, tabs[0] @ c @ tabs[1].T)


def gradient_grid(f, on=None):
    """Tuple of partial-derivative grids of a band-limited field."""
    domain = f.domain
    if domain.dim == 1:
        return (derivative_grid(f, (1,), on=on),)
    return (
        derivative_grid(f, (1, 0), on=on),
        derivative_grid(f, (0, 1), on=on),
    )


def eigenfunction_at(domain, points, band="mode"):
    """Mode table at arbitrary points; shape (npoints, modes per axis...)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        # a batch of 1-d points, or a single d-dim point
        pts = pts.reshape(-1, 1) if domain.dim == 1 else pts.reshape(1, -1)
    if pts.shape[1] != domain.dim:
        raise DomainError(f"points must have {domain.dim} coordinates")
    m = domain.mode_cutoff if band == "mode" else domain.grid_n
    per_axis = []
    for a in range(domain.dim):
        L = domain.lengths[a]
        j = np.arange(1, m + 1)
        per_axis.append(np.sqrt(2.0 / L) * np.sin(np.outer(pts[:, a], j) * np.pi / L))
    return per_axis


def distance_to_boundary(domain, x):
    """dist(x, boundary); raises if x is outside the closed domain."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (domain.dim,):
        raise DomainError(f"point must have {domain.dim} coordinates")
    for v, L in zip(x, domain.lengths):
        if v < 0 or v > L:
            raise DomainError(f"point {tuple(x)} outside domain")
    return float(min(min(v, L - v) for v, L in zip(x, domain.lengths)))


def ground_state_bounds_probe(domain):
    """Grid-scale estimates of c0, C0 in c0*d(x) <= w_1(x) <= C0*d(x)."""
    w1 = eigenfunction_grid(domain, (1,) * domain.dim).values
    d = domain.distance_grid()
    ratio = w1 / d
    return {"c0_hat": float(ratio.min()), "C0_hat": float(ratio.max())}
