"""Pointwise defect fields and empirical constant probes.

The convexity and nonlinear-bound defects are evaluated through the
epsilon-cutoff of the heat representation,

    [Lambda^{2a} g]_eps = c_a int_eps^inf (g - e^{t Delta} g) t^{-1-a} dt,

acting on the full grid band.  With eps at or above the kernel resolution
time the truncated heat kernel is entrywise nonnegative and
e^{t Delta} 1 <= 1 at grid scale, which makes the discrete defect
nonnegative by the same rearrangement that proves the continuum
inequality; no truncation junk can masquerade as a violation.  For s = 2
the operator is local and is applied exactly through the odd periodic
extension of the nonlinearity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .calculus import (
    apply_lambda_s,
    c_alpha,
    epsilon_multipliers,
    heat_kernel,
    heat_one,
    kernel_resolution_time,
)
from .domain import (
    DomainError,
    GridField,
    SpectralField,
    analyze,
    derivative_grid,
    eigenfunction_at,
    synthesize,
    to_grid,
)

__all__ = [
    "DefectReport",
    "BoundFit",
    "smoothstep",
    "cordoba_defect",
    "nonlinear_defect",
    "fd_cutoff",
    "lower_bound_probe",
    "proof_trace_I_J",
    "theta_floor_probe",
    "heat_bound_probe",
    "grad_ratio_probe",
    "halfspace_kernel_suite",
    "probe_time_window",
]


@dataclass
class DefectReport:
    """Summary of a pointwise-inequality check on the grid."""

    min_defect: float
    argmin: tuple
    violation_count: int
    tolerance: float
    details: dict = field(default_factory=dict)

    @classmethod
    def from_grid(cls, defect, tolerance, details=None):
        values = defect.values
        flat = int(np.argmin(values))
        idx = np.unravel_index(flat, values.shape)
        mesh = defect.domain.meshgrid()
        argmin = tuple(float(m[idx]) for m in mesh)
        return cls(
            min_defect=float(values.min()),
            argmin=argmin,
            violation_count=int(np.sum(values < -tolerance)),
            tolerance=float(tolerance),
            details=details or {},
        )

    @property
    def passed(self):
        return self.min_defect >= -self.tolerance


@dataclass
class BoundFit:
    """Empirical constants fitted to a two-sided kernel bound."""

    constants: dict
    sample_description: str
    violations: int = 0

    def __getitem__(self, key):
        return self.constants[key]


def smoothstep(s):
    """Cutoff psi: 0 for s <= 1, 1 for s >= 2, quintic smoothstep between."""
    s = np.asarray(s, dtype=float)
    u = np.clip(s - 1.0, 0.0, 1.0)
    mid = u**3 * (6.0 * u**2 - 15.0 * u + 10.0)
    return np.where(s <= 1.0, 0.0, np.where(s >= 2.0, 1.0, mid))


def probe_time_window(domain, n, band="mode", t_max=None, log_factor=1.0):
    """Log-spaced t samples inside the truncation-valid probe window.

    `log_factor` scales the series-decay floor log(modes)/lambda_max; the
    differentiated series needs a larger factor than the kernel itself.
    """
    lam1 = float(domain.eigenvalue_tensor().min())
    hi = t_max if t_max is not None else 1.0 / lam1
    lam = domain.eigenvalue_tensor(band)
    decay_floor = log_factor * np.log(max(lam.size, 2)) / lam.max()
    lo = max(kernel_resolution_time(domain, band=band), decay_floor)
    if lo >= hi:
        raise DomainError("probe window empty; refine the grid")
    return np.geomspace(lo, hi, n)


def _lambda_s_eps_grid(domain, grid_values, s, eps):
    """[Lambda^s g]_eps on the grid, full grid band."""
    lam = domain.eigenvalue_tensor(band="grid")
    rho = epsilon_multipliers(lam, s / 2.0, eps)
    coeffs = analyze(GridField(domain, grid_values), band="grid")
    return synthesize(domain, rho * coeffs, band="grid")


def _laplacian_exact_grid(domain, fn, f, oversample=4):
    """-Delta of fn(f) at the grid nodes via the odd periodic extension.

    fn composed with the (analytic) odd extension of a band-limited f is
    smooth and periodic, so the full trigonometric series converges
    spectrally and the local Laplacian is exact at interior nodes.
    """
    P = []
    for a in range(domain.dim):
        P.append(2 * (domain.grid_n + 1) * oversample)
    js = [np.arange(1, domain.mode_cutoff + 1) for _ in range(domain.dim)]
    if domain.dim == 1:
        L = domain.lengths[0]
        xc = np.arange(P[0]) * (2.0 * L / P[0])
        tab = np.sqrt(2.0 / L) * np.sin(np.outer(xc, js[0]) * np.pi / L)
        g = fn(tab @ f.coeffs)
        m = np.arange(P[0] // 2 + 1)
        mu = (m * np.pi / L) ** 2
        lap = np.fft.irfft(-mu * np.fft.rfft(g), n=P[0])
        take = np.arange(1, domain.grid_n + 1) * oversample
        return -lap[take]
    Lx, Ly = domain.lengths
    xc = np.arange(P[0]) * (2.0 * Lx / P[0])
    yc = np.arange(P[1]) * (2.0 * Ly / P[1])
    tx = np.sqrt(2.0 / Lx) * np.sin(np.outer(xc, js[0]) * np.pi / Lx)
    ty = np.sqrt(2.0 / Ly) * np.sin(np.outer(yc, js[1]) * np.pi / Ly)
    g = fn(tx @ f.coeffs @ ty.T)
    gh = np.fft.rfft2(g)
    mx = np.fft.fftfreq(P[0], d=1.0 / P[0])
    my = np.arange(P[1] // 2 + 1)
    mu = (mx[:, None] * np.pi / Lx) ** 2 + (my[None, :] * np.pi / Ly) ** 2
    lap = np.fft.irfft2(-mu * gh, s=P)
    take = np.arange(1, domain.grid_n + 1) * oversample
    return -lap[np.ix_(take, take)]


def cordoba_defect(f, phi, phi_prime, s, epsilon=None):
    """Defect Phi'(f) Lambda^s f - Lambda^s(Phi(f)) on the grid, s in [0,2].

    For 0 < s < 2 both terms carry the epsilon-cutoff of the heat
    representation (default epsilon: the kernel resolution time); s = 2
    uses the exact local Laplacian, s = 0 reduces to f Phi'(f) - Phi(f).
    """
    if not 0.0 <= s <= 2.0:
        raise ValueError(f"cordoba defect defined for s in [0,2], got {s}")
    domain = f.domain
    fg = synthesize(domain, f.coeffs)
    if s == 0.0:
        return GridField(domain, phi_prime(fg) * fg - phi(fg))
    if s == 2.0:
        lam = domain.eigenvalue_tensor()
        lsf = synthesize(domain, lam * f.coeffs)
        return GridField(domain, phi_prime(fg) * lsf - _laplacian_exact_grid(domain, phi, f))
    eps = epsilon if epsilon is not None else kernel_resolution_time(domain, band="grid")
    lam = domain.eigenvalue_tensor()
    rho_f = epsilon_multipliers(lam, s / 2.0, eps)
    lsf = synthesize(domain, rho_f * f.coeffs)
    ls_phi = _lambda_s_eps_grid(domain, phi(fg), s, eps)
    return GridField(domain, phi_prime(fg) * lsf - ls_phi)


def nonlinear_defect(f, alpha, epsilon=None):
    """f Lambda^{2a} f - (1/2) Lambda^{2a} f^2 on the grid, 0 < alpha < 1."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    return cordoba_defect(f, lambda r: 0.5 * r * r, lambda r: r, 2.0 * alpha, epsilon)


def fd_cutoff(f, q_inf, C):
    """Distance-cutoff field |f_d|: f where it clears the threshold, else 0."""
    if q_inf <= 0 or C <= 0:
        raise ValueError("q_inf and C must be positive")
    domain = f.domain
    d = domain.distance_grid()
    threshold = C * q_inf * np.maximum(1.0 / domain.diameter, 1.0 / d)
    keep = np.abs(f.values) >= threshold
    return GridField(domain, np.where(keep, f.values, 0.0))


def lower_bound_probe(q, axis, alpha, C_grid=(0.5, 1.0, 2.0, 4.0), epsilon=None):
    """Empirical constants in the nonlinear lower bound for f = dq/dx_axis.

    For each threshold constant C: c_hat = min over the support of f_d of
    defect / (q_inf^{-2a} |f_d|^{2+2a}).  Empty support is reported, not
    an error.
    """
    domain = q.domain
    q_grid = to_grid(q)
    q_inf = float(np.abs(q_grid.values).max())
    orders = tuple(1 if a == axis else 0 for a in range(domain.dim))
    dq = derivative_grid(q, orders)
    f = SpectralField(domain, analyze(dq))  # sine-band projection, exact
    fg = to_grid(f)
    defect = nonlinear_defect(f, alpha, epsilon)
    results = {}
    for C in C_grid:
        cut = fd_cutoff(fg, q_inf, C)
        mask = cut.values != 0.0
        if not mask.any():
            results[C] = {"c_hat": None, "support": 0}
            continue
        ratios = defect.values[mask] / (
            q_inf ** (-2.0 * alpha) * np.abs(cut.values[mask]) ** (2.0 + 2.0 * alpha)
        )
        k = int(np.argmin(ratios))
        results[C] = {
            "c_hat": float(ratios.min()),
            "support": int(mask.sum()),
            "worst_defect": float(defect.values[mask].flat[k]),
        }
    return {
        "per_C": results,
        "q_inf": q_inf,
        "min_defect": float(defect.values.min()),
        "defect": defect,
        "f": f,
    }


def proof_trace_I_J(domain, x, q_inf, alpha, tau, f_value=None, T=None, nodes=400):
    """Quadrature values of I(x) and the J-bound surrogate at one tau.

    I(x) = c_a int_0^T psi(t/tau) t^{-1-a} theta(x,t) dt with theta the
    heat evolution of 1; the J surrogate is q_inf int psi(t/tau)
    t^{-3/2-a} dt.  tau_ok flags the admissibility tau <= min(T, d^2)/2.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if T is None:
        T = 1.0 / float(domain.eigenvalue_tensor().min())
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = min(min(v, L - v) for v, L in zip(x, domain.lengths))
    c_a = c_alpha(alpha)
    t = np.geomspace(tau, T, nodes)
    # theta(x, t) from the full grid band (the constant is grid-exact there)
    ones_c = analyze(GridField(domain, np.ones(domain.grid_shape)), band="grid")
    lam = domain.eigenvalue_tensor(band="grid")
    tabs = eigenfunction_at(domain, x, band="grid")
    if domain.dim == 1:
        mode_at_x = tabs[0][0] * ones_c
        theta = np.exp(-np.outer(t, lam)) @ mode_at_x
    else:
        mode_at_x = (tabs[0][0][:, None] * tabs[1][0][None, :]) * ones_c
        theta = np.exp(-t[:, None, None] * lam[None, :, :]).reshape(nodes, -1) @ mode_at_x.ravel()
    w = smoothstep(t / tau)
    I = c_a * integrate.trapezoid(w * t ** (-1.0 - alpha) * theta, t)
    J = q_inf * integrate.trapezoid(w * t ** (-1.5 - alpha), t)
    out = {
        "I": float(I),
        "J": float(J),
        "tau_ok": bool(tau <= 0.5 * min(T, d * d)),
    }
    if f_value is not None and f_value != 0:
        out["tau_choice_scale"] = float(q_inf**2 / f_value**2)
    return out


def theta_floor_probe(domain, t_samples=None, theta_tol=1e-9):
    """Fit c1 in theta(x,t) >= c1 min(1, (d(x)/sqrt t)^d); check 0<=theta<=1."""
    if t_samples is None:
        t_samples = probe_time_window(domain, 20, band="grid")
    d = domain.distance_grid()
    dim = domain.dim
    c1 = np.inf
    lo, hi = np.inf, -np.inf
    violations = 0
    for t in t_samples:
        theta = heat_one(domain, float(t)).values
        lo = min(lo, float(theta.min()))
        hi = max(hi, float(theta.max()))
        if theta.min() < -theta_tol or theta.max() > 1.0 + theta_tol:
            violations += 1
        floor = np.minimum(1.0, (d / np.sqrt(t)) ** dim)
        c1 = min(c1, float((theta / floor).min()))
    return BoundFit(
        constants={"c1_hat": c1, "theta_min": lo, "theta_max": hi},
        sample_description=f"{len(t_samples)} times in [{t_samples[0]:.3g}, {t_samples[-1]:.3g}]",
        violations=violations,
    )


def _pair_arrays(domain, pair_samples):
    pairs = np.asarray(pair_samples, dtype=float)
    if pairs.ndim == 2 and domain.dim == 1:
        xs, ys = pairs[:, 0:1], pairs[:, 1:2]
    else:
        xs, ys = pairs[:, 0, :], pairs[:, 1, :]
    return xs, ys


def default_pair_samples(domain, stride=7):
    """Deterministic (x, y) pairs from strided grid nodes."""
    mesh = domain.meshgrid()
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    sub = pts[::stride]
    n = len(sub)
    ii, kk = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = ii.ravel() <= kk.ravel()
    return np.stack([sub[ii.ravel()[keep]], sub[kk.ravel()[keep]]], axis=1)


def heat_bound_probe(domain, t_samples=None, pair_samples=None):
    """Fit (c,k) and (C,K) in the two-sided kernel bound on sample pairs.

    The Gaussian rate is fitted by least squares on log H against
    -|x-y|^2/t; the prefactors are then the extreme ratios against the
    fitted shape.  Reported, not asserted: rectangle corners are outside
    the smooth-domain hypothesis.
    """
    if t_samples is None:
        t_samples = probe_time_window(domain, 8)
    if pair_samples is None:
        pair_samples = default_pair_samples(domain)
    xs, ys = _pair_arrays(domain, pair_samples)

    def w1(pts):
        tabs = eigenfunction_at(domain, pts)
        return np.prod(np.stack([tab[:, 0] for tab in tabs], axis=0), axis=0)

    Hs, shapes, us = [], [], []
    for t in t_samples:
        H = heat_kernel(domain, float(t), xs, ys)
        r = np.linalg.norm(xs - ys, axis=1)
        mx = np.where(r > 0, np.minimum(w1(xs) / np.where(r > 0, r, 1.0), 1.0), 1.0)
        my = np.where(r > 0, np.minimum(w1(ys) / np.where(r > 0, r, 1.0), 1.0), 1.0)
        base = mx * my * t ** (-domain.dim / 2.0)
        keep = (H > 0) & (base > 0)
        Hs.append(H[keep])
        shapes.append(base[keep])
        us.append((r[keep] ** 2) / t)
    H = np.concatenate(Hs)
    base = np.concatenate(shapes)
    u = np.concatenate(us)
    y = np.log(H / base)
    # slope of y vs -u estimates 1/k for the shared Gaussian rate
    denom = float(np.sum(u * u))
    slope = -float(np.sum(u * y)) / denom if denom > 0 else 0.0
    k_hat = 1.0 / max(slope, 1e-12)
    ratio = H / (base * np.exp(-u / k_hat))
    return BoundFit(
        constants={
            "c_hat": float(ratio.min()),
            "C_hat": float(ratio.max()),
            "k_hat": float(k_hat),
            "K_hat": float(k_hat),
        },
        sample_description=(
            f"{len(t_samples)} times x {len(xs)} pairs on the strided grid"
        ),
        violations=int(np.sum(H <= 0)),
    )


def grad_ratio_probe(domain, t_samples=None, pair_samples=None, trunc_tol=0.01):
    """Fit C in the two-branch bound for |grad_y H| / H.

    Branches split at sqrt(t) vs d(y).  Raises when the analytic estimate
    of the truncated-series error exceeds trunc_tol of the computed
    kernel scale.
    """
    if t_samples is None:
        t_samples = probe_time_window(domain, 8, log_factor=6.0)
    if pair_samples is None:
        pair_samples = default_pair_samples(domain)
    xs, ys = _pair_arrays(domain, pair_samples)
    interior, boundary = [], []
    M = domain.mode_cutoff
    for t in t_samples:
        # truncation guard: tail of sum e^{-t lam_j} |w_j'| |w_j| per axis
        lamM = min(domain.axis_eigenvalues(a)[-1] for a in range(domain.dim))
        tail = np.exp(-t * lamM) / (np.pi * t)
        H = heat_kernel(domain, float(t), xs, ys)
        scale = np.abs(H).max()
        if tail > trunc_tol * scale:
            raise ValueError(
                f"t={t:g} too small for the truncated series "
                f"(tail estimate {tail:.2e} vs scale {scale:.2e})"
            )
        wx = eigenfunction_at(domain, xs)
        wy = eigenfunction_at(domain, ys)
        grads = []
        if domain.dim == 1:
            lam = domain.axis_eigenvalues(0)
            L = domain.lengths[0]
            j = np.arange(1, M + 1)
            cy = np.sqrt(2.0 / L) * np.cos(np.outer(ys[:, 0], j) * np.pi / L)
            dwy = cy * (j * np.pi / L)
            g = np.einsum("pj,pj->p", wx[0] * np.exp(-t * lam), dwy)
            grads.append(g)
        else:
            ex = np.exp(-t * domain.axis_eigenvalues(0))
            ey = np.exp(-t * domain.axis_eigenvalues(1))
            for a in range(2):
                L = domain.lengths[a]
                j = np.arange(1, M + 1)
                c = np.sqrt(2.0 / L) * np.cos(np.outer(ys[:, a], j) * np.pi / L)
                dw = c * (j * np.pi / L)
                f0 = dw if a == 0 else wy[0]
                f1 = dw if a == 1 else wy[1]
                grads.append(
                    np.einsum("pj,pk,pj,pk->p", wx[0] * ex, wx[1] * ey, f0, f1)
                )
        gnorm = np.sqrt(sum(g**2 for g in grads))
        dy = np.array([min(min(v, L - v) for v, L in zip(y, domain.lengths)) for y in ys])
        r = np.linalg.norm(xs - ys, axis=1)
        pos = H > 1e-300 * scale
        ratio = np.where(pos, gnorm / np.where(pos, H, 1.0), 0.0)
        st = np.sqrt(t)
        near = (dy <= st) & pos
        far = (dy > st) & pos
        if near.any():
            boundary.append(float((ratio[near] * dy[near]).max()))
        if far.any():
            bound = (1.0 + r[far] / st) / st
            interior.append(float((ratio[far] / bound).max()))
    return BoundFit(
        constants={
            "C_interior": max(interior) if interior else 0.0,
            "C_boundary": max(boundary) if boundary else 0.0,
        },
        sample_description=f"{len(t_samples)} times, branch split at sqrt(t) vs d(y)",
    )


def halfspace_kernel_suite(xd_samples=(0.5, 1.0, 2.0, 4.0), t_samples=(0.25, 1.0, 4.0)):
    """Closed-form identities for the half-space commutator kernel.

    Verifies by quadrature, in the normal coordinate:
      inner(t, x) = int_0^inf ((x+y)/t) e^{-(x+y)^2/(4t)} dy = 2 e^{-x^2/(4t)}
      outer(x)    = int_0^inf t^{-2} e^{-x^2/(4t)} dt = 4 / x^2
    and that int K dy = 2 * outer(x) = 8 / x^2, i.e. x^2 * int K dy.
    is the constant 8.
    """
    errs = {}
    worst = 0.0
    for x in xd_samples:
        for t in t_samples:
            inner = integrate.quad(
                lambda y: ((x + y) / t) * np.exp(-((x + y) ** 2) / (4.0 * t)),
                0.0,
                np.inf,
                limit=200,
            )[0]
            exact = 2.0 * np.exp(-(x**2) / (4.0 * t))
            errs[f"inner_x{x}_t{t}"] = abs(inner - exact)
            worst = max(worst, abs(inner - exact))
        outer = integrate.quad(
            lambda t: t ** (-2.0) * np.exp(-(x**2) / (4.0 * t)), 0.0, np.inf, limit=400
        )[0]
        errs[f"outer_x{x}"] = abs(outer - 4.0 / x**2)
        worst = max(worst, abs(outer - 4.0 / x**2))
        # int K dy = int_0^inf t^{-3/2} [inner(t,x)/sqrt(t)] dt = 2*outer
        kmass = integrate.quad(
            lambda t: t ** (-1.5) * (2.0 * np.exp(-(x**2) / (4.0 * t))) / np.sqrt(t),
            0.0,
            np.inf,
            limit=400,
        )[0]
        errs[f"kmass_scaled_x{x}"] = abs(x**2 * kmass - 8.0)
        worst = max(worst, abs(x**2 * kmass - 8.0))
    return DefectReport(
        min_defect=-worst,
        argmin=(float(xd_samples[0]),),
        violation_count=int(sum(e > 1e-9 for e in errs.values())),
        tolerance=1e-9,
        details=errs,
    )
