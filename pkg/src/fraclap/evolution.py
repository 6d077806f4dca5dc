"""Galerkin solvers for linear drift-diffusion and critical SQG.

Time stepping is IMEX: the square-root dissipation is diagonal in the
eigenbasis and integrated exactly by e^{-dt sqrt(lambda_j)}, the
transport term by the two-stage Heun rule (second order on frozen u).
The Galerkin projection keeps the square block j_i <= m per axis; the
pointwise transport product is formed on the N >= 2M grid, so its band
projection is aliasing-free and realizes the projected nonlinearity in
one step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calculus import divergence_residual, riesz_transform_perp
from .domain import (
    DomainError,
    GridField,
    SpectralField,
    analyze,
    derivative_grid,
    gradient_grid,
    to_grid,
)
from .extension import commutator_advection

__all__ = [
    "VelocityField",
    "EvolutionConfig",
    "DiagnosticsSeries",
    "CFLError",
    "InstabilityError",
    "make_velocity",
    "advect",
    "step_linear",
    "step_sqg",
    "run",
    "commutator_diagnostic",
]


class CFLError(ValueError):
    """Time step violates the transport CFL bound."""

    def __init__(self, dt, admissible):
        super().__init__(f"dt={dt:g} exceeds admissible CFL step {admissible:g}")
        self.dt = dt
        self.admissible = admissible


class InstabilityError(RuntimeError):
    """Energy grew beyond tolerance; carries the state at abort."""

    def __init__(self, message, state, diagnostics):
        super().__init__(message)
        self.state = state
        self.diagnostics = diagnostics


@dataclass
class VelocityField:
    """Divergence-free, boundary-tangent velocity from a stream function."""

    stream: SpectralField
    ux: np.ndarray = None
    uy: np.ndarray = None

    def __post_init__(self):
        if self.stream.domain.dim != 2:
            raise DomainError("velocity fields need dim 2")
        if self.ux is None:
            self.ux = -derivative_grid(self.stream, (0, 1)).values
            self.uy = derivative_grid(self.stream, (1, 0)).values

    @property
    def domain(self):
        return self.stream.domain

    @property
    def max_speed(self):
        return float(np.sqrt(self.ux**2 + self.uy**2).max())

    def divergence_residual(self):
        d = divergence_residual(self.domain, GridField(self.domain, self.ux),
                                GridField(self.domain, self.uy))
        return float(np.abs(d.values).max())


def make_velocity(stream):
    return VelocityField(stream)


@dataclass
class EvolutionConfig:
    """Galerkin cutoff, step size, and diagnostics cadence for a run."""

    m: int
    dt: float
    t_end: float
    cfl_safety: float = 0.5
    dealias_factor: int = 2
    diag_every: int = 1
    p_list: tuple = (1, 2, 4, np.inf)

    def validate(self, domain):
        if self.dt <= 0:
            raise DomainError("dt must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise DomainError("cfl_safety must lie in (0, 1]")
        if not 1 <= self.m <= domain.mode_cutoff:
            raise DomainError(
                f"Galerkin cutoff m={self.m} outside 1..{domain.mode_cutoff}"
            )


@dataclass
class DiagnosticsSeries:
    """Time series the a priori estimates speak about."""

    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)
    lp_norms: dict = field(default_factory=dict)
    lambda2_sq: list = field(default_factory=list)
    energy_residual: list = field(default_factory=list)
    commutator_ratio: list = field(default_factory=list)

    def as_arrays(self):
        out = {
            "times": np.asarray(self.times),
            "energy": np.asarray(self.energy),
            "dissipation": np.asarray(self.dissipation),
            "lambda2_sq": np.asarray(self.lambda2_sq),
            "energy_residual": np.asarray(self.energy_residual),
        }
        for p, vals in self.lp_norms.items():
            out[f"l{p}"] = np.asarray(vals)
        return out

    def cumulative_dissipation(self):
        """trapezoid of ||theta||^2_{1/2,D} over the recorded times."""
        t = np.asarray(self.times)
        d = np.asarray(self.dissipation)
        return float(np.trapezoid(d, t))

    def residual_sum(self):
        return float(np.sum(np.abs(self.energy_residual)))


def _band_mask(domain, m):
    if m >= domain.mode_cutoff:
        return None
    mask = np.zeros(domain.coeff_shape, dtype=bool)
    mask[(slice(0, m),) * domain.dim] = True
    return mask


def project_band(f, m):
    """P_m: keep the square mode block j_i <= m."""
    mask = _band_mask(f.domain, m)
    if mask is None:
        return f.copy()
    return SpectralField(f.domain, np.where(mask, f.coeffs, 0.0))


def advect(u, theta, m=None):
    """P_m(u . grad theta): grid product then aliasing-free band projection."""
    domain = theta.domain
    if u.domain is not domain and u.domain != domain:
        raise DomainError("velocity and scalar live on different domains")
    gx, gy = gradient_grid(theta)
    prod = u.ux * gx.values + u.uy * gy.values
    out = SpectralField(domain, analyze(GridField(domain, prod)))
    if m is not None:
        out = project_band(out, m)
    return out


def _check_cfl(domain, dt, max_speed, cfl_safety):
    h = min(domain.spacings)
    if max_speed <= 0:
        return
    admissible = cfl_safety * h / max_speed
    if dt > admissible:
        raise CFLError(dt, admissible)


def step_linear(theta, u, dt, m=None, u_next=None, cfl_safety=0.5):
    """One IMEX step of d theta/dt + u.grad theta + Lambda theta = 0.

    Exact integrating factor for Lambda, Heun for transport; `u_next`
    supplies the velocity at t + dt for time-dependent schedules.
    """
    domain = theta.domain
    if dt == 0:
        return theta.copy()
    m_eff = m if m is not None else domain.mode_cutoff
    if u is not None:
        _check_cfl(domain, dt, u.max_speed, cfl_safety)
    E = np.exp(-dt * np.sqrt(domain.eigenvalue_tensor()))
    if u is None:
        return SpectralField(domain, E * theta.coeffs)
    u2 = u_next if u_next is not None else u
    k1 = -advect(u, theta, m_eff).coeffs
    pred = SpectralField(domain, E * (theta.coeffs + dt * k1))
    k2 = -advect(u2, pred, m_eff).coeffs
    return SpectralField(domain, E * theta.coeffs + 0.5 * dt * (E * k1 + k2))


def step_sqg(theta, dt, m=None, cfl_safety=0.5):
    """One IMEX step of SQG: u = R_D^perp theta recomputed per stage."""
    domain = theta.domain
    if domain.dim != 2:
        raise DomainError("SQG needs dim 2")
    if dt == 0:
        return theta.copy()
    m_eff = m if m is not None else domain.mode_cutoff

    def velocity_of(state):
        ux, uy = riesz_transform_perp(state)
        return VelocityField(state, ux=ux.values, uy=uy.values)

    u1 = velocity_of(theta)
    _check_cfl(domain, dt, u1.max_speed, cfl_safety)
    E = np.exp(-dt * np.sqrt(domain.eigenvalue_tensor()))
    k1 = -advect(u1, theta, m_eff).coeffs
    pred = SpectralField(domain, E * (theta.coeffs + dt * k1))
    k2 = -advect(velocity_of(pred), pred, m_eff).coeffs
    return SpectralField(domain, E * theta.coeffs + 0.5 * dt * (E * k1 + k2))


def _lp_norms(theta, p_list):
    g = to_grid(theta)
    return {p: g.lp_norm(p) for p in p_list}


def _energy(theta):
    return 0.5 * float(np.sum(theta.coeffs**2))


def run(config, initial, velocity=None, mode="linear", energy_tol=1e-8,
        track_commutator=False):
    """March to t_end recording the diagnostics of the a priori estimates.

    `velocity` is a VelocityField, a callable t -> VelocityField, or None;
    `mode` selects the linear equation or SQG (which ignores `velocity`).
    Raises InstabilityError if the energy grows beyond tolerance.
    """
    domain = initial.domain
    config.validate(domain)
    if mode not in ("linear", "sqg"):
        raise DomainError(f"unknown mode {mode!r}")
    theta = project_band(initial, config.m)
    n_steps = int(round(config.t_end / config.dt))
    diag = DiagnosticsSeries(lp_norms={p: [] for p in config.p_list})
    lam = domain.eigenvalue_tensor()
    sq = np.sqrt(lam)

    def u_at(t):
        if velocity is None or mode == "sqg":
            return None
        return velocity(t) if callable(velocity) else velocity

    def record(t, theta, residual):
        diag.times.append(t)
        diag.energy.append(_energy(theta))
        diag.dissipation.append(float(np.sum(sq * theta.coeffs**2)))
        diag.lambda2_sq.append(float(np.sum(lam**2 * theta.coeffs**2)))
        diag.energy_residual.append(residual)
        for p, val in _lp_norms(theta, config.p_list).items():
            diag.lp_norms[p].append(val)
        if track_commutator and mode == "linear" and velocity is not None:
            diag.commutator_ratio.append(commutator_diagnostic(u_at(t), theta))

    record(0.0, theta, 0.0)
    t = 0.0
    for n in range(n_steps):
        prev = theta
        if mode == "sqg":
            theta = step_sqg(prev, config.dt, m=config.m, cfl_safety=config.cfl_safety)
        else:
            theta = step_linear(
                prev,
                u_at(t),
                config.dt,
                m=config.m,
                u_next=u_at(t + config.dt),
                cfl_safety=config.cfl_safety,
            )
        t = (n + 1) * config.dt
        e_prev, e_cur = _energy(prev), _energy(theta)
        if e_cur > e_prev * (1.0 + energy_tol) + 1e-300:
            record(t, theta, np.nan)
            raise InstabilityError(
                f"energy grew {e_prev:g} -> {e_cur:g} at t={t:g}", theta, diag
            )
        mid = 0.5 * (prev.coeffs + theta.coeffs)
        residual = e_cur - e_prev + config.dt * float(np.sum(sq * mid**2))
        if (n + 1) % config.diag_every == 0 or n == n_steps - 1:
            record(t, theta, residual)
    return theta, diag


def commutator_diagnostic(u, theta):
    """||[Lambda, u.grad] theta||_{1/2,D} over ||u||_B ||theta||_{3/2,D}.

    Gamma theta = [Lambda, u.grad] theta differs from the advection
    commutator only by sign, so the measured ratio coincides.
    """
    if u is None:
        return 0.0
    return commutator_advection(u.stream, theta)["ratio"]
