"""Spectral calculus, inequality probes, and Galerkin solvers for the
fractional Dirichlet Laplacian on intervals and rectangles."""

from .calculus import (
    FracOrder,
    HeatQuadratureSpec,
    apply_lambda_s,
    c_alpha,
    frac_heat_quadrature,
    heat_apply,
    heat_kernel,
    heat_one,
    riesz_transform,
    riesz_transform_perp,
)
from .domain import (
    DomainSpec,
    GridField,
    SpectralField,
    distance_to_boundary,
    eigenfunction_grid,
    eigenvalue,
    ground_state_bounds_probe,
    sobolev_norm,
    to_grid,
    to_spectral,
)
from .evolution import (
    CFLError,
    DiagnosticsSeries,
    EvolutionConfig,
    InstabilityError,
    VelocityField,
    advect,
    commutator_diagnostic,
    make_velocity,
    run,
    step_linear,
    step_sqg,
)
from .extension import (
    BNorm,
    CylinderField,
    b_norm,
    commutator_advection,
    commutator_mult,
    dtn_check,
    extension_decay_norm,
    harmonic_extend,
    v0_equivalence_probe,
    v0_norm,
)
from .inequalities import (
    BoundFit,
    DefectReport,
    cordoba_defect,
    fd_cutoff,
    grad_ratio_probe,
    halfspace_kernel_suite,
    heat_bound_probe,
    lower_bound_probe,
    nonlinear_defect,
    proof_trace_I_J,
    theta_floor_probe,
)
from .manifest import RunManifest, parse_manifest, write_manifest
from .randfields import random_field, random_stream

__version__ = "0.1.0"
