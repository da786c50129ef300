"""Rotational constant mean curvature hypersurfaces in the round sphere S^n.

Profile functions and admissible domains, period widths, generating curves
assembled by reflection, closure and embedding solves, and an independent
finite-difference mean curvature check.
"""

from .curves import (
    AssemblyRecord,
    ClosureResult,
    EmbeddingResult,
    GeneratingCurve,
    Mesh,
    assemble_global,
    closure_test,
    embedding_test,
    export_curve,
    integrate_phase,
    join_curvature_jumps,
    join_tangent_mismatch,
    load_curve_samples,
    mesh,
    static_torus_curve,
    stereographic,
)
from .exceptions import (
    DelaunayError,
    DomainError,
    NoAdmissibleInterval,
    NonConvergent,
    NotClosed,
    OutOfBand,
    PoleCollision,
    StencilTooWide,
    TargetOutOfRange,
    UnsupportedFormat,
    UnsupportedType,
)
from .oracle import CurvatureReport, cmc_residual, mean_curvature_fd, shape_diagonal
from .profile import (
    CmcParams,
    CriticalConstants,
    DelaunayTag,
    DelaunayType,
    EndpointKind,
    ProfileInterval,
    classify,
    contact_constant,
    critical_constants,
    denom_D,
    envelope_L,
    equilibrium_latitude,
    equilibrium_ratio,
    profile_interval,
    rhs_R,
    s1_rate,
    theta,
)
from .solver import (
    EmbeddedSolution,
    count_embedded,
    embedded_h_range,
    find_embedded,
    flower_closure,
    solve_flower_beta,
    solve_width,
    z_interval,
)
from .width import (
    AdjustedWidth,
    WidthResult,
    adjusted_width,
    flower_rate,
    flower_width,
    width,
    width_limit_at_contact,
    width_limit_at_zero,
)

__version__ = "0.1.0"
