"""Numerical laboratory for soliton energy functionals on reduced Fano backends."""

from .collocation import ChebGrid, gauss_legendre_01
from .errors import (
    ConfigInvalid,
    DegreeOutOfRange,
    FlowLeftCone,
    GridMismatch,
    InsufficientPathResolution,
    NewtonDiverged,
    NoBracket,
    NormalizationFailed,
    PathLeavesCone,
    PositivityLost,
    SingularLinearization,
    SolitonLabError,
    StepUnderflow,
    UnsupportedBackend,
)
from .geometry import (
    BACKEND_IDS,
    Background,
    HoloField,
    MetricState,
    RadialFunction,
    make_background,
)
from .functionals import (
    FunctionalReport,
    PathSpec,
    bent_path,
    c_constant,
    cone_membership,
    e0_tilde,
    e_k,
    f_tilde,
    functional_report,
    g_k,
    i_energy,
    i_tilde,
    j_tilde,
    linear_path,
    properness_scatter,
    random_admissible,
    reparam_path,
)
from .algebra import CoeffTable, p_expansion_coeffs, wedge_binomial_identity
from .solver import (
    ContinuityPoint,
    FamilyPoint,
    FamilyResult,
    continuity_path,
    family_path,
    identity_path_points,
    infimum_report,
    path_functional_identities,
    richardson,
    solve_at_t,
    terminal_ladder,
)
from .invariants import (
    FlowRecord,
    find_soliton_field,
    flow_derivative_check,
    flow_potential,
    invariant_at_kappa,
    soliton_kappa_by_shooting,
    tz_invariant,
)

__version__ = "0.1.0"
