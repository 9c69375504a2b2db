"""Spectral solver, continuation and certificate checks for periodic
fractional equations of Ambrosetti-Prodi and singular type."""
from .certificates import (
    CertificateReport,
    ar_constants,
    certify,
    coercive_radius,
    lim_condition_probe,
    singular_constants,
    sup_bound_M,
    t_star_smooth,
    theta_smooth,
    verify_bounds,
    verify_identities,
)
from .config import ExperimentConfig, parse_config
from .continuation import (
    Branch,
    HomotopyState,
    continue_arclength,
    continue_natural,
    locate_fold,
    mawhin_homotopy,
    scalar_equilibrium,
)
from .errors import *  # noqa: F401,F403
from .export import export_branch, import_branch, write_report
from .fractional import (
    apply_derivative,
    apply_fractional,
    apply_linear,
    build_pv_kernel,
    c1s_constant,
    pv_apply,
    resolvent_solve,
)
from .nonlinear import (
    AttractiveRepulsive,
    ProblemSpec,
    SingularMems,
    Smooth,
    Solution,
    SubSuperPair,
    check_sub_super,
    deflated_search,
    jacobian,
    make_pair,
    newton_solve,
    random_seeds,
    residual,
    truncated_fixed_point,
)
from .spectral import PeriodicGrid, SpectralField, hs_seminorm, inner, make_grid, mean, norms, sample

__version__ = "0.1.0"
