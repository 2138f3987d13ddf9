"""Numerical lab for the n-Laplacian mean field equation and the Moser-Onofri inequality on the ball."""

from .capacity import AnnulusSpec, annulus_capacity, capacity_potential, modulus_shift_check, n_modulus
from .constants import (
    DimensionConstants,
    SharpConstant,
    bubble_mass,
    bubble_value,
    bundle,
    sharp_constant,
    sharp_constant_closed_form,
    sphere_measure,
)
from .errors import (
    BlowUpError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    OnofriLabError,
    UnsupportedError,
)
from .functional import BubbleSpec, concentration_limit, onofri_energy, test_function
from .harmonic_radius import (
    DomainSpec,
    RobinData,
    concentration_level,
    existence_criterion,
    harmonic_radius_disk,
    robin_ball_center,
    transplant_check,
)
from .minimizer import MinimizeOptions, MinimizeResult, minimize_subcritical, trace_blowup
from .profile import RadialProfile
from .radial_ode import (
    BranchPoint,
    SolutionBranch,
    branch_point,
    farfield_slope,
    pohozaev_residual,
    rescale_to_bubble,
    scan_branch,
    shoot,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
