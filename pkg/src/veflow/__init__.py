"""Pseudo-spectral toolkit for 3D compressible viscoelastic perturbations.

Solves the nonlinear perturbation system around the constant equilibrium
(rho, u, F) = (1, 0, I) on a periodic box, applies the exact per-frequency
linear propagator of its two Hodge blocks, and reproduces the optimal
whole-space decay rates of the linear flow by radial quadrature.
"""

__version__ = "0.1.0"

from .errors import (
    FieldError,
    GridMismatchError,
    InitialDataError,
    ParameterError,
    QuadratureError,
    VacuumError,
    VeflowError,
)
from .fields import FREQUENCY, PHYSICAL, ScalarField, TensorField, VectorField, transform
from .grid import Grid
from .operators import (
    apply_multiplier,
    curl_matrix,
    dealias,
    div,
    div_tensor,
    grad,
    grad_vector,
    hodge_decompose,
    hodge_reconstruct,
    inner_product,
    l2_norm,
    lam,
    laplacian,
    lp_norm,
    project_mean_zero,
    sobolev_norm,
)
from .params import ModelParams, make_params, pressure_coefficient
from .state import FlowState, PhysState, pert_to_phys, phys_to_pert
from .semigroup import (
    BlockSystem,
    LinearPropagator,
    Propagator2x2,
    apply_linear_semigroup,
    decay_exponent,
    eigenvalues,
    propagator,
    propagator_integral,
)
from .quadrature import RadialProfile, gaussian_profile, whole_space_norm
from .sources import (
    ConstraintReport,
    SourceTriple,
    constraint_residuals,
    evaluate_sources,
    longitudinal_source,
    shear_source,
)
from .initial import (
    DisplacementSpec,
    FourierMode,
    eta_profile,
    lowerbound_profiles,
    parse_mode_file,
    piola_ic,
    single_mode_spec,
)
from .diagnostics import (
    DecayFit,
    DuhamelReport,
    LedgerReport,
    TimeSeriesRecord,
    decay_fit,
    duhamel_compare,
    energy_ledger,
    h2_distance,
    interpolation_gap,
    lp_norm_state,
    lyapunov_m,
    running_sup_weighted,
    sample_row,
)
from .stepping import StepperConfig, cfl_dt, run, step
from .snapshot import read_field, read_phys, read_state, write_field, write_phys, write_state
