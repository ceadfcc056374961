"""Numerics for the logarithmic Laplacian on coercive epigraph domains."""
from .errors import ConfigError, ContractError, ConvergenceError, DivergenceError, PreconditionError
from .special import Constants, EULER_GAMMA, constants_for, digamma, gamma_fn, unit_sphere_area
from .geometry import Epigraph, RegionLabel, classify, classify_points, kernel_distance_pair, phi_eval, reflect
from .grid import GridFunction, UniformGrid, gaussian, read_gridfunction, write_gridfunction
from .operator import (
    KernelPlan,
    apply_log_laplacian,
    apply_principal_part,
    build_plan,
    evaluate_at,
    fourier_oracle,
    operator_matrix,
    self_cell_moment,
    slab_bound_constant,
    slab_kernel_mass,
    slab_lower_bound,
)
from .problems import (
    AssumptionReport,
    CoefficientA,
    NonlinearityF,
    ProblemSpec,
    check_assumptions,
    lipschitz_quotient,
    manufactured_monotone,
    ramp,
)
from .solver import (
    EigenPair,
    ProbeReport,
    SolveConfig,
    SolveReport,
    ball_grid,
    eigen_smallest,
    probe_nonexistence,
    residual,
    solve_dirichlet,
)
from .harness import (
    DiagnosticsReport,
    SweepReport,
    antisym_mp_check,
    ball_mp_check,
    boundary_quotient,
    comparison_construct,
    compatible_lambdas,
    kernel_gap,
    region_labels,
    reflect_function,
    set_difference_volume,
    sweep_monotonicity,
    w_lambda,
)
from .config import RunConfig, parse_config

__version__ = "0.1.0"
