"""Generalized power series solutions of Volterra integral equations.

Regular, Abel-singular and log-singular kernels of the second kind, and
analytic linear kernels of the first kind, are solved by coefficient
recursions. Majorant bounds certify radii of convergence for linear
problems, and a product-integration oracle checks the results numerically.
"""

from .abel import (
    FoldResult,
    FoldTruncationWarning,
    beta_fn,
    abel_closed_form,
    fold_table,
    formal_abel_coefficients,
    mittag_leffler_problem,
    solve_abel_linear_irrational,
    solve_abel_linear_rational_direct,
    solve_abel_linear_rational_fold,
    solve_abel_nonlinear,
)
from .convergence import (
    AbelEnvelope,
    GeometricEnvelope,
    GroupedCheck,
    MajorantData,
    abel_grouped_check,
    abel_grouped_norms,
    fit_abel_envelope,
    fit_envelope,
    majorant_c,
    majorant_l,
    majorants,
    matrix_norm,
    radius_bound_abel,
    radius_bound_regular,
    vector_norm,
)
from .errors import (
    DomainError,
    InconsistencyError,
    InvalidArgumentError,
    ProblemFormatError,
    StepFailureError,
    StructureError,
    UnsupportedError,
    VolterraError,
)
from .firstkind import FirstKindSolution, FoldedKernel, fold_kernel, solve_first_kind
from .kernels import (
    AbelKernelExpansion,
    LinearKernelExpansion,
    LogKernelExpansion,
    LogVariant,
    NonlinearKernelExpansion,
    exp_kernel,
    scalar_linear,
)
from .logarithmic import (
    LogSolution,
    MomentTable,
    moment_l,
    moment_m,
    moment_m0_closed,
    moment_m_series,
    solve_log_system,
)
from .problem import Problem, Solution, load_problem, parse_problem, solve_problem
from .quadrature import Grid, integral_moment_numeric, residual_check, solve_second_kind_numeric
from .regular import (
    derivative_method_linear,
    derivatives_at_zero,
    solve_linear_second_kind,
    solve_nonlinear_second_kind,
)
from .series import (
    AbelTable,
    AlphaExponent,
    LogTable,
    RadiusEstimate,
    TaylorTable,
    estimate_radius,
    evaluate,
    z_coeff,
    z_coeff_bi,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
