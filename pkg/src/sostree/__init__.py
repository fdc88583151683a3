"""Gibbs measures of the three-state SOS model on Cayley trees.

Solvers for the boundary-field fixed-point equations, closed-form critical
values, regime classification and an exact finite-tree enumeration oracle.
"""

__version__ = "0.1.0"

from .classifier import Family, Regime, RegimeReport, check_th1_condition, classify_point, count_N
from .criticals import (
    CriticalSet,
    PrefactorConvention,
    c_star_bounds,
    critical_set,
    discriminant,
    discriminant_factored,
    eta_values,
    quadratic_roots,
    theta_critical,
    zeta_of,
)
from .errors import (
    BudgetError,
    ContractError,
    DegenerateError,
    DomainError,
    RegimeError,
    ScanWindowError,
    SOSError,
)
from .model import (
    BranchPattern,
    FieldVector,
    ModelParams,
    ReducedField,
    inflection_point,
    kernel_bounds,
    kernel_f,
    kernel_f_derivative,
    kernel_f_second,
    map_F,
    operator_W,
    reduced_rhs,
)
from .solvers import (
    RootFindConfig,
    SolutionReport,
    bracketed_roots,
    scan_roots,
    system_residual,
    g_derivative,
    g_of,
    phi_of,
    psi_derivative,
    psi_of,
    solve_b_nonzero,
    solve_b_zero,
    solve_nonTI_23,
    solve_periodic,
    solve_reduced_system,
    solve_ti,
)
from .tree import (
    Label,
    assign_fields,
    build_tree,
    check_compatibility,
    exact_mu_n,
    hamiltonian,
    root_marginal,
)

__all__ = [
    "BranchPattern",
    "BudgetError",
    "ContractError",
    "CriticalSet",
    "DegenerateError",
    "DomainError",
    "Family",
    "FieldVector",
    "Label",
    "ModelParams",
    "PrefactorConvention",
    "ReducedField",
    "Regime",
    "RegimeError",
    "RegimeReport",
    "RootFindConfig",
    "SOSError",
    "ScanWindowError",
    "SolutionReport",
    "assign_fields",
    "bracketed_roots",
    "build_tree",
    "c_star_bounds",
    "check_compatibility",
    "check_th1_condition",
    "classify_point",
    "count_N",
    "critical_set",
    "discriminant",
    "discriminant_factored",
    "eta_values",
    "exact_mu_n",
    "g_derivative",
    "g_of",
    "hamiltonian",
    "inflection_point",
    "kernel_bounds",
    "kernel_f",
    "kernel_f_derivative",
    "kernel_f_second",
    "map_F",
    "operator_W",
    "phi_of",
    "psi_derivative",
    "psi_of",
    "quadratic_roots",
    "reduced_rhs",
    "root_marginal",
    "scan_roots",
    "solve_b_nonzero",
    "solve_b_zero",
    "solve_nonTI_23",
    "solve_periodic",
    "solve_reduced_system",
    "solve_ti",
    "system_residual",
    "theta_critical",
    "zeta_of",
]
