"""Multiple Hecke L-functions and iterated period integrals of cusp forms.

Numerical evaluation of iterated Eichler/period integrals attached to a
tuple of cusp forms, the multiple L-series they encode, and the identity
families relating the two, with honest error accounting throughout.
"""

from .numerics import (
    AccuracyError,
    DomainError,
    EvalResult,
    PoleError,
    branch_log,
    branch_pow,
    gamma_complex,
    gamma_factor,
    upper_incomplete_gamma,
)
from .forms import (
    DirichletCharacter,
    FourierSeries,
    QExpansion,
    RegionError,
    ValidationError,
    builtin_form,
    builtin_names,
    evaluate_form,
    evaluate_form_batch,
    legendre_character,
    load_coefficients,
    packaged_form,
    trivial_character,
    twist_pointwise,
    twist_series,
)
from .chains import TailProfile, chain_coefficients, chain_profile
from .lseries import (
    LArgument,
    multiple_L_continued,
    multiple_L_series,
    reciprocal_gamma_factor,
)
from .iterated import (
    INF_BASE,
    CostGuardError,
    PathGrid,
    VerticalPathSpec,
    antiderivative_word_integral,
    eichler_fourier_series,
    eichler_integral_direct,
    eichler_integrand_eval,
    mellin_vertical,
    mellin_vertical_quadrature,
    period_integral_direct,
    period_integrand_eval,
)
from .identities import (
    ConfigurationError,
    WeightLink,
    alphas_from_weights,
    duality_combination,
    enumerate_shift_indices,
    functional_equation_residual,
    gamma_binomial_residual,
    integrand_combination,
    integrand_shift_matrices,
    lambda_completed,
    lambda_transform,
    make_l_evaluator,
    make_period_evaluator,
    matched_instances,
    modularity_residual,
    shift_combination,
    slash_action,
    twisted_completed,
    twisted_eichler_value,
    twisted_residual,
    twisted_tilde_series,
    weight_link,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ConfigurationError",
    "CostGuardError",
    "DirichletCharacter",
    "DomainError",
    "EvalResult",
    "FourierSeries",
    "INF_BASE",
    "LArgument",
    "PathGrid",
    "PoleError",
    "QExpansion",
    "RegionError",
    "TailProfile",
    "ValidationError",
    "VerticalPathSpec",
    "WeightLink",
    "alphas_from_weights",
    "antiderivative_word_integral",
    "branch_log",
    "branch_pow",
    "builtin_form",
    "builtin_names",
    "chain_coefficients",
    "chain_profile",
    "duality_combination",
    "eichler_fourier_series",
    "eichler_integral_direct",
    "eichler_integrand_eval",
    "enumerate_shift_indices",
    "evaluate_form",
    "evaluate_form_batch",
    "functional_equation_residual",
    "gamma_binomial_residual",
    "gamma_complex",
    "gamma_factor",
    "integrand_combination",
    "integrand_shift_matrices",
    "lambda_completed",
    "lambda_transform",
    "legendre_character",
    "load_coefficients",
    "make_l_evaluator",
    "make_period_evaluator",
    "matched_instances",
    "mellin_vertical",
    "mellin_vertical_quadrature",
    "modularity_residual",
    "multiple_L_continued",
    "multiple_L_series",
    "packaged_form",
    "period_integral_direct",
    "period_integrand_eval",
    "reciprocal_gamma_factor",
    "shift_combination",
    "slash_action",
    "trivial_character",
    "twist_pointwise",
    "twist_series",
    "twisted_completed",
    "twisted_eichler_value",
    "twisted_residual",
    "twisted_tilde_series",
    "upper_incomplete_gamma",
    "weight_link",
    "__version__",
]
