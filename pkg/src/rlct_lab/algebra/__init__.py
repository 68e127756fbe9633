"""Symmetric polynomials, the Vandermonde singularity and exact learning coefficients."""

from .probes import RatioReport, ratio_bound_probe
from .rlct import (
    EnumerationResult,
    combine_product,
    combine_sum,
    local_lambda,
    local_lambda_terms,
    regular_reference,
    rlct_closed_form,
    rlct_enumerate,
)
from .symmetric import (
    FTable,
    Residual,
    SymCoeffs,
    annihilation_check,
    elem_sym_coeffs,
    f_coeffs,
    f_coeffs_multi,
    f_table,
)
from .vandermonde import (
    InvSets,
    MembershipCertificate,
    VandermondeInstance,
    compute_inv_sets,
    group_local_split,
    h_function,
    h_prime_function,
    local_ideal_form,
    sample_variety_point,
    variety_membership,
)

__all__ = [
    "EnumerationResult",
    "FTable",
    "InvSets",
    "MembershipCertificate",
    "RatioReport",
    "Residual",
    "SymCoeffs",
    "VandermondeInstance",
    "annihilation_check",
    "combine_product",
    "combine_sum",
    "compute_inv_sets",
    "elem_sym_coeffs",
    "f_coeffs",
    "f_coeffs_multi",
    "f_table",
    "group_local_split",
    "h_function",
    "h_prime_function",
    "local_ideal_form",
    "local_lambda",
    "local_lambda_terms",
    "ratio_bound_probe",
    "regular_reference",
    "rlct_closed_form",
    "rlct_enumerate",
    "sample_variety_point",
    "variety_membership",
]
