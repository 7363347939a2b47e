"""Galois-module decomposition of Kummer groups of local fields."""

from .group_ring import (
    NEG_INF,
    ArithmeticDomainError,
    GroupRingElement,
    RingParams,
    TwistClass,
    canonical_table,
    check_upower,
    classify_twist,
    from_canonical,
    from_coeffs,
    is_neg_inf,
    one,
    p_operator,
    phi_d,
    scalar,
    sigma,
    sigma_minus_d,
    zero,
)

__all__ = [
    "NEG_INF",
    "ArithmeticDomainError",
    "GroupRingElement",
    "RingParams",
    "TwistClass",
    "canonical_table",
    "check_upower",
    "classify_twist",
    "from_canonical",
    "from_coeffs",
    "is_neg_inf",
    "one",
    "p_operator",
    "phi_d",
    "scalar",
    "sigma",
    "sigma_minus_d",
    "zero",
]
