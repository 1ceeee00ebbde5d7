"""Strata of hyperbolic polynomials and their derivatives."""

from ._core import (
    DomainError,
    NumericalError,
    classify,
    derivative_roots,
    dimension,
    enumerate,
    is_admissible,
    retract,
    sample_point,
    sensitivity,
    sensitivity_fd,
    verify,
    zero_dim_point,
)

__all__ = [
    "DomainError",
    "NumericalError",
    "classify",
    "derivative_roots",
    "dimension",
    "enumerate",
    "is_admissible",
    "retract",
    "sample_point",
    "sensitivity",
    "sensitivity_fd",
    "verify",
    "zero_dim_point",
]
