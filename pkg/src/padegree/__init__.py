"""K_s limit laws, Polya urns and preferential-attachment degree asymptotics."""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    ConvergenceError,
    DomainError,
    ResourceLimitError,
    UnsupportedParametersError,
)
from .ks import KsDist
from .pmf import Pmf
from .special import QuadratureConfig, kummer_u, kummer_u_deriv, log_gamma
from .urns import UrnSpec, exact_pmf

__all__ = [
    "ConsistencyError",
    "ConvergenceError",
    "DomainError",
    "KsDist",
    "Pmf",
    "QuadratureConfig",
    "ResourceLimitError",
    "UnsupportedParametersError",
    "UrnSpec",
    "exact_pmf",
    "kummer_u",
    "kummer_u_deriv",
    "log_gamma",
]
