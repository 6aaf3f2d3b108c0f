"""Li-Yau type gradient estimates for positive solutions of the heat equation.

Modules: ``timefn`` (functions of time, quadrature, ODEs), ``catalog``
(registered estimates), ``condition`` (the quadratic condition on a pair),
``designer`` (building pairs), ``kernels`` (model-space heat kernels and a
circle solver), ``compare`` (dominance between estimates) and ``cli``.
"""

from .catalog import (
    ESTIMATE_IDS,
    LINEAR_IDS,
    Estimate,
    GeometryParams,
    SolutionState,
    list_catalog,
    make_estimate,
    max_allowed_gradient,
    residual,
)
from .condition import Verdict, condition_b_holds, verify_estimate_condition, verify_over_interval
from .errors import (
    AccuracyError,
    BlowUpError,
    ConfigError,
    ConstructionError,
    DomainError,
    InputError,
    LiYauError,
    ProfileError,
    SingularityError,
    SpliceError,
)
from .kernels import evaluate, make_kernel, verify_estimate
from .timefn import TimeFn

__version__ = "0.1.0"

__all__ = [
    "ESTIMATE_IDS",
    "LINEAR_IDS",
    "Estimate",
    "GeometryParams",
    "SolutionState",
    "list_catalog",
    "make_estimate",
    "max_allowed_gradient",
    "residual",
    "Verdict",
    "condition_b_holds",
    "verify_estimate_condition",
    "verify_over_interval",
    "AccuracyError",
    "BlowUpError",
    "ConfigError",
    "ConstructionError",
    "DomainError",
    "InputError",
    "LiYauError",
    "ProfileError",
    "SingularityError",
    "SpliceError",
    "evaluate",
    "make_kernel",
    "verify_estimate",
    "TimeFn",
]
