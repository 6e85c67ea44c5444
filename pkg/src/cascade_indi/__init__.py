"""Cascaded incremental nonlinear dynamic inversion (INDI) for quadrotors.

Inner loop: angular-acceleration INDI with quaternion attitude PD.  Outer
loop: linear-acceleration INDI through the thrust vector, linearized or with
a nonlinear inversion.  Includes online effectiveness adaptation, a 6-DOF
simulator with wind scenarios and a PID baseline, and a CLI harness.
"""
from ._jit import USE_NUMBA
from .errors import (ConfigError, ContractViolation, FitError, IndiError, InfeasibleThrustVectorError,
                     NumericDivergence, SchemaError, SingularAttitudeError, SingularInversionError)

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA", "ConfigError", "ContractViolation", "FitError", "IndiError",
    "InfeasibleThrustVectorError", "NumericDivergence", "SchemaError", "SingularAttitudeError",
    "SingularInversionError", "__version__",
]
