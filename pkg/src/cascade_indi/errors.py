"""Exception hierarchy shared by the controllers, simulator and harness."""


class IndiError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(IndiError, ValueError):
    """An input violated a documented precondition (shape, NaN, norm...)."""


class SingularAttitudeError(IndiError, ValueError):
    """Euler extraction requested inside the pitch gimbal region."""


class SingularInversionError(IndiError, ArithmeticError):
    """A control-effectiveness matrix could not be inverted safely."""


class InfeasibleThrustVectorError(IndiError, ValueError):
    """The requested thrust vector cannot be produced by any roll/pitch."""


class FitError(IndiError, ValueError):
    """Curve fit on a rank-deficient sample set."""


class ConfigError(IndiError, ValueError):
    """Malformed or invalid scenario configuration."""

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class SchemaError(IndiError, KeyError):
    """A trace lacks columns required by an analysis."""

    def __str__(self):
        return str(self.args[0]) if self.args else "schema error"


class NumericDivergence(IndiError, ArithmeticError):
    """The simulation produced a non-finite state."""

    def __init__(self, tick, detail=""):
        self.tick = tick
        super().__init__(f"non-finite state at tick {tick}" + (f": {detail}" if detail else ""))
