"""Exception types shared across the package."""


class ParamError(ValueError):
    """A problem or model parameter is outside its admissible range."""


class DomainError(ValueError):
    """A function was queried outside its domain of validity."""


class LevelError(ValueError):
    """Requested level c lies outside the attainable range of the level function."""


class InfeasibleSingular(RuntimeError):
    """A singular arc would require a control outside [0, 1]."""


class InfeasibleSchedule(RuntimeError):
    """Switching times do not fit inside the horizon with the fuel budget."""


class NotAnExtremal(RuntimeError):
    """Shooting converged to nothing, or the costate sign pattern is wrong."""


class VerifierFlag(RuntimeError):
    """An internal consistency check failed on a trajectory (bad input or bug)."""


class NoExtremalFound(RuntimeError):
    """No candidate structure produced a verified extremal (diagnostic)."""


class NoFeasibleSchedule(RuntimeError):
    """A structured search found no fuel-feasible switch schedule."""


class TheoryViolation(RuntimeError):
    """A guaranteed analytic property failed numerically; signals a bug."""


class SingularDenominator(ZeroDivisionError):
    """Closed-form costate evaluated where its denominator vanishes."""
