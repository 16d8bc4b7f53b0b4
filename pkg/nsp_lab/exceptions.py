"""Exceptions raised by nsp_lab."""


class NspLabError(Exception):
    """Base class for every error raised by the lab."""


class DomainError(NspLabError, ValueError):
    """Argument outside the domain of an operation."""


class OutsideRegionError(DomainError):
    """Query point outside the characteristic region |u| <= k(rho)."""


class LawError(NspLabError, ValueError):
    """Pressure law parameters violate the admissibility conditions."""


class NotApplicableError(NspLabError):
    """Operation not defined for the given law or parameter range."""


class InfeasibleError(NspLabError):
    """A construction or root bracket has no admissible solution."""


class IntegrationError(NspLabError):
    """ODE integration failed to reach its terminal event."""


class ConfigError(NspLabError):
    """Run configuration failed validation."""

    def __init__(self, message, errors=None):
        """Keep the field-level messages next to the summary."""
        super().__init__(message)
        self.errors = list(errors or [])


class BoundViolationError(NspLabError):
    """Asymptotic bounds of a pressure law do not hold on the sampled grid."""

    def __init__(self, report):
        """Build the message from the worst violation in ``report``."""
        quantity, rho, ratio = report.worst
        super().__init__(f"{quantity} bound violated at rho={rho:.6g} (ratio {ratio:.6g})")
        self.report = report


class ConvergenceError(NspLabError):
    """Fixed-point iteration did not reach its tolerance."""

    def __init__(self, message, deltas=None, ratio=None):
        """Attach the delta history and fitted contraction ratio."""
        super().__init__(message)
        self.deltas = list(deltas or [])
        self.ratio = ratio


class BlowupError(NspLabError):
    """The Lagrangian state lost positivity or monotonicity."""

    def __init__(self, message, cell, time):
        """Record the offending cell index and the time of failure."""
        super().__init__(f"{message} (cell {cell}, t={time:.6g})")
        self.cell = cell
        self.time = time


class StepRejected(NspLabError):
    """Requested time step violates the CFL contract."""

    def __init__(self, requested, admissible):
        """Carry the admissible step so callers can retry."""
        super().__init__(f"dt={requested:.6g} exceeds admissible {admissible:.6g}")
        self.requested = requested
        self.admissible = admissible
