"""Exception hierarchy shared across the package."""


class HapsarError(Exception):
    """Base class for all package errors."""


class ConfigError(HapsarError, ValueError):
    """Invalid or inconsistent configuration value."""


class DomainError(HapsarError, ValueError):
    """Argument outside the domain where a model is defined."""


class ConstraintError(HapsarError, ValueError):
    """Trajectory input violates a hard geometric or operating bound."""


class SlotIndexError(HapsarError, IndexError):
    """Slot index outside 1..MN or not allowed for the requested quantity."""


class SingularGeometryError(HapsarError, ValueError):
    """Degenerate geometry, e.g. platform collocated with the base station."""


class EnergyDepletedError(HapsarError):
    """Battery energy dropped to zero or below."""

    def __init__(self, slot, energy):
        super().__init__(f"battery depleted at slot {slot}: E = {energy:.6g} J")
        self.slot = slot
        self.energy = energy


class InfeasibleScenarioError(HapsarError):
    """No sweep granularity produced a feasible plan."""

    def __init__(self, message, trace=None, residuals=None):
        super().__init__(message)
        self.trace = trace or []
        self.residuals = residuals or {}


class VerificationError(HapsarError):
    """A plan failed the raw nonlinear constraint check."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GridTooLargeError(HapsarError):
    """Oracle grid would exceed the enumeration limit."""

    def __init__(self, size, limit):
        super().__init__(f"grid of {size} combinations exceeds the limit of {limit}")
        self.size = size
        self.limit = limit
