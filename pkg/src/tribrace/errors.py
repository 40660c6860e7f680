"""Exception types shared across the toolkit."""


class TribraceError(Exception):
    """Base class for all toolkit errors."""


class DomainError(TribraceError):
    """An argument is outside its mathematical domain (e.g. efficiency > 1)."""


class LimitViolation(TribraceError):
    """A joint limit would be violated by the requested configuration.

    Attributes:
        leg: "left", "central" or "right".
        quantity: "extension" or "rotation".
        value: the offending value.
    """

    def __init__(self, leg: str, quantity: str, value: float):
        self.leg = leg
        self.quantity = quantity
        self.value = value
        super().__init__(f"{leg} leg {quantity} out of range: {value:.6g}")


class GeometryError(TribraceError):
    """Degenerate or invalid geometry (self-intersecting polygon, etc.)."""


class SolverError(TribraceError):
    """An iterative solver failed to converge within its budget."""


class ConfigError(TribraceError):
    """Invalid or inconsistent scenario configuration."""


class NumericalError(TribraceError):
    """Simulation state became non-finite."""
