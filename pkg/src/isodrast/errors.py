"""Exception types raised across the package."""


class IsodrastError(Exception):
    """Base class for all package errors."""


class InvariantError(IsodrastError, ValueError):
    """A value type was constructed with data violating its invariants."""


class ExactnessError(IsodrastError):
    """The 1-form attached to a variation is not exact on the circle.

    Carries the measured period ``residual`` so callers can report it.
    """

    def __init__(self, residual, tolerance, label=""):
        self.residual = float(residual)
        self.tolerance = float(tolerance)
        self.label = label
        where = f" ({label})" if label else ""
        super().__init__(
            f"alpha_X is not exact{where}: period {self.residual:.6g} >= {self.tolerance:.3g}"
        )


class PositivityError(IsodrastError, ValueError):
    """A weighting expected to be positive is not."""


class DegenerateMetric(IsodrastError, ValueError):
    """A metric cell has |det g| below the degeneracy guard."""


class SignatureBreach(IsodrastError):
    """A metric flow changed the signature of some cell."""


class SchemaError(IsodrastError, ValueError):
    """An input document failed to parse or validate."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        parts = [message]
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field}")
        super().__init__(": ".join(parts[:1]) + ("" if len(parts) == 1 else " (" + ", ".join(parts[1:]) + ")"))


class ParseError(IsodrastError, ValueError):
    """A Hamiltonian or outer-map expression could not be parsed."""


class UnknownSuite(IsodrastError, KeyError):
    """The requested verification suite is not registered."""
