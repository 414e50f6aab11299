"""Exception types raised across the package."""


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    def __init__(self, deviation: float, what: str = "matrix"):
        self.deviation = deviation
        super().__init__(f"{what} is not Hermitian (max |M - M^dag| = {deviation:.3e})")


class NotAStateError(ValueError):
    """Operator fails trace/positivity requirements of a density matrix."""

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message)


class NotUnitaryError(ValueError):
    def __init__(self, deviation: float):
        self.deviation = deviation
        super().__init__(f"unitarity violation: max |U^dag U - I| = {deviation:.3e}")


class NotCPTPError(ValueError):
    pass


class SingularMatrixError(ArithmeticError):
    def __init__(self, condition: float, message: str | None = None):
        self.condition = condition
        super().__init__(message or f"matrix is singular (condition estimate {condition:.3e})")


class NonInvertibleMapError(SingularMatrixError):
    def __init__(self, condition: float, label: str | None = None):
        self.label = label
        where = f" at {label}" if label is not None else ""
        super().__init__(
            condition, f"map{where} is not invertible (condition estimate {condition:.3e})"
        )


class SpanningError(ValueError):
    """Tomography input states do not span the operator space."""

    def __init__(self, condition: float, message: str | None = None):
        self.condition = condition
        super().__init__(
            message or f"input states do not span operator space (condition {condition:.3e})"
        )


class ScenarioError(ValueError):
    """Malformed or invalid scenario definition (CLI exit code 2)."""
