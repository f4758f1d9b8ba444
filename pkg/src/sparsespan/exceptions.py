"""Exception types shared across the package."""


class NumericalFailureError(RuntimeError):
    """A numerical routine (LP solve, SVD) failed to converge."""


class FaceLimitError(ValueError):
    """Exact l1 gain requested beyond the face-enumeration width limit."""


class SelectionError(RuntimeError):
    """No usable candidate was available to the selector."""
